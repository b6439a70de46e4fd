//! Fourier coefficients of exponential sums on `[0, P]`
//!
//! `c_k(y) = (1/P) ∫_0^P y(t) exp(-2πikt/P) dt` in closed form for every term
//! type, the equivalent confluent partial fraction in `k`, and an adaptive
//! quadrature oracle that only ever evaluates `y(t)` pointwise.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ExponentialSumModel;
use crate::pfrac::{ConfluentPartialFraction, FractionCluster};

/// Distance of `-iλP` to the nearest integer below which a term is treated as
/// `P`-periodic.
pub const PERIODICITY_TOL: f64 = 1e-9;

const TWO_PI_I: Complex64 = Complex64::new(0.0, 2.0 * PI);

/// A set of Fourier coefficients `c_k` for distinct integer `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierDataset {
    pub period: f64,
    pub entries: Vec<(i64, Complex64)>,
}

impl FourierDataset {
    pub fn new(period: f64, entries: Vec<(i64, Complex64)>) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidInput(format!("period must be positive, got {period}")));
        }
        let mut seen = BTreeSet::new();
        for &(k, _) in &entries {
            if !seen.insert(k) {
                return Err(Error::InvalidInput(format!("duplicate Fourier index {k}")));
            }
        }
        Ok(Self { period, entries })
    }

    /// Exact coefficients of `model` at the given indices.
    pub fn from_model(
        model: &ExponentialSumModel,
        period: f64,
        indices: impl IntoIterator<Item = i64>,
    ) -> Result<Self> {
        let entries = indices
            .into_iter()
            .map(|k| (k, coeff_model(model, period, k)))
            .collect();
        Self::new(period, entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, k: i64) -> Option<Complex64> {
        self.entries.iter().find(|(i, _)| *i == k).map(|(_, c)| *c)
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        self.entries.iter().map(|(k, _)| *k)
    }
}

/// Returns `n` when `-iλP` lies within [`PERIODICITY_TOL`] of the integer `n`.
pub fn periodic_index(lambda: Complex64, period: f64) -> Option<i64> {
    let c = -Complex64::i() * lambda * period;
    let n = c.re.round();
    ((c - n).norm() <= PERIODICITY_TOL).then_some(n as i64)
}

pub(crate) fn factorial(m: usize) -> f64 {
    (1..=m).map(|i| i as f64).product()
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `c_k(γ t^m exp(2πλt))` on `[0, P]`.
pub fn coeff_monomial_exp(gamma: Complex64, m: usize, lambda: Complex64, period: f64, k: i64) -> Complex64 {
    if let Some(n) = periodic_index(lambda, period) {
        if -Complex64::i() * lambda * period != Complex64::new(n as f64, 0.0) {
            log::warn!("frequency {lambda} is within {PERIODICITY_TOL:e} of periodic; using the periodic formula");
        }
        return coeff_monomial_periodic(gamma, m, n, period, k);
    }

    let pm = period.powi(m as i32) * factorial(m);
    let e = (lambda * (2.0 * PI * period)).exp();
    let u = Complex64::new(k as f64, 0.0) + Complex64::i() * lambda * period;
    let x = TWO_PI_I * u;

    // 1 - E Σ_{ℓ≤m} x^ℓ/ℓ! equals E Σ_{ℓ>m} x^ℓ/ℓ! since E e^x = 1. The tail
    // series avoids the cancellation of the direct form when |x| is small.
    if x.norm() < (m + 1) as f64 {
        let mut term = Complex64::new(1.0 / factorial(m + 1), 0.0);
        let mut sum = term;
        for j in 1..64 {
            term *= x / (m + 1 + j) as f64;
            sum += term;
            if term.norm() <= f64::EPSILON * 1e-3 * sum.norm() {
                break;
            }
        }
        return gamma * pm * e * sum;
    }

    let mut partial = Complex64::new(1.0, 0.0);
    for l in (1..=m).rev() {
        partial = partial * x / l as f64 + 1.0;
    }
    gamma * pm / x.powu(m as u32 + 1) * (Complex64::new(1.0, 0.0) - e * partial)
}

fn coeff_monomial_periodic(gamma: Complex64, m: usize, n: i64, period: f64, k: i64) -> Complex64 {
    let pm = period.powi(m as i32);
    if k == n {
        return gamma * pm / (m + 1) as f64;
    }
    if m == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let x = TWO_PI_I * (k - n) as f64;
    // Σ_{ℓ=1}^m x^ℓ/ℓ! in Horner form
    let mut partial = Complex64::new(0.0, 0.0);
    for l in (1..=m).rev() {
        partial = (partial + 1.0) * x / l as f64;
    }
    -gamma * pm * factorial(m) / x.powu(m as u32 + 1) * partial
}

/// `c_k(γ exp(2πλt))`; the Kronecker case returns `γ` at `k = -iλP`.
pub fn coeff_proper(gamma: Complex64, lambda: Complex64, period: f64, k: i64) -> Complex64 {
    coeff_monomial_exp(gamma, 0, lambda, period, k)
}

/// `c_k(γ exp(2παt))` for real `γ` and real `α ≠ 0`, in real-arithmetic form.
pub fn coeff_real_proper(gamma: f64, alpha: f64, period: f64, k: i64) -> Complex64 {
    let kf = k as f64;
    let scale = gamma * (PI * alpha * period).exp() * (PI * alpha * period).sinh()
        / (PI * (alpha * alpha * period * period + kf * kf));
    Complex64::new(period * alpha, kf) * scale
}

pub fn coeff_model(model: &ExponentialSumModel, period: f64, k: i64) -> Complex64 {
    model
        .terms
        .iter()
        .flat_map(|term| {
            term.gammas
                .iter()
                .enumerate()
                .map(move |(m, &g)| coeff_monomial_exp(g, m, term.lambda, period, k))
        })
        .sum()
}

/// Poles `C_j = -iλ_j P` and the coefficients `A_{j,ℓ}` (non-periodic terms)
/// or `A*_{j,ℓ}` (periodic terms) of the partial fraction that reproduces
/// `c_k(y)` for every `k` outside the periodic index set.
pub fn confluent_params(model: &ExponentialSumModel, period: f64) -> ConfluentPartialFraction {
    let clusters = model
        .terms
        .iter()
        .map(|term| {
            let n = term.degree();
            let gamma = &term.gammas;
            let ppow = |m: usize| period.powi(m as i32);
            let tail = |l: usize| -> Complex64 {
                ((l + 1)..=n).map(|m| gamma[m] * ppow(m) * binomial(m, l)).sum()
            };
            let scale = |l: usize| factorial(l) / TWO_PI_I.powu(l as u32 + 1);

            match periodic_index(term.lambda, period) {
                Some(k0) => FractionCluster {
                    pole: Complex64::new(k0 as f64, 0.0),
                    coeffs: (0..n).map(|l| -scale(l) * tail(l)).collect(),
                    periodic: true,
                },
                None => {
                    let e = (term.lambda * (2.0 * PI * period)).exp();
                    FractionCluster {
                        pole: -Complex64::i() * term.lambda * period,
                        coeffs: (0..=n)
                            .map(|l| scale(l) * (gamma[l] * ppow(l) * (1.0 - e) - e * tail(l)))
                            .collect(),
                        periodic: false,
                    }
                }
            }
        })
        .collect();
    ConfluentPartialFraction { clusters }
}

// Gauss–Kronrod 7/15 abscissae and weights on [-1, 1].
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gauss_kronrod<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Panel {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let center = f(mid);
    let mut kronrod = center * WGK[7];
    let mut gauss = center * WG[3];
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(mid - dx) + f(mid + dx);
        kronrod += pair * WGK[i];
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        err: ((kronrod - gauss) * half).norm(),
    }
}

const MAX_PANELS: usize = 50_000;

/// Adaptive Gauss–Kronrod evaluation of `c_k(y)` to absolute tolerance `tol`,
/// using only pointwise evaluations of the model.
pub fn coeff_quadrature_oracle(model: &ExponentialSumModel, period: f64, k: i64, tol: f64) -> Result<Complex64> {
    if !(period > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidInput("period and tol must be positive".into()));
    }
    let omega = -2.0 * PI * k as f64 / period;
    let integrand = |t: f64| model.evaluate(t) * Complex64::from_polar(1.0 / period, omega * t);

    let initial = 16.max(4 * k.unsigned_abs() as usize);
    let width = period / initial as f64;
    let mut heap: BinaryHeap<Panel> = (0..initial)
        .map(|i| gauss_kronrod(&integrand, i as f64 * width, (i + 1) as f64 * width))
        .collect();

    loop {
        let estimate: f64 = heap.iter().map(|p| p.err).sum();
        if estimate <= tol {
            return Ok(heap.iter().map(|p| p.value).sum());
        }
        if heap.len() >= MAX_PANELS {
            return Err(Error::QuadratureNotConverged { tol, estimate });
        }
        let worst = heap.pop().expect("panel heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::QuadratureNotConverged { tol, estimate });
        }
        heap.push(gauss_kronrod(&integrand, worst.a, mid));
        heap.push(gauss_kronrod(&integrand, mid, worst.b));
    }
}
