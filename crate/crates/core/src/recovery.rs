//! End-to-end parameter recovery from Fourier coefficients.
//!
//! The complex pipeline fits `k ↦ c_k` with modified AAA, drops zero-weight
//! support points (periodic indices), finds and clusters the poles, solves the
//! confluent partial fraction and maps poles and coefficients back to
//! frequencies and polynomial coefficients. The real pipeline works on the
//! modified coefficients `Re c_k + (i/k) Im c_k` over abscissae `k²`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::aaa::{self, AaaDiagnostics, BarycentricRational};
use crate::error::{Error, Result};
use crate::fourier::{binomial, coeff_model, coeff_monomial_exp, factorial, FourierDataset};
use crate::linalg;
use crate::model::{self, model_distance, ExpTerm, ExponentialSumModel, ModelDistance};
use crate::pfrac::{self, ConfluentPartialFraction, FractionCluster, PoleCluster, PoleClusterSet};

/// Upper end of the band in which a cluster center is reported as ambiguous:
/// farther than [`pfrac::INTEGER_TOL`] from an integer but not by much.
pub const AMBIGUOUS_INTEGER_TOL: f64 = 1e-3;
/// `|1 − e^{2πiC}|` below which a pole cannot be mapped back as non-periodic.
pub const NEAR_PERIODIC_TOL: f64 = 1e-12;
/// Poles of the real path whose relative imaginary part exceeds this are
/// rejected; smaller imaginary parts are rounding and are dropped.
pub const NONREAL_POLE_TOL: f64 = 1e-3;
/// Estimated parameter errors above this are reported as warnings.
pub const ESTIMATED_ERROR_WARN: f64 = 1e-7;

const TWO_PI_I: Complex64 = Complex64::new(0.0, 2.0 * PI);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryMode {
    /// Simple poles only; every pole is its own term.
    Proper,
    /// Real frequencies and real coefficients from indices `k ≥ 1`.
    RealProper,
    /// Polynomial coefficients through pole clustering.
    Extended,
    /// Currently the extended pipeline, which contains the proper one.
    #[default]
    Auto,
}

impl FromStr for RecoveryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proper" => Ok(Self::Proper),
            "real_proper" => Ok(Self::RealProper),
            "extended" => Ok(Self::Extended),
            "auto" => Ok(Self::Auto),
            other => Err(Error::InvalidInput(format!("unknown mode {other:?}"))),
        }
    }
}

impl fmt::Display for RecoveryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Proper => "proper",
            Self::RealProper => "real_proper",
            Self::Extended => "extended",
            Self::Auto => "auto",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryOptions {
    pub tol: f64,
    /// Maximal AAA steps; `None` uses as many as the data allow.
    pub jmax: Option<usize>,
    pub merge_tol: f64,
    pub zero_weight_tol: f64,
    pub mode: RecoveryMode,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self {
            tol: aaa::DEFAULT_TOL,
            jmax: None,
            merge_tol: pfrac::DEFAULT_MERGE_TOL,
            zero_weight_tol: aaa::DEFAULT_ZERO_TOL,
            mode: RecoveryMode::Auto,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub model: ExponentialSumModel,
    /// Indices at which the data are not reproduced by the pole part.
    pub sigma: Vec<i64>,
    pub aaa: AaaDiagnostics,
    /// The fitted rational after pruning, on the abscissae the fit used.
    pub rational: BarycentricRational,
    /// Support points removed for vanishing weight.
    pub pruned: Vec<Complex64>,
    pub clusters: PoleClusterSet,
    pub partial_fraction: ConfluentPartialFraction,
    /// Condition number of the coefficient solve.
    pub condition: f64,
    /// Largest deviation of the recovered model's coefficients from the data.
    pub data_residual: f64,
    /// First-order bound on the parameter error: inverse smallest singular
    /// value of the coefficient Jacobian times the data misfit.
    pub estimated_error: f64,
    pub warnings: Vec<String>,
    pub reference_distance: Option<ModelDistance>,
}

/// `λ = iC/P`.
pub fn freqs_from_poles(c: Complex64, period: f64) -> Complex64 {
    Complex64::i() * c / period
}

/// Inverts the map from the polynomial coefficients of a non-periodic term
/// to its partial-fraction coefficients `A_0, …, A_n` at pole `C`.
pub fn gammas_from_A(a: &[Complex64], c: Complex64, period: f64) -> Result<Vec<Complex64>> {
    let e = (TWO_PI_I * c).exp();
    let one_minus = 1.0 - e;
    if one_minus.norm() < NEAR_PERIODIC_TOL {
        return Err(Error::NearPeriodicPole(c.to_string()));
    }
    let n = a.len();
    let mut gamma = vec![Complex64::new(0.0, 0.0); n];
    for m in (0..n).rev() {
        let tail: Complex64 = (m + 1..n)
            .map(|l| gamma[l] * binomial(l, m) * period.powi(l as i32))
            .sum();
        let lead = TWO_PI_I.powu(m as u32 + 1) / factorial(m) * a[m];
        gamma[m] = (lead + e * tail) / (one_minus * period.powi(m as i32));
    }
    Ok(gamma)
}

/// Inverts the map from the polynomial coefficients `γ_0, …, γ_n` of a
/// periodic term to `(c̆, A*_0, …, A*_{n−1})`, where `c̆` is the term's own
/// Fourier coefficient at its integer pole.
pub fn gammas_from_Astar(astar: &[Complex64], c_breve: Complex64, period: f64) -> Vec<Complex64> {
    let n = astar.len();
    let mut gamma = vec![Complex64::new(0.0, 0.0); n + 1];
    for m in (0..n).rev() {
        let tail: Complex64 = (m + 2..=n)
            .map(|l| gamma[l] * binomial(l, m) * period.powi(l as i32))
            .sum();
        let lead = TWO_PI_I.powu(m as u32 + 1) / factorial(m) * astar[m];
        gamma[m + 1] = -(lead + tail) / (period.powi(m as i32 + 1) * (m + 1) as f64);
    }
    let rest: Complex64 = (1..=n)
        .map(|m| gamma[m] * period.powi(m as i32) / (m + 1) as f64)
        .sum();
    gamma[0] = c_breve - rest;
    gamma
}

/// Absolute condition number `1/σ_min` of the map from model parameters
/// (every `λ_j` and `γ_{j,m}`) to the coefficients at `indices`. A data error
/// of 2-norm `δ` moves the parameters by at most about `δ/σ_min`.
pub fn parameter_sensitivity(model: &ExponentialSumModel, period: f64, indices: &[i64]) -> Result<f64> {
    sensitivity(model, period, indices, false)
}

/// As [`parameter_sensitivity`], restricted to real parameters.
pub fn real_parameter_sensitivity(model: &ExponentialSumModel, period: f64, indices: &[i64]) -> Result<f64> {
    sensitivity(model, period, indices, true)
}

/// Jacobian of the coefficients at `indices` with respect to every `λ_j`
/// and `γ_{j,m}`. With `real` set, rows hold real and imaginary parts
/// separately and the parameters are taken as real.
fn jacobian(model: &ExponentialSumModel, period: f64, indices: &[i64], real: bool) -> linalg::CMat {
    let mut columns: Vec<Box<dyn Fn(i64) -> Complex64 + '_>> = Vec::new();
    for term in &model.terms {
        let lambda = term.lambda;
        columns.push(Box::new(move |k| {
            term.gammas
                .iter()
                .enumerate()
                .map(|(m, &g)| coeff_monomial_exp(g, m + 1, lambda, period, k))
                .sum::<Complex64>()
                * (2.0 * PI)
        }));
        for m in 0..term.gammas.len() {
            columns.push(Box::new(move |k| coeff_monomial_exp(Complex64::new(1.0, 0.0), m, lambda, period, k)));
        }
    }
    if real {
        linalg::from_fn(2 * indices.len(), columns.len(), |i, j| {
            let v = columns[j](indices[i / 2]);
            Complex64::new(if i % 2 == 0 { v.re } else { v.im }, 0.0)
        })
    } else {
        linalg::from_fn(indices.len(), columns.len(), |i, j| columns[j](indices[i]))
    }
}

fn sensitivity(model: &ExponentialSumModel, period: f64, indices: &[i64], real: bool) -> Result<f64> {
    let jac = jacobian(model, period, indices, real);
    if jac.ncols() == 0 {
        return Ok(0.0);
    }
    if jac.ncols() > jac.nrows() {
        return Ok(f64::INFINITY);
    }
    let s = linalg::singular_values(&jac)?;
    let smin = s.last().copied().unwrap_or(0.0);
    Ok(if smin > 0.0 { 1.0 / smin } else { f64::INFINITY })
}

/// Largest data misfit of `model` and an estimate of its parameter error:
/// the linearized correction toward the data plus the effect of rounding
/// the data.
fn error_estimate(model: &ExponentialSumModel, dataset: &FourierDataset, real: bool) -> (f64, f64) {
    let period = dataset.period;
    let indices: Vec<i64> = dataset.indices().collect();
    let misfit: Vec<Complex64> = dataset
        .entries
        .iter()
        .map(|&(k, ck)| ck - coeff_model(model, period, k))
        .collect();
    let max_dev = misfit.iter().map(|d| d.norm()).fold(0.0, f64::max);
    let fmax = dataset.entries.iter().map(|e| e.1.norm()).fold(0.0, f64::max);
    let rhs: Vec<Complex64> = if real {
        misfit.iter().flat_map(|d| [Complex64::new(d.re, 0.0), Complex64::new(d.im, 0.0)]).collect()
    } else {
        misfit
    };
    let jac = jacobian(model, period, &indices, real);
    let step = match linalg::lstsq(&jac, &rhs, 0.0) {
        Ok((x, _)) => x.iter().map(|v| v.norm()).fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    };
    let sens = sensitivity(model, period, &indices, real).unwrap_or(f64::INFINITY);
    let est = step + sens * f64::EPSILON * fmax;
    (max_dev, if est.is_nan() { f64::INFINITY } else { est })
}

fn push_estimate_warning(warnings: &mut Vec<String>, estimated_error: f64) {
    if !(estimated_error <= ESTIMATED_ERROR_WARN) {
        warnings.push(format!("estimated parameter error {estimated_error:.2e} exceeds {ESTIMATED_ERROR_WARN:.0e}"));
    }
}

fn default_jmax(len: usize) -> usize {
    (len / 2).min(len.saturating_sub(2)).max(1)
}

fn run_aaa(
    points: &[Complex64],
    values: &[Complex64],
    opts: &RecoveryOptions,
) -> Result<(BarycentricRational, AaaDiagnostics)> {
    let jmax = opts.jmax.unwrap_or_else(|| default_jmax(points.len()));
    let (r, diag) = aaa::aaa_fit(points, values, opts.tol, jmax)?;
    if !diag.converged {
        return Err(match opts.jmax {
            None => Error::InsufficientCoefficients {
                len: points.len(),
                max_degree: diag.iterations,
                residual: diag.final_residual,
            },
            Some(_) => Error::NotConverged {
                iterations: diag.iterations,
                residual: diag.final_residual,
            },
        });
    }
    Ok((r, diag))
}

fn validate_options(opts: &RecoveryOptions) -> Result<()> {
    if !(opts.tol > 0.0) || !(opts.merge_tol > 0.0) || !(opts.zero_weight_tol >= 0.0) {
        return Err(Error::InvalidInput("tol and merge_tol must be positive, zero_weight_tol non-negative".into()));
    }
    Ok(())
}

fn singleton_clusters(raw: &[Complex64], merge_tol: f64) -> PoleClusterSet {
    PoleClusterSet {
        raw_poles: raw.to_vec(),
        clusters: raw
            .iter()
            .map(|&p| PoleCluster { center: p, count: 1, members: vec![p] })
            .collect(),
        merge_tol,
    }
}

/// Recovers a model from complex Fourier coefficients. `RealProper` mode is
/// forwarded to [`recover_real_proper`].
pub fn recover(
    dataset: &FourierDataset,
    opts: &RecoveryOptions,
    reference: Option<&ExponentialSumModel>,
) -> Result<RecoveryReport> {
    validate_options(opts)?;
    if opts.mode == RecoveryMode::RealProper {
        return recover_real_proper(dataset, opts, reference);
    }
    let period = dataset.period;
    let points: Vec<Complex64> = dataset.indices().map(|k| Complex64::new(k as f64, 0.0)).collect();
    let values: Vec<Complex64> = dataset.entries.iter().map(|(_, c)| *c).collect();
    let mut warnings = Vec::new();

    let (r, diag) = run_aaa(&points, &values, opts)?;
    if !diag.fallback_steps.is_empty() {
        warnings.push(format!("degenerate weight combination at AAA steps {:?}", diag.fallback_steps));
    }
    let (mut pr, pruned) = aaa::prune_zero_weights(&r, opts.zero_weight_tol)?;
    if !pruned.is_empty() {
        pr = aaa::refit_weights(&pr, &points, &values, &pruned)?;
    }
    let raw = if pr.len() >= 2 { pfrac::poles(&pr)? } else { Vec::new() };
    let clusters = match opts.mode {
        RecoveryMode::Proper => singleton_clusters(&raw, opts.merge_tol),
        _ => pfrac::cluster_poles(&raw, opts.merge_tol)?,
    };

    let mut sigma: Vec<i64> = pruned.iter().map(|z| z.re.round() as i64).collect();
    for cl in &clusters.clusters {
        match cl.integer() {
            Some(n) => {
                if dataset.get(n).is_none() {
                    return Err(Error::MissingPeriodicIndex(n));
                }
                sigma.push(n);
            }
            None => {
                let offset = (cl.center.re - cl.center.re.round()).abs().max(cl.center.im.abs());
                if offset <= AMBIGUOUS_INTEGER_TOL {
                    warnings.push(format!(
                        "pole cluster at {} is {offset:.1e} from an integer; treated as non-periodic",
                        cl.center
                    ));
                }
            }
        }
        if cl.count > 1 && cl.spread() > 0.5 * opts.merge_tol {
            log::debug!("pole cluster at {} has spread {:.2e}", cl.center, cl.spread());
        }
    }
    sigma.sort_unstable();
    sigma.dedup();

    let exclude: Vec<Complex64> = sigma.iter().map(|&n| Complex64::new(n as f64, 0.0)).collect();
    let (fraction, condition) = if clusters.clusters.is_empty() {
        (ConfluentPartialFraction::default(), 1.0)
    } else {
        pfrac::solve_residues_confluent(&pr.support, &pr.values, &clusters, &exclude)?
    };
    if condition > pfrac::CONDITION_WARN {
        warnings.push(format!("coefficient system is ill-conditioned (condition number {condition:.2e})"));
    }

    let mut terms = Vec::new();
    for fc in fraction.clusters.iter().filter(|c| !c.periodic) {
        terms.push(ExpTerm::new(
            freqs_from_poles(fc.pole, period),
            gammas_from_A(&fc.coeffs, fc.pole, period)?,
        ));
    }
    let periodic: Vec<&FractionCluster> = fraction.clusters.iter().filter(|c| c.periodic).collect();
    for fc in &periodic {
        let n = fc.pole.re as i64;
        let data = dataset.get(n).ok_or(Error::MissingPeriodicIndex(n))?;
        let others: Complex64 = periodic
            .iter()
            .filter(|o| o.pole != fc.pole)
            .map(|o| ConfluentPartialFraction { clusters: vec![(*o).clone()] }.evaluate(fc.pole))
            .sum();
        let c_breve = data - fraction.evaluate_part(fc.pole, false) - others;
        terms.push(ExpTerm::new(
            freqs_from_poles(fc.pole, period),
            gammas_from_Astar(&fc.coeffs, c_breve, period),
        ));
    }

    let centers: Vec<i64> = periodic.iter().map(|c| c.pole.re as i64).collect();
    let negligible = 10.0 * diag.threshold;
    for z in &pruned {
        let k = z.re.round() as i64;
        if centers.contains(&k) {
            continue;
        }
        let data = dataset.get(k).expect("pruned points come from the data");
        let gamma = data - pr.eval(*z);
        if gamma.norm() <= negligible {
            warnings.push(format!("pruned support point {k} carries no periodic term"));
            sigma.retain(|&s| s != k);
            continue;
        }
        terms.push(ExpTerm::new(Complex64::new(0.0, k as f64 / period), vec![gamma]));
    }

    let model = ExponentialSumModel::new(terms).canonicalize(model::DEFAULT_MERGE_TOL);
    let reference_distance = reference.map(|m| model_distance(&model, &m.canonicalize(model::DEFAULT_MERGE_TOL)));
    let (data_residual, estimated_error) = error_estimate(&model, dataset, false);
    push_estimate_warning(&mut warnings, estimated_error);
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(RecoveryReport {
        model,
        sigma,
        aaa: diag,
        rational: pr,
        pruned,
        clusters,
        partial_fraction: fraction,
        condition,
        data_residual,
        estimated_error,
        warnings,
        reference_distance,
    })
}

/// Recovers a real proper sum `Σ γ_j exp(2π α_j t)` with real `α_j ≠ 0` and
/// real `γ_j` from coefficients at positive indices.
pub fn recover_real_proper(
    dataset: &FourierDataset,
    opts: &RecoveryOptions,
    reference: Option<&ExponentialSumModel>,
) -> Result<RecoveryReport> {
    validate_options(opts)?;
    let period = dataset.period;
    if let Some(k) = dataset.indices().find(|&k| k < 1) {
        return Err(Error::InvalidInput(format!("real recovery needs indices k >= 1, got {k}")));
    }
    let points: Vec<Complex64> = dataset.indices().map(|k| Complex64::new((k * k) as f64, 0.0)).collect();
    let values: Vec<Complex64> = dataset
        .entries
        .iter()
        .map(|&(k, c)| Complex64::new(c.re, c.im / k as f64))
        .collect();
    let mut warnings = Vec::new();

    let (r, diag) = run_aaa(&points, &values, opts)?;
    let mut raw = pfrac::poles(&r)?;
    for rho in &mut raw {
        let drift = rho.im.abs() / (1.0 + rho.norm());
        if drift > NONREAL_POLE_TOL {
            return Err(Error::RealRecovery(format!("pole {rho} is not real")));
        }
        if drift > 1e-8 {
            warnings.push(format!("pole {rho} has a spurious imaginary part"));
        }
        rho.im = 0.0;
    }
    let (g, condition) = pfrac::residues_at(&r.support, &r.values, &raw)?;
    if condition > pfrac::CONDITION_WARN {
        warnings.push(format!("residue system is ill-conditioned (condition number {condition:.2e})"));
    }

    let mut terms = Vec::with_capacity(raw.len());
    for (rho, gj) in raw.iter().zip(&g) {
        let (a, b) = (gj.re, gj.im);
        if b.abs() <= 1e-12 * a.abs() || b == 0.0 {
            return Err(Error::RealRecovery(format!("residue {gj} at pole {rho} has no imaginary part")));
        }
        if rho.re > 0.0 {
            return Err(Error::RealRecovery(format!("pole {rho} is positive, so α² < 0")));
        }
        // |α| from the pole ρ = −α²P² is far less sensitive than the residue
        // ratio A/B, which only supplies the sign.
        let ratio = a / b;
        let alpha = ratio.signum() * (-rho.re).sqrt() / period;
        if (ratio * ratio + rho.re).abs() > 1e-6 * (1.0 + rho.norm()) {
            warnings.push(format!("pole {rho} and residue ratio {ratio:.6e} are inconsistent"));
        }
        // g = γ s (Pα + i)/π with s = e^{παP} sinh(παP); real least-squares γ
        let x = PI * alpha * period;
        let s = x.exp() * x.sinh();
        let pa = period * alpha;
        let gamma = PI * (a * pa + b) / (s * (pa * pa + 1.0));
        terms.push(ExpTerm::new(Complex64::new(alpha, 0.0), vec![Complex64::new(gamma, 0.0)]));
    }

    let model = ExponentialSumModel::new(terms).canonicalize(model::DEFAULT_MERGE_TOL);
    let reference_distance = reference.map(|m| model_distance(&model, &m.canonicalize(model::DEFAULT_MERGE_TOL)));
    let (data_residual, estimated_error) = error_estimate(&model, dataset, true);
    push_estimate_warning(&mut warnings, estimated_error);
    for w in &warnings {
        log::warn!("{w}");
    }
    let clusters = singleton_clusters(&raw, opts.merge_tol);
    let partial_fraction = ConfluentPartialFraction {
        clusters: raw
            .iter()
            .zip(&g)
            .map(|(&pole, &c)| FractionCluster { pole, coeffs: vec![c], periodic: false })
            .collect(),
    };
    Ok(RecoveryReport {
        model,
        sigma: Vec::new(),
        aaa: diag,
        rational: r,
        pruned: Vec::new(),
        clusters,
        partial_fraction,
        condition,
        data_residual,
        estimated_error,
        warnings,
        reference_distance,
    })
}
