//! Extended exponential sums
//!
//! A model is a finite sum of terms `p_j(t) * exp(2π λ_j t)` where each `p_j`
//! is a complex polynomial stored by ascending powers. The order of a model is
//! `Σ (1 + deg p_j)` and its length is the number of terms.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default distance below which two frequencies are treated as one.
pub const DEFAULT_MERGE_TOL: f64 = 1e-10;

/// Relative threshold for dropping a vanishing leading coefficient.
pub const LEADING_DROP_TOL: f64 = 1e-12;

/// One term `(Σ_m gammas[m] t^m) * exp(2π lambda t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    pub lambda: Complex64,
    pub gammas: Vec<Complex64>,
}

impl ExpTerm {
    pub fn new(lambda: Complex64, gammas: Vec<Complex64>) -> Self {
        Self { lambda, gammas }
    }

    /// Polynomial degree `n_j`.
    pub fn degree(&self) -> usize {
        self.gammas.len().saturating_sub(1)
    }

    /// Horner evaluation of the polynomial factor.
    pub fn poly(&self, t: f64) -> Complex64 {
        self.gammas
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, g| acc * t + g)
    }

    pub fn evaluate(&self, t: f64) -> Complex64 {
        self.poly(t) * (self.lambda * (2.0 * PI * t)).exp()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExponentialSumModel {
    pub terms: Vec<ExpTerm>,
}

impl ExponentialSumModel {
    pub fn new(terms: Vec<ExpTerm>) -> Self {
        Self { terms }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Number of terms `M`.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `N = Σ (1 + n_j)`.
    pub fn order(&self) -> usize {
        self.terms.iter().map(|t| t.gammas.len()).sum()
    }

    /// Evaluates `y(t)`. Large `Re λ · t` overflows to an infinite value.
    pub fn evaluate(&self, t: f64) -> Complex64 {
        self.terms.iter().map(|term| term.evaluate(t)).sum()
    }

    /// Rejects terms with an empty coefficient list or non-finite entries.
    pub fn validate(&self) -> Result<()> {
        for (j, term) in self.terms.iter().enumerate() {
            if term.gammas.is_empty() {
                return Err(Error::InvalidInput(format!("term {j} has no coefficients")));
            }
            let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
            if !finite(&term.lambda) || !term.gammas.iter().all(finite) {
                return Err(Error::InvalidInput(format!("term {j} has non-finite parameters")));
            }
        }
        Ok(())
    }

    /// Brings the model into canonical form: frequencies closer than
    /// `merge_tol` are merged (coefficients added, the first frequency kept),
    /// vanishing leading coefficients are dropped, zero terms are removed and
    /// the terms are sorted by `(Re λ, Im λ)`.
    pub fn canonicalize(&self, merge_tol: f64) -> Self {
        let n = self.terms.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for a in 0..n {
            for b in (a + 1)..n {
                if (self.terms[a].lambda - self.terms[b].lambda).norm() <= merge_tol {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }

        let mut merged: Vec<(usize, ExpTerm)> = Vec::new();
        for i in 0..n {
            let root = find(&mut parent, i);
            match merged.iter_mut().find(|(r, _)| *r == root) {
                Some((_, term)) => add_poly(&mut term.gammas, &self.terms[i].gammas),
                None => merged.push((root, self.terms[i].clone())),
            }
        }

        let mut terms: Vec<ExpTerm> = merged
            .into_iter()
            .filter_map(|(_, mut term)| {
                trim_leading(&mut term.gammas);
                (!term.gammas.is_empty()).then_some(term)
            })
            .collect();
        terms.sort_by(|a, b| lambda_order(&a.lambda, &b.lambda));
        Self { terms }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn add_poly(acc: &mut Vec<Complex64>, other: &[Complex64]) {
    if acc.len() < other.len() {
        acc.resize(other.len(), Complex64::new(0.0, 0.0));
    }
    for (a, b) in acc.iter_mut().zip(other) {
        *a += b;
    }
}

fn trim_leading(gammas: &mut Vec<Complex64>) {
    let scale = gammas.iter().map(|g| g.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        gammas.clear();
        return;
    }
    while gammas.last().is_some_and(|g| g.norm() <= LEADING_DROP_TOL * scale) {
        gammas.pop();
    }
}

/// Lexicographic order on `(Re, Im)`.
pub fn lambda_order(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// ∞-norm parameter errors between two models.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDistance {
    pub freq_err: f64,
    pub coef_err: f64,
    pub matched: bool,
}

/// Compares two canonical models. Terms are paired greedily, closest
/// frequencies first. Coefficient lists of unequal length are compared with
/// missing entries read as zero and mark the result as unmatched.
pub fn model_distance(a: &ExponentialSumModel, b: &ExponentialSumModel) -> ModelDistance {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, ta) in a.terms.iter().enumerate() {
        for (j, tb) in b.terms.iter().enumerate() {
            pairs.push(((ta.lambda - tb.lambda).norm(), i, j));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut matched = a.len() == b.len();
    let mut freq_err: f64 = 0.0;
    let mut coef_err: f64 = 0.0;
    for (dist, i, j) in pairs {
        if used_a[i] || used_b[j] {
            continue;
        }
        used_a[i] = true;
        used_b[j] = true;
        freq_err = freq_err.max(dist);
        let (ga, gb) = (&a.terms[i].gammas, &b.terms[j].gammas);
        if ga.len() != gb.len() {
            matched = false;
        }
        let zero = Complex64::new(0.0, 0.0);
        for m in 0..ga.len().max(gb.len()) {
            let x = ga.get(m).copied().unwrap_or(zero);
            let y = gb.get(m).copied().unwrap_or(zero);
            coef_err = coef_err.max((x - y).norm());
        }
    }
    ModelDistance {
        freq_err,
        coef_err,
        matched,
    }
}
