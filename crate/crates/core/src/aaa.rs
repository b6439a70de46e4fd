//! Modified AAA: greedy barycentric interpolation whose weights satisfy
//! `‖w‖₂ = 1` and `Σ w_j f_j = 0`, so the fitted rational has numerator
//! degree strictly below its denominator degree.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Default stopping tolerance.
pub const DEFAULT_TOL: f64 = 1e-13;
/// Default relative threshold below which a weight counts as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;
/// Threshold on `|(v₂ᵀf)v₁ − (v₁ᵀf)v₂|` relative to `‖f_S‖` below which the
/// smallest singular vector is used on its own.
pub const DEGENERATE_COMBINATION_TOL: f64 = 1e-14;

/// `r(z) = Σ w_j f_j / (z − z_j) / Σ w_j / (z − z_j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarycentricRational {
    pub support: Vec<Complex64>,
    pub values: Vec<Complex64>,
    pub weights: Vec<Complex64>,
}

impl BarycentricRational {
    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Denominator degree `J`.
    pub fn degree(&self) -> usize {
        self.support.len().saturating_sub(1)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        bary_eval(self, z)
    }

    /// `q̃(z) = Σ w_j / (z − z_j)`.
    pub fn denominator(&self, z: Complex64) -> Complex64 {
        self.support
            .iter()
            .zip(&self.weights)
            .map(|(&zj, &wj)| wj / (z - zj))
            .sum()
    }

    pub fn weight_norm(&self) -> f64 {
        norm2(&self.weights)
    }

    /// `|Σ w_j f_j|`, the unconjugated side condition.
    pub fn side_condition(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.values)
            .map(|(w, f)| w * f)
            .sum::<Complex64>()
            .norm()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AaaDiagnostics {
    /// Number of completed steps; the fit has `iterations + 1` support points.
    pub iterations: usize,
    /// Max `|r − f|` over non-support points.
    pub final_residual: f64,
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// Data indices in order of acquisition into the support set.
    pub support_indices: Vec<usize>,
    /// Steps at which the two-vector combination degenerated.
    pub fallback_steps: Vec<usize>,
    /// Absolute threshold the residual was compared against.
    pub threshold: f64,
}

pub fn bary_eval(r: &BarycentricRational, z: Complex64) -> Complex64 {
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = Complex64::new(0.0, 0.0);
    for ((&zj, &fj), &wj) in r.support.iter().zip(&r.values).zip(&r.weights) {
        if z == zj {
            if wj != Complex64::new(0.0, 0.0) {
                return fj;
            }
            continue;
        }
        let c = wj / (z - zj);
        num += c * fj;
        den += c;
    }
    num / den
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn argmax(values: impl Iterator<Item = (usize, f64)>) -> Option<(usize, f64)> {
    values.fold(None, |best, (i, v)| match best {
        Some((_, b)) if b >= v => best,
        _ => Some((i, v)),
    })
}

/// Unit weights minimising `‖L w‖₂` subject to `wᵀf = 0`, taken from the two
/// smallest right singular vectors of `L`. The flag is set when the two
/// vectors cannot be combined and the smallest one is returned instead.
fn constrained_weights(loewner: &linalg::CMat, fs: &[Complex64]) -> Result<(Vec<Complex64>, bool)> {
    let v = linalg::smallest_right_singular_vectors(loewner, 2)?;
    let dot = |a: &[Complex64]| -> Complex64 { a.iter().zip(fs).map(|(x, y)| x * y).sum() };
    let (d1, d2) = (dot(&v[0]), dot(&v[1]));
    let mut w: Vec<Complex64> = v[0].iter().zip(&v[1]).map(|(a, b)| d2 * a - d1 * b).collect();
    let wn = norm2(&w);
    if wn < DEGENERATE_COMBINATION_TOL * norm2(fs) || wn == 0.0 {
        return Ok((v[0].clone(), true));
    }
    w.iter_mut().for_each(|x| *x /= wn);
    Ok((w, false))
}

/// Recomputes the weights of `r` for its current support from the data at
/// every other point not listed in `exclude`. Used after pruning, where the
/// removed weights are only zero up to rounding.
pub fn refit_weights(
    r: &BarycentricRational,
    points: &[Complex64],
    values: &[Complex64],
    exclude: &[Complex64],
) -> Result<BarycentricRational> {
    let rest: Vec<usize> = (0..points.len())
        .filter(|&i| !r.support.contains(&points[i]) && !exclude.contains(&points[i]))
        .collect();
    if r.len() < 2 || rest.is_empty() {
        return Ok(r.clone());
    }
    let loewner = linalg::from_fn(rest.len(), r.len(), |row, col| {
        let i = rest[row];
        (values[i] - r.values[col]) / (points[i] - r.support[col])
    });
    let (weights, _) = constrained_weights(&loewner, &r.values)?;
    Ok(BarycentricRational { weights, ..r.clone() })
}

/// Runs at most `jmax` steps. The stopping test is
/// `max |r − f| < tol · max(1, max |f|)`.
pub fn aaa_fit(
    points: &[Complex64],
    values: &[Complex64],
    tol: f64,
    jmax: usize,
) -> Result<(BarycentricRational, AaaDiagnostics)> {
    let l = points.len();
    if values.len() != l {
        return Err(Error::InvalidInput(format!("{l} points but {} values", values.len())));
    }
    if l < 3 {
        return Err(Error::InvalidInput(format!("AAA needs at least 3 points, got {l}")));
    }
    if !(tol > 0.0) || jmax == 0 {
        return Err(Error::InvalidInput("tol and jmax must be positive".into()));
    }
    if points.iter().chain(values).any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(Error::InvalidInput("non-finite point or value".into()));
    }
    for i in 0..l {
        if points[i + 1..].contains(&points[i]) {
            return Err(Error::InvalidInput(format!("duplicate point {}", points[i])));
        }
    }
    let jmax = jmax.min(l - 2);
    let fmax = values.iter().map(|f| f.norm()).fold(0.0, f64::max);
    let threshold = tol * fmax.max(1.0);

    // two largest |f|, earliest index first on ties
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&a, &b| values[b].norm().total_cmp(&values[a].norm()).then(a.cmp(&b)));
    let mut support_idx = vec![order[0], order[1]];
    let mut in_support = vec![false; l];
    in_support[order[0]] = true;
    in_support[order[1]] = true;

    let mut history = Vec::new();
    let mut fallback_steps = Vec::new();
    let mut step = 1;
    loop {
        let rest: Vec<usize> = (0..l).filter(|&i| !in_support[i]).collect();
        let fs: Vec<Complex64> = support_idx.iter().map(|&j| values[j]).collect();
        let loewner = linalg::from_fn(rest.len(), support_idx.len(), |r, c| {
            let (i, j) = (rest[r], support_idx[c]);
            (values[i] - values[j]) / (points[i] - points[j])
        });
        let (w, degenerate) = constrained_weights(&loewner, &fs)?;
        if degenerate {
            fallback_steps.push(step);
        }

        let r = BarycentricRational {
            support: support_idx.iter().map(|&j| points[j]).collect(),
            values: fs,
            weights: w,
        };
        let errors: Vec<(usize, f64)> = rest
            .iter()
            .map(|&i| {
                let e = (bary_eval(&r, points[i]) - values[i]).norm();
                (i, if e.is_nan() { f64::INFINITY } else { e })
            })
            .collect();
        let (next, residual) = argmax(errors.into_iter()).expect("at least one point stays outside the support");
        history.push(residual);

        let converged = residual < threshold;
        if converged || step >= jmax {
            if !converged {
                log::debug!("AAA stopped at jmax = {jmax} with residual {residual:.3e}");
            }
            let diag = AaaDiagnostics {
                iterations: step,
                final_residual: residual,
                residual_history: history,
                converged,
                support_indices: support_idx,
                fallback_steps,
                threshold,
            };
            return Ok((r, diag));
        }
        support_idx.push(next);
        in_support[next] = true;
        step += 1;
    }
}

/// Drops support triples with `|w_j| ≤ zero_tol · max|w|` and renormalises.
/// Returns the pruned rational and the removed support points.
pub fn prune_zero_weights(r: &BarycentricRational, zero_tol: f64) -> Result<(BarycentricRational, Vec<Complex64>)> {
    if !(zero_tol >= 0.0) {
        return Err(Error::InvalidInput("zero_tol must be non-negative".into()));
    }
    let wmax = r.weights.iter().map(|w| w.norm()).fold(0.0, f64::max);
    let mut kept = BarycentricRational {
        support: Vec::new(),
        values: Vec::new(),
        weights: Vec::new(),
    };
    let mut removed = Vec::new();
    for ((&z, &f), &w) in r.support.iter().zip(&r.values).zip(&r.weights) {
        if w.norm() <= zero_tol * wmax {
            removed.push(z);
        } else {
            kept.support.push(z);
            kept.values.push(f);
            kept.weights.push(w);
        }
    }
    if kept.is_empty() {
        return Err(Error::AllWeightsPruned);
    }
    let n = norm2(&kept.weights);
    kept.weights.iter_mut().for_each(|w| *w /= n);
    Ok((kept, removed))
}
