//! Pole/coefficient form of a barycentric rational: poles from the arrowhead
//! pencil, clustering into multiple poles, and least-squares coefficient
//! solves for simple and confluent partial fractions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::aaa::BarycentricRational;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::lambda_order;

/// Default single-linkage distance for merging poles.
pub const DEFAULT_MERGE_TOL: f64 = 1e-2;
/// A cluster center counts as an integer when both `|Re − round(Re)|` and
/// `|Im|` are at most this.
pub const INTEGER_TOL: f64 = 1e-6;
/// Condition number above which a coefficient solve is reported as unreliable.
pub const CONDITION_WARN: f64 = 1e12;
/// Eigenvalues larger than this multiple of `max |z_j|` count as infinite.
const INFINITE_POLE_RATIO: f64 = 1e10;

/// One pole `C` of a partial fraction with coefficients of
/// `1/(z − C)^{ℓ+1}`, `ℓ = 0, 1, …`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionCluster {
    pub pole: Complex64,
    pub coeffs: Vec<Complex64>,
    /// The pole is an integer and the coefficients are `A*` values.
    pub periodic: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfluentPartialFraction {
    pub clusters: Vec<FractionCluster>,
}

impl ConfluentPartialFraction {
    /// `Σ_j Σ_ℓ A_{j,ℓ} / (z − C_j)^{ℓ+1}`.
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        self.clusters.iter().map(|c| cluster_value(c, z)).sum()
    }

    /// Same sum restricted to clusters matching `periodic`.
    pub fn evaluate_part(&self, z: Complex64, periodic: bool) -> Complex64 {
        self.clusters
            .iter()
            .filter(|c| c.periodic == periodic)
            .map(|c| cluster_value(c, z))
            .sum()
    }
}

fn cluster_value(c: &FractionCluster, z: Complex64) -> Complex64 {
    let inv = 1.0 / (z - c.pole);
    let mut acc = Complex64::new(0.0, 0.0);
    for a in c.coeffs.iter().rev() {
        acc = (acc + a) * inv;
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleCluster {
    pub center: Complex64,
    pub count: usize,
    pub members: Vec<Complex64>,
}

impl PoleCluster {
    /// The integer this cluster sits on, if any.
    pub fn integer(&self) -> Option<i64> {
        integer_center(self.center)
    }

    /// Largest distance of a member from the center.
    pub fn spread(&self) -> f64 {
        self.members.iter().map(|m| (m - self.center).norm()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleClusterSet {
    pub raw_poles: Vec<Complex64>,
    pub clusters: Vec<PoleCluster>,
    pub merge_tol: f64,
}

/// `Some(n)` when `z` is within [`INTEGER_TOL`] of the integer `n`.
pub fn integer_center(z: Complex64) -> Option<i64> {
    let n = z.re.round();
    ((z.re - n).abs() <= INTEGER_TOL && z.im.abs() <= INTEGER_TOL).then_some(n as i64)
}

/// The `J` finite zeros of `q̃(z) = Σ w_j/(z − z_j)` from the
/// `(J+2)×(J+2)` arrowhead pencil.
pub fn poles(r: &BarycentricRational) -> Result<Vec<Complex64>> {
    let m = r.len();
    if m < 2 {
        return Err(Error::InvalidInput(format!("poles need at least 2 support points, got {m}")));
    }
    let j = m - 1;
    let n = m + 1;
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let e = linalg::from_fn(n, n, |a, b| match (a, b) {
        (0, 0) => zero,
        (0, b) => r.weights[b - 1],
        (_, 0) => one,
        (a, b) if a == b => r.support[a - 1],
        _ => zero,
    });
    let bm = linalg::from_fn(n, n, |a, b| if a == b && a > 0 { one } else { zero });
    let zmax = r.support.iter().map(|z| z.norm()).fold(f64::MIN_POSITIVE, f64::max);
    let mut finite: Vec<Complex64> = linalg::generalized_eigenvalues(&e, &bm)?
        .into_iter()
        .filter(|(_, beta)| *beta != zero)
        .map(|(alpha, beta)| alpha / beta)
        .filter(|p| p.re.is_finite() && p.im.is_finite() && p.norm() <= INFINITE_POLE_RATIO * zmax)
        .collect();
    if finite.len() < j {
        return Err(Error::MissingPoles { found: finite.len(), expected: j });
    }
    finite.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    finite.truncate(j);
    finite.sort_by(lambda_order);
    Ok(finite)
}

/// Single-linkage clustering with `|p − q| < merge_tol`; centers are member
/// means, clusters are sorted by center.
pub fn cluster_poles(raw: &[Complex64], merge_tol: f64) -> Result<PoleClusterSet> {
    if !(merge_tol > 0.0) {
        return Err(Error::InvalidInput(format!("merge_tol must be positive, got {merge_tol}")));
    }
    let n = raw.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for a in 0..n {
        for b in a + 1..n {
            if (raw[a] - raw[b]).norm() < merge_tol {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for (i, &z) in raw.iter().enumerate() {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(z);
    }
    let mut clusters: Vec<PoleCluster> = groups
        .into_iter()
        .map(|members| PoleCluster {
            center: members.iter().sum::<Complex64>() / members.len() as f64,
            count: members.len(),
            members,
        })
        .collect();
    clusters.sort_by(|a, b| lambda_order(&a.center, &b.center));
    Ok(PoleClusterSet { raw_poles: raw.to_vec(), clusters, merge_tol })
}

fn rank_tol(rows: usize, cols: usize) -> f64 {
    4.0 * f64::EPSILON * rows.max(cols) as f64
}

/// Least-squares residues `g` of `Σ g_j/(z − ρ_j)` interpolating the support
/// values of `r`.
pub fn solve_residues_simple(r: &BarycentricRational, poles: &[Complex64]) -> Result<Vec<Complex64>> {
    let (x, cond) = residues_at(&r.support, &r.values, poles)?;
    if cond > CONDITION_WARN {
        log::warn!("simple residue system has condition number {cond:.3e}");
    }
    Ok(x)
}

/// Least-squares residues of `Σ g_j/(z − ρ_j)` matching `values` at `points`,
/// with the condition number of the Cauchy matrix.
pub fn residues_at(
    points: &[Complex64],
    values: &[Complex64],
    poles: &[Complex64],
) -> Result<(Vec<Complex64>, f64)> {
    let cauchy = linalg::from_fn(points.len(), poles.len(), |i, j| 1.0 / (points[i] - poles[j]));
    linalg::lstsq(&cauchy, values, rank_tol(points.len(), poles.len()))
}

/// Least-squares coefficients of the confluent partial fraction over the
/// support points not listed in `exclude`. Integer clusters are snapped to
/// their integer and marked periodic. Returns the fraction and the condition
/// number of the system.
pub fn solve_residues_confluent(
    support: &[Complex64],
    support_values: &[Complex64],
    clusters: &PoleClusterSet,
    exclude: &[Complex64],
) -> Result<(ConfluentPartialFraction, f64)> {
    if support.len() != support_values.len() {
        return Err(Error::InvalidInput("support and values differ in length".into()));
    }
    let (points, values): (Vec<Complex64>, Vec<Complex64>) = support
        .iter()
        .zip(support_values)
        .filter(|(z, _)| !exclude.contains(z))
        .map(|(z, f)| (*z, *f))
        .unzip();

    let poles: Vec<(Complex64, bool, usize)> = clusters
        .clusters
        .iter()
        .map(|c| match c.integer() {
            Some(n) => (Complex64::new(n as f64, 0.0), true, c.count),
            None => (c.center, false, c.count),
        })
        .collect();
    let columns: Vec<(Complex64, i32)> = poles
        .iter()
        .flat_map(|&(p, _, count)| (1..=count as i32).map(move |e| (p, e)))
        .collect();
    if columns.len() > points.len() {
        return Err(Error::RankDeficient(format!(
            "{} unknowns but only {} interpolation conditions",
            columns.len(),
            points.len()
        )));
    }
    let matrix = linalg::from_fn(points.len(), columns.len(), |i, j| {
        let (p, e) = columns[j];
        (points[i] - p).powi(-e)
    });
    let (x, cond) = linalg::lstsq(&matrix, &values, rank_tol(points.len(), columns.len()))?;

    let mut offset = 0;
    let fraction = ConfluentPartialFraction {
        clusters: poles
            .into_iter()
            .map(|(pole, periodic, count)| {
                let coeffs = x[offset..offset + count].to_vec();
                offset += count;
                FractionCluster { pole, coeffs, periodic }
            })
            .collect(),
    };
    Ok((fraction, cond))
}
