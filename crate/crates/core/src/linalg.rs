//! Thin wrappers around the dense complex decompositions used by the fitters.

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) type CMat = Mat<Complex64>;

pub(crate) fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> CMat {
    Mat::from_fn(rows, cols, f)
}

/// Right singular vectors of the `count` smallest singular values, smallest
/// first. When `a` has fewer rows than columns the trailing vectors span the
/// null space.
pub(crate) fn smallest_right_singular_vectors(a: &CMat, count: usize) -> Result<Vec<Vec<Complex64>>> {
    let n = a.ncols();
    if count > n {
        return Err(Error::LinearAlgebra(format!("requested {count} singular vectors of a {n}-column matrix")));
    }
    if a.nrows() == 0 {
        // every vector is a null vector
        return Ok((0..count)
            .map(|i| (0..n).map(|r| Complex64::new(f64::from(u8::from(r == n - 1 - i)), 0.0)).collect())
            .collect());
    }
    let svd = a
        .svd()
        .map_err(|e| Error::LinearAlgebra(format!("SVD failed: {e:?}")))?;
    let v = svd.V();
    Ok((0..count)
        .map(|i| {
            let col = n - 1 - i;
            (0..n).map(|r| v[(r, col)]).collect()
        })
        .collect())
}

/// Least-squares solution of `a x ≈ b` with the 2-norm condition number of `a`.
pub(crate) fn lstsq(a: &CMat, b: &[Complex64], rank_tol: f64) -> Result<(Vec<Complex64>, f64)> {
    let (m, n) = (a.nrows(), a.ncols());
    if m < n {
        return Err(Error::RankDeficient(format!("{m} equations for {n} unknowns")));
    }
    if n == 0 {
        return Ok((Vec::new(), 1.0));
    }
    let svd = a
        .thin_svd()
        .map_err(|e| Error::LinearAlgebra(format!("SVD failed: {e:?}")))?;
    let s: Vec<f64> = (0..n).map(|i| svd.S()[i].re).collect();
    let (smax, smin) = (s[0], s[n - 1]);
    if !(smin > rank_tol * smax) {
        return Err(Error::RankDeficient(format!(
            "singular values span {smax:.3e} to {smin:.3e}"
        )));
    }
    let (u, v) = (svd.U(), svd.V());
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        let proj: Complex64 = (0..m).map(|i| u[(i, j)].conj() * b[i]).sum::<Complex64>() / s[j];
        for (r, xr) in x.iter_mut().enumerate() {
            *xr += v[(r, j)] * proj;
        }
    }
    Ok((x, smax / smin))
}

/// Singular values in nonincreasing order.
pub(crate) fn singular_values(a: &CMat) -> Result<Vec<f64>> {
    a.singular_values()
        .map_err(|e| Error::LinearAlgebra(format!("SVD failed: {e:?}")))
}

/// Generalized eigenvalues of the pencil `(a, b)` as `(alpha, beta)` pairs
/// with eigenvalue `alpha / beta`.
pub(crate) fn generalized_eigenvalues(a: &CMat, b: &CMat) -> Result<Vec<(Complex64, Complex64)>> {
    let ge = a
        .generalized_eigen(b)
        .map_err(|e| Error::LinearAlgebra(format!("QZ failed: {e:?}")))?;
    Ok((0..a.nrows()).map(|i| (ge.S_a()[i], ge.S_b()[i])).collect())
}
