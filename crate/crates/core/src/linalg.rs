//! Dense factorizations. Storage stays in `ndarray`; Cholesky, LU and the
//! symmetric eigensolver come from `nalgebra`.

use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

pub(crate) fn to_na(m: &ArrayView2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]])
}

pub(crate) fn from_na(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

pub fn frobenius(m: &ArrayView2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn max_abs(m: &ArrayView2<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Solves `a * x = b` for symmetric positive definite `a`.
pub fn cholesky_solve(a: &ArrayView2<f64>, b: &ArrayView2<f64>) -> Result<Array2<f64>> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() {
        return Err(Error::dims(
            "cholesky_solve",
            format!("{0}x{0} system", b.nrows()),
            format!("{:?}", a.dim()),
        ));
    }
    let chol = to_na(a)
        .cholesky()
        .ok_or_else(|| Error::SolveFailed("matrix is not positive definite".into()))?;
    Ok(from_na(&chol.solve(&to_na(b))))
}

/// General square solve via LU with partial pivoting.
pub fn lu_solve(a: &ArrayView2<f64>, b: &ArrayView2<f64>) -> Result<Array2<f64>> {
    to_na(a)
        .lu()
        .solve(&to_na(b))
        .map(|x| from_na(&x))
        .ok_or_else(|| Error::SolveFailed("singular matrix".into()))
}

pub fn dense_inverse(a: &ArrayView2<f64>) -> Result<Array2<f64>> {
    to_na(a)
        .try_inverse()
        .map(|m| from_na(&m))
        .ok_or_else(|| Error::SolveFailed("singular matrix".into()))
}

/// Eigenvalues in ascending order with matching eigenvector columns.
pub fn symmetric_eigen(a: &ArrayView2<f64>) -> (Array1<f64>, Array2<f64>) {
    let eig = to_na(a).symmetric_eigen();
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = Array1::from_iter(order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = Array2::from_shape_fn((n, n), |(r, c)| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

#[derive(Debug, Clone, Copy)]
pub struct CgReport {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Conjugate gradient on every column of `b`, for a symmetric positive
/// definite operator given as a closure over column blocks.
pub fn conjugate_gradient<F>(apply: F, b: &ArrayView2<f64>, tol: f64, max_iter: usize) -> Result<(Array2<f64>, CgReport)>
where
    F: Fn(&ArrayView2<f64>) -> Array2<f64>,
{
    let mut x = Array2::<f64>::zeros(b.raw_dim());
    let mut report = CgReport {
        iterations: 0,
        relative_residual: 0.0,
    };
    for (col, bcol) in b.axis_iter(Axis(1)).enumerate() {
        let bnorm = bcol.dot(&bcol).sqrt();
        if bnorm == 0.0 {
            continue;
        }
        let as_block = |v: &Array1<f64>| v.view().insert_axis(Axis(1)).to_owned();
        let mut xc = Array1::<f64>::zeros(bcol.len());
        let mut r = bcol.to_owned();
        let mut p = r.clone();
        let mut rs = r.dot(&r);
        let mut it = 0;
        while rs.sqrt() > tol * bnorm {
            if it >= max_iter {
                return Err(Error::SolveFailed(format!(
                    "conjugate gradient stalled at relative residual {:.3e} after {it} iterations",
                    rs.sqrt() / bnorm
                )));
            }
            let ap = apply(&as_block(&p).view()).column(0).to_owned();
            let curv = p.dot(&ap);
            if curv <= 0.0 {
                return Err(Error::SolveFailed("operator is not positive definite".into()));
            }
            let alpha = rs / curv;
            xc.scaled_add(alpha, &p);
            r.scaled_add(-alpha, &ap);
            let rs_new = r.dot(&r);
            p = &r + &(&p * (rs_new / rs));
            rs = rs_new;
            it += 1;
        }
        report.iterations = report.iterations.max(it);
        report.relative_residual = report.relative_residual.max(rs.sqrt() / bnorm);
        x.column_mut(col).assign(&xc);
    }
    Ok((x, report))
}
