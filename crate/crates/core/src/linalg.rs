//! Jacobi eigensolvers and Cholesky-based resolvent diagonals.
//!
//! Matrices are dense row-major slices. `sym_eigenvalues` is the classical
//! two-sided cyclic Jacobi method. `gram_eigen` is the one-sided variant:
//! it rotates the rows of `Y` until they are mutually orthogonal, which
//! diagonalizes `Y Y^T` without forming it and yields the eigenvectors of
//! `Y^T Y` as the normalized rows.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

pub const MAX_SWEEPS: usize = 100;
pub const OFF_TOL: f64 = 1e-11;

fn frob(m: &[f64]) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Largest `|m_ij - m_ji|`.
pub fn asymmetry(n: usize, m: &[f64]) -> f64 {
    let mut a = 0.0f64;
    for i in 0..n {
        for j in 0..i {
            a = a.max((m[i * n + j] - m[j * n + i]).abs());
        }
    }
    a
}

/// Eigenvalues of a symmetric matrix, descending.
pub fn sym_eigenvalues(n: usize, m: &[f64]) -> Result<Vec<f64>> {
    if m.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, got: m.len() });
    }
    let asym = asymmetry(n, m);
    if asym > 1e-12 {
        return Err(Error::NotSymmetric(asym));
    }
    let mut a = m.to_vec();
    let target = OFF_TOL * frob(m);
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };
    let mut converged = off(&a) <= target;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence(MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
        converged = off(&a) <= target;
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    Ok(ev)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Spectral data of `Y Y^T` (`rows x rows`) and `Y^T Y` (`cols x cols`).
#[derive(Debug, Clone)]
pub struct GramEigen {
    pub rows: usize,
    pub cols: usize,
    /// Eigenvalues of `Y Y^T`, one per row, descending.
    pub values: Vec<f64>,
    /// Unit eigenvectors of `Y^T Y` for the same eigenvalues, row-major
    /// `rows x cols`; rows with numerically zero eigenvalue are zero.
    pub vectors: Vec<f64>,
}

/// One-sided Jacobi on the rows of `y` (`rows x cols`, row-major).
/// Stops once the off-diagonal Frobenius mass of `W W^T` falls below
/// `OFF_TOL * ||Y Y^T||_F`.
pub fn gram_eigen(rows: usize, cols: usize, y: &[f64]) -> Result<GramEigen> {
    if y.len() != rows * cols {
        return Err(Error::DimensionMismatch { expected: rows * cols, got: y.len() });
    }
    let mut w = y.to_vec();
    let mut norms: Vec<f64> = (0..rows).map(|i| dot(&w[i * cols..(i + 1) * cols], &w[i * cols..(i + 1) * cols])).collect();
    let mut sweeps = 0;
    loop {
        let diag_sq: f64 = norms.iter().map(|v| v * v).sum();
        let mut off_sq = 0.0;
        for i in 0..rows {
            for j in i + 1..rows {
                let (head, tail) = w.split_at_mut(j * cols);
                let wi = &mut head[i * cols..(i + 1) * cols];
                let wj = &mut tail[..cols];
                let c = dot(wi, wj);
                if c == 0.0 {
                    continue;
                }
                off_sq += 2.0 * c * c;
                let (a, b) = (norms[i], norms[j]);
                if c.abs() <= 1e-15 * (a * b).sqrt() {
                    continue;
                }
                let zeta = (b - a) / (2.0 * c);
                let t = if zeta == 0.0 { 1.0 } else { zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt()) };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for k in 0..cols {
                    let x = wi[k];
                    let v = wj[k];
                    wi[k] = cs * x - sn * v;
                    wj[k] = sn * x + cs * v;
                }
                norms[i] = a - t * c;
                norms[j] = b + t * c;
            }
        }
        sweeps += 1;
        for i in 0..rows {
            let r = &w[i * cols..(i + 1) * cols];
            norms[i] = dot(r, r);
        }
        // ||W W^T||_F is invariant under the rotations
        if off_sq <= OFF_TOL * OFF_TOL * (diag_sq + off_sq) {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence(MAX_SWEEPS));
        }
    }
    let mut order: Vec<usize> = (0..rows).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let top = order.first().map_or(0.0, |&i| norms[i]);
    let mut values = Vec::with_capacity(rows);
    let mut vectors = vec![0.0; rows * cols];
    for (slot, &i) in order.iter().enumerate() {
        values.push(norms[i]);
        if norms[i] > 1e-12 * top && norms[i] > 0.0 {
            let inv = 1.0 / norms[i].sqrt();
            for k in 0..cols {
                vectors[slot * cols + k] = w[i * cols + k] * inv;
            }
        }
    }
    Ok(GramEigen { rows, cols, values, vectors })
}

/// Diagonal of `(Y^T Y + shift I)^(-1)` for `shift > 0` via Cholesky.
pub fn shifted_gram_inverse_diag(rows: usize, cols: usize, y: &[f64], shift: f64) -> Result<Vec<f64>> {
    if y.len() != rows * cols {
        return Err(Error::DimensionMismatch { expected: rows * cols, got: y.len() });
    }
    if !(shift > 0.0) {
        return Err(Error::InvalidArgument("shift must be positive".into()));
    }
    let ym = DMatrix::from_row_slice(rows, cols, y);
    let mut g = ym.transpose() * &ym;
    for j in 0..cols {
        g[(j, j)] += shift;
    }
    let chol = g.cholesky().ok_or_else(|| Error::Numerical("Cholesky factorization failed".into()))?;
    let mut linv = DMatrix::<f64>::identity(cols, cols);
    if !chol.l().solve_lower_triangular_mut(&mut linv) {
        return Err(Error::Numerical("singular Cholesky factor".into()));
    }
    // B = L^-T L^-1, so B_jj is the squared norm of column j of L^-1
    Ok((0..cols).map(|j| linv.column(j).norm_squared()).collect())
}
