//! Dense symmetric eigensolver (cyclic Jacobi), singular values, rank and
//! zero-eigenspace extraction for signed Laplacians.

use crate::error::{Error, Result};
use crate::matrix::{norm2, RealMatrix};
use crate::signed_graph::{is_connected, BalanceResult, SignedGraph};

/// Relative tolerance for rank and zero-eigenvalue decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Jacobi sweeps stop once `off(A) <= JACOBI_THRESHOLD · ‖A‖_F`.
pub const JACOBI_THRESHOLD: f64 = 1e-12;

const MAX_SWEEPS: usize = 100;

#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Nondecreasing.
    pub eigenvalues: Vec<f64>,
    /// Column `k` pairs with `eigenvalues[k]`.
    pub eigenvectors: RealMatrix,
    pub tol_used: f64,
}

impl EigenDecomposition {
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k)
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }
}

/// Absolute zero threshold for a matrix: `tol · max(1, ‖A‖_∞)`.
pub fn zero_threshold(a: &RealMatrix, tol: f64) -> f64 {
    tol * a.inf_norm().max(1.0)
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Rejects input whose largest asymmetric entry exceeds `tol`.
pub fn symmetric_eigen(a: &RealMatrix, tol: f64) -> Result<EigenDecomposition> {
    let asym = a.max_asymmetry();
    if asym > tol {
        return Err(Error::NotSymmetric { max_asymmetry: asym });
    }
    let n = a.rows();
    // symmetrise away sub-tolerance noise
    let mut w = RealMatrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut v = RealMatrix::identity(n);
    let target = JACOBI_THRESHOLD * w.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&w) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut w, &mut v, p, q);
            }
        }
    }
    if off_diagonal_norm(&w) > target {
        return Err(Error::Numerical(format!(
            "Jacobi iteration did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[(i, i)].total_cmp(&w[(j, j)]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| w[(i, i)]).collect();
    let mut eigenvectors = RealMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        // sign convention: first component of non-negligible magnitude is positive
        let first = (0..n).find(|&r| v[(r, src)].abs() > 1e-8).unwrap_or(0);
        let s = if v[(first, src)] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            eigenvectors[(r, col)] = s * v[(r, src)];
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
        tol_used: tol.max(JACOBI_THRESHOLD),
    })
}

fn off_diagonal_norm(a: &RealMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// One Jacobi rotation annihilating `a[p][q]`, accumulated into `v`.
fn rotate(a: &mut RealMatrix, v: &mut RealMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let n = a.rows();
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Singular values (descending) by one-sided Jacobi orthogonalisation.
///
/// Works on the orientation with fewer columns so that zero singular values
/// come out as column norms near machine precision rather than square roots of
/// rounding noise.
pub fn singular_values(a: &RealMatrix) -> Vec<f64> {
    let mut u = if a.cols() <= a.rows() {
        a.clone()
    } else {
        a.transpose()
    };
    let (m, n) = (u.rows(), u.cols());
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    alpha += u[(i, p)] * u[(i, p)];
                    beta += u[(i, q)] * u[(i, q)];
                    gamma += u[(i, p)] * u[(i, q)];
                }
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let up = u[(i, p)];
                    let uq = u[(i, q)];
                    u[(i, p)] = c * up - s * uq;
                    u[(i, q)] = s * up + c * uq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..n).map(|j| norm2(&u.column(j))).collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Number of singular values above `tol · max(1, σ_max)`.
pub fn rank_of(a: &RealMatrix, tol: f64) -> usize {
    let sv = singular_values(a);
    let cutoff = tol * sv.first().copied().unwrap_or(0.0).max(1.0);
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// Zero eigenvalues of a positive semidefinite edge Laplacian.
#[derive(Clone, Debug)]
pub struct ZeroEigenspace {
    pub xi: usize,
    /// Orthonormal basis vectors of the null space.
    pub basis: Vec<Vec<f64>>,
}

impl ZeroEigenspace {
    pub fn empty() -> Self {
        ZeroEigenspace {
            xi: 0,
            basis: Vec::new(),
        }
    }

    /// Drops the last basis vector (used to probe insufficient deflation).
    pub fn truncated(&self) -> Self {
        let mut basis = self.basis.clone();
        basis.pop();
        ZeroEigenspace {
            xi: basis.len(),
            basis,
        }
    }

    /// Orthogonal projection of `x` onto the zero eigenspace.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for v in &self.basis {
            let c = crate::matrix::dot(v, x);
            for (o, vi) in out.iter_mut().zip(v) {
                *o += c * vi;
            }
        }
        out
    }
}

pub fn zero_eigenspace(l_es: &RealMatrix, tol: f64) -> Result<ZeroEigenspace> {
    let eig = symmetric_eigen(l_es, zero_threshold(l_es, tol))?;
    zero_eigenspace_from(&eig, zero_threshold(l_es, tol))
}

pub(crate) fn zero_eigenspace_from(eig: &EigenDecomposition, threshold: f64) -> Result<ZeroEigenspace> {
    if eig.min() < -threshold {
        return Err(Error::NegativeEigenvalue { value: eig.min() });
    }
    let basis: Vec<Vec<f64>> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l <= threshold)
        .map(|(k, _)| eig.eigenvector(k))
        .collect();
    Ok(ZeroEigenspace {
        xi: basis.len(),
        basis,
    })
}

/// Zero-eigenvalue count of the edge Laplacian predicted from balance:
/// `M − N + 1` when balanced, `M − N` otherwise.
pub fn expected_zero_count(g: &SignedGraph, balance: &BalanceResult) -> Result<usize> {
    if !is_connected(g) {
        return Err(Error::NotConnected);
    }
    let (m, n) = (g.n_edges(), g.n_nodes());
    Ok(if balance.is_balanced() { m + 1 - n } else { m - n })
}
