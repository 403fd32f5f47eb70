//! Small dense helpers on complex matrices.
//!
//! Hermitian spectral routines split the matrix into the connected components
//! of its sparsity pattern first. Block-diagonal states (every steady state of
//! the excitation-conserving models) then cost one small eigenproblem per rung
//! instead of one large one; the result is identical because the split is exact.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::quantum::{CMatrix, C64};

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Index sets of the connected components of the union of nonzero patterns.
pub fn block_components(mats: &[&CMatrix]) -> Vec<Vec<usize>> {
    let d = mats[0].nrows();
    let mut parent: Vec<usize> = (0..d).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for m in mats {
        for j in 0..d {
            for i in 0..j {
                if m[(i, j)] != C64::new(0.0, 0.0) || m[(j, i)] != C64::new(0.0, 0.0) {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri.max(rj)] = ri.min(rj);
                    }
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; d];
    for i in 0..d {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

fn submatrix(m: &CMatrix, idx: &[usize]) -> CMatrix {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

/// Eigenvalues of a Hermitian matrix (only the Hermitian part is read).
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.nrows());
    for idx in block_components(&[m]) {
        if idx.len() == 1 {
            out.push(m[(idx[0], idx[0])].re);
            continue;
        }
        let eig = SymmetricEigen::new(hermitian_part(&submatrix(m, &idx)));
        out.extend(eig.eigenvalues.iter().copied());
    }
    out
}

/// Apply `f` to the spectrum of a Hermitian matrix, blockwise.
fn spectral_map(m: &CMatrix, mut f: impl FnMut(f64) -> Result<f64>) -> Result<CMatrix> {
    let d = m.nrows();
    let mut out = CMatrix::zeros(d, d);
    for idx in block_components(&[m]) {
        if idx.len() == 1 {
            out[(idx[0], idx[0])] = C64::new(f(m[(idx[0], idx[0])].re)?, 0.0);
            continue;
        }
        let eig = SymmetricEigen::new(hermitian_part(&submatrix(m, &idx)));
        let vals: Vec<C64> = eig.eigenvalues.iter().map(|&l| f(l).map(|v| C64::new(v, 0.0))).collect::<Result<_>>()?;
        let v = &eig.eigenvectors;
        let k = idx.len();
        let mut scaled = v.clone();
        for (c, lam) in vals.iter().enumerate() {
            scaled.column_mut(c).scale_mut(lam.re);
        }
        let block = &scaled * v.adjoint();
        for i in 0..k {
            for j in 0..k {
                out[(idx[i], idx[j])] = block[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Clip an eigenvalue at zero if it lies within `tol` below it; reject otherwise.
pub fn clip_nonnegative(lambda: f64, tol: f64) -> Result<f64> {
    if lambda >= 0.0 {
        Ok(lambda)
    } else if lambda >= -tol {
        Ok(0.0)
    } else {
        Err(Error::NotPositive(lambda))
    }
}

/// Magnitude below which a computed eigenvalue of `m` is indistinguishable from zero.
pub fn eigen_noise_floor(m: &CMatrix) -> f64 {
    16.0 * f64::EPSILON * m.nrows() as f64 * max_abs(m)
}

/// Principal square root of a positive semidefinite Hermitian matrix.
///
/// Eigenvalues are clipped at zero when they are at most `tol` below it, and
/// set to zero when they lie under [`eigen_noise_floor`], so that the square
/// root does not magnify rounding noise in the null space.
pub fn sqrt_psd(m: &CMatrix, tol: f64) -> Result<CMatrix> {
    let floor = eigen_noise_floor(m);
    spectral_map(m, |l| if l.abs() <= floor { Ok(0.0) } else { clip_nonnegative(l, tol).map(f64::sqrt) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_follow_sparsity() {
        let mut m = CMatrix::zeros(5, 5);
        m[(0, 3)] = C64::new(1.0, 0.0);
        m[(2, 4)] = C64::new(0.0, 1.0);
        let c = block_components(&[&m]);
        assert_eq!(c, vec![vec![0, 3], vec![1], vec![2, 4]]);
    }

    #[test]
    fn sqrt_squares_back() {
        let a = CMatrix::from_fn(4, 4, |i, j| C64::new((i + 2 * j) as f64 * 0.1, (i as f64 - j as f64) * 0.05));
        let psd = &a * a.adjoint();
        let s = sqrt_psd(&psd, 1e-12).unwrap();
        assert!(max_abs_diff(&(&s * &s), &psd) < 1e-12);
    }

    #[test]
    fn negative_eigenvalue_rejected() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = C64::new(1.0, 0.0);
        m[(1, 1)] = C64::new(-1e-3, 0.0);
        assert!(sqrt_psd(&m, 1e-8).is_err());
        m[(1, 1)] = C64::new(-1e-10, 0.0);
        assert_eq!(sqrt_psd(&m, 1e-8).unwrap()[(1, 1)].re, 0.0);
    }
}
