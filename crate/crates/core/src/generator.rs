//! Sparse evaluation of `−i(Kρ − ρK†) + Σ r LρL†`.
//!
//! Every flow in this crate has that shape with a non-Hermitian `K`
//! (Hamiltonian minus anti-Hermitian decay or gain terms) and jump operators
//! that move population between rungs. Ladder operators have at most one
//! nonzero per column so the products cost `O(nnz · d)` instead of `O(d³)`.

use crate::quantum::{CMatrix, C64};

/// Column-compressed complex matrix.
#[derive(Debug, Clone)]
pub struct SparseOp {
    dim: usize,
    cols: Vec<Vec<(usize, C64)>>,
}

impl SparseOp {
    pub fn from_dense(m: &CMatrix) -> Self {
        let dim = m.nrows();
        let cols = (0..m.ncols())
            .map(|j| (0..dim).filter_map(|i| (m[(i, j)] != C64::new(0.0, 0.0)).then(|| (i, m[(i, j)]))).collect())
            .collect();
        Self { dim, cols }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    /// `out += c · A ρ`
    pub fn add_left(&self, c: C64, rho: &[C64], out: &mut [C64]) {
        let d = self.dim;
        for (k, col) in self.cols.iter().enumerate() {
            for &(i, a) in col {
                let ca = c * a;
                for j in 0..d {
                    out[i + j * d] += ca * rho[k + j * d];
                }
            }
        }
    }

    /// `out += c · ρ A†`
    pub fn add_right_adjoint(&self, c: C64, rho: &[C64], out: &mut [C64]) {
        let d = self.dim;
        for (k, col) in self.cols.iter().enumerate() {
            for &(j, a) in col {
                let ca = c * a.conj();
                let src = &rho[k * d..(k + 1) * d];
                let dst = &mut out[j * d..(j + 1) * d];
                for (o, r) in dst.iter_mut().zip(src) {
                    *o += ca * r;
                }
            }
        }
    }

    /// `out += c · A ρ A†`
    pub fn add_sandwich(&self, c: f64, rho: &[C64], out: &mut [C64]) {
        let d = self.dim;
        for (l, col_l) in self.cols.iter().enumerate() {
            for &(j, b) in col_l {
                let cb = b.conj() * c;
                for (k, col_k) in self.cols.iter().enumerate() {
                    let r = rho[k + l * d];
                    if r == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for &(i, a) in col_k {
                        out[i + j * d] += a * r * cb;
                    }
                }
            }
        }
    }
}

/// Generator `ρ ↦ −i(Kρ − ρK†) + Σ r LρL†`.
#[derive(Debug, Clone)]
pub struct MasterGenerator {
    k: SparseOp,
    jumps: Vec<(f64, SparseOp)>,
}

impl MasterGenerator {
    pub fn new(k: &CMatrix, jumps: &[(f64, &CMatrix)]) -> Self {
        let jumps = jumps
            .iter()
            .filter(|(r, _)| *r != 0.0)
            .map(|&(r, l)| (r, SparseOp::from_dense(l)))
            .collect();
        Self { k: SparseOp::from_dense(k), jumps }
    }

    pub fn dim(&self) -> usize {
        self.k.dim()
    }

    pub fn apply_into(&self, rho: &CMatrix, out: &mut CMatrix) {
        out.fill(C64::new(0.0, 0.0));
        let r = rho.as_slice();
        let o = out.as_mut_slice();
        self.k.add_left(-C64::i(), r, o);
        self.k.add_right_adjoint(C64::i(), r, o);
        for (rate, l) in &self.jumps {
            l.add_sandwich(*rate, r, o);
        }
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
        self.apply_into(rho, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    fn sample(d: usize, seed: u64) -> CMatrix {
        let mut s = seed;
        CMatrix::from_fn(d, d, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            if a.abs() < 0.2 {
                C64::new(0.0, 0.0)
            } else {
                C64::new(a, b)
            }
        })
    }

    #[test]
    fn sparse_products_match_dense() {
        let d = 6;
        let a = sample(d, 1);
        let rho = sample(d, 2);
        let op = SparseOp::from_dense(&a);
        let c = C64::new(0.3, -1.1);

        let mut out = CMatrix::zeros(d, d);
        op.add_left(c, rho.as_slice(), out.as_mut_slice());
        assert!(max_abs_diff(&out, &((&a * &rho) * c)) < 1e-14);

        let mut out = CMatrix::zeros(d, d);
        op.add_right_adjoint(c, rho.as_slice(), out.as_mut_slice());
        assert!(max_abs_diff(&out, &((&rho * a.adjoint()) * c)) < 1e-14);

        let mut out = CMatrix::zeros(d, d);
        op.add_sandwich(0.7, rho.as_slice(), out.as_mut_slice());
        assert!(max_abs_diff(&out, &(&a * &rho * a.adjoint()).scale(0.7)) < 1e-14);
    }
}
