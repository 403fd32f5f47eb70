//! Excitation-diagonal sector of the density matrix.
//!
//! All three flows map states that are block diagonal in the excitation
//! number to states of the same form, and every steady state lives there. A
//! sector state stores one 2×2 block per rung, slot 0 = `|G, n⟩` and
//! slot 1 = `|X, n−1⟩`; slots missing from the basis (rung 0 has no `X`, the
//! top rung `n_max + 1` has no `G`) are kept at zero. Since the blocks carry
//! no excitation difference, sector states are identical in the lab and
//! rotating frames and the `ω · N` part of the Hamiltonian drops out.

use nalgebra::{DMatrix, Matrix2};

use crate::error::{Error, Result};
use crate::nheh::Correction;
use crate::quantum::{BasisIndex, CMatrix, DensityMatrix, SystemParams, C64};

pub type SectorState = Vec<Matrix2<C64>>;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Rung-block form of `−i(Kρ − ρK†) + κ' aρa† + γ' σρσ† + P' a†ρa [+ sρ]`.
#[derive(Debug, Clone)]
pub struct SectorModel {
    n_max_photons: usize,
    /// `K` restricted to each rung.
    k: Vec<Matrix2<C64>>,
    /// `a` from rung `n + 1` into rung `n`.
    a: Vec<Matrix2<C64>>,
    /// `σ` from rung `n + 1` into rung `n`.
    s: Vec<Matrix2<C64>>,
    kappa: f64,
    gamma: f64,
    pump: f64,
    /// Normalised flow: no jumps, trace-neutral feedback instead.
    normalised: bool,
}

/// Flat index of a rung slot, if that state exists at this cutoff.
pub fn slot_index(rung: usize, slot: usize, n_max_photons: usize) -> Option<usize> {
    match slot {
        0 if rung <= n_max_photons => Some(BasisIndex::g(rung).flat()),
        1 if rung >= 1 && rung - 1 <= n_max_photons => Some(BasisIndex::x(rung - 1).flat()),
        _ => None,
    }
}

impl SectorModel {
    fn build(params: &SystemParams, loss: [f64; 3], jumps: [f64; 3], normalised: bool) -> Self {
        let nm = params.n_max_photons;
        let rungs = nm + 2;
        let exists = |n: usize, slot: usize| slot_index(n, slot, nm).is_some();
        let [kl, gl, pl] = loss;
        let mut k = vec![Matrix2::zeros(); rungs];
        let mut a = vec![Matrix2::zeros(); rungs];
        let mut s = vec![Matrix2::zeros(); rungs];
        for n in 0..rungs {
            let nf = n as f64;
            let detuning = params.omega_x - params.omega_c;
            if exists(n, 0) {
                // aa† vanishes on the top Fock level of the truncated space
                let aad = if n < nm { nf + 1.0 } else { 0.0 };
                k[n][(0, 0)] = C64::new(0.0, -0.5 * (kl * nf + pl * aad));
            }
            if exists(n, 1) {
                let aad = if n - 1 < nm { nf } else { 0.0 };
                k[n][(1, 1)] = C64::new(detuning, -0.5 * (kl * (nf - 1.0) + gl + pl * aad));
            }
            if exists(n, 0) && exists(n, 1) {
                k[n][(0, 1)] = C64::new(params.g * nf.sqrt(), 0.0);
                k[n][(1, 0)] = k[n][(0, 1)];
            }
            if n + 1 < rungs {
                if exists(n, 0) && exists(n + 1, 0) {
                    a[n][(0, 0)] = C64::new((nf + 1.0).sqrt(), 0.0);
                }
                if exists(n, 1) && exists(n + 1, 1) {
                    a[n][(1, 1)] = C64::new(nf.sqrt(), 0.0);
                }
                if exists(n, 0) && exists(n + 1, 1) {
                    s[n][(0, 1)] = C64::new(1.0, 0.0);
                }
            }
        }
        let [kj, gj, pj] = jumps;
        Self { n_max_photons: nm, k, a, s, kappa: kj, gamma: gj, pump: pj, normalised }
    }

    /// Lindblad flow.
    pub fn lindblad(params: &SystemParams) -> Self {
        let r = [params.kappa, params.gamma_x, params.pump_p];
        Self::build(params, r, r, false)
    }

    /// Effective Hamiltonian plus recycling terms with the given coefficient.
    pub fn nheh(params: &SystemParams, correction: Correction) -> Self {
        let f = match correction {
            Correction::FullRate => 1.0,
            Correction::HalfRate => 0.5,
        };
        let r = [params.kappa, params.gamma_x, params.pump_p];
        Self::build(params, r, r.map(|x| x * f), false)
    }

    /// Normalised non-Hermitian flow (trace-neutral feedback).
    pub fn nhqm(params: &SystemParams, include_pump: bool) -> Self {
        let p = if include_pump { params.pump_p } else { 0.0 };
        Self::build(params, [params.kappa, params.gamma_x, p], [0.0; 3], true)
    }

    pub fn n_max_photons(&self) -> usize {
        self.n_max_photons
    }

    pub fn rungs(&self) -> usize {
        self.k.len()
    }

    /// Effective Hamiltonian block of rung `n` (rotating frame).
    pub fn k_block(&self, n: usize) -> &Matrix2<C64> {
        &self.k[n]
    }

    pub fn apply_into(&self, rho: &SectorState, out: &mut SectorState) {
        let rungs = self.rungs();
        let mi = C64::new(0.0, -1.0);
        for n in 0..rungs {
            let k = &self.k[n];
            let r = &rho[n];
            let mut acc = (k * r - r * k.adjoint()) * mi;
            if n + 1 < rungs {
                let up = &rho[n + 1];
                if self.kappa != 0.0 {
                    acc += (self.a[n] * up * self.a[n].adjoint()) * C64::new(self.kappa, 0.0);
                }
                if self.gamma != 0.0 {
                    acc += (self.s[n] * up * self.s[n].adjoint()) * C64::new(self.gamma, 0.0);
                }
            }
            if n > 0 && self.pump != 0.0 {
                let down = &rho[n - 1];
                let ad = self.a[n - 1].adjoint();
                acc += (ad * down * self.a[n - 1]) * C64::new(self.pump, 0.0);
            }
            out[n] = acc;
        }
        if self.normalised {
            // 2i tr(ρH₋) / tr ρ with H₋ the anti-Hermitian part of K
            let mut rate = ZERO;
            let mut tr = ZERO;
            for n in 0..rungs {
                let hm = (self.k[n] - self.k[n].adjoint()) * C64::new(0.5, 0.0);
                rate += (rho[n] * hm).trace();
                tr += rho[n].trace();
            }
            let s = rate * C64::new(0.0, 2.0) / tr;
            for n in 0..rungs {
                out[n] += rho[n] * s;
            }
        }
    }

    pub fn apply(&self, rho: &SectorState) -> SectorState {
        let mut out = rho.clone();
        self.apply_into(rho, &mut out);
        out
    }

    pub fn vacuum(&self) -> SectorState {
        let mut v = vec![Matrix2::zeros(); self.rungs()];
        v[0][(0, 0)] = C64::new(1.0, 0.0);
        v
    }

    /// Keep the excitation-diagonal blocks of `rho`.
    pub fn from_density(&self, rho: &DensityMatrix) -> Result<SectorState> {
        if rho.n_max_photons() != self.n_max_photons {
            return Err(Error::DimensionMismatch { expected: 2 * (self.n_max_photons + 1), found: rho.dim() });
        }
        let m = rho.as_matrix();
        let nm = self.n_max_photons;
        Ok((0..self.rungs())
            .map(|n| {
                Matrix2::from_fn(|i, j| match (slot_index(n, i, nm), slot_index(n, j, nm)) {
                    (Some(a), Some(b)) => m[(a, b)],
                    _ => ZERO,
                })
            })
            .collect())
    }

    pub fn to_density(&self, s: &SectorState) -> DensityMatrix {
        let nm = self.n_max_photons;
        let d = 2 * (nm + 1);
        let mut m = CMatrix::zeros(d, d);
        for (n, b) in s.iter().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    if let (Some(a), Some(c)) = (slot_index(n, i, nm), slot_index(n, j, nm)) {
                        m[(a, c)] = b[(i, j)];
                    }
                }
            }
        }
        DensityMatrix::from_matrix(m).expect("even square dimension")
    }

    /// Number of real coordinates of a Hermitian sector state.
    pub fn real_dim(&self) -> usize {
        2 + 4 * self.n_max_photons
    }

    /// Real coordinates: `p_G0`, then `(p_G, p_X, Re c, Im c)` per full rung, then `p_X,top`.
    pub fn to_real(&self, s: &SectorState) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.real_dim());
        v.push(s[0][(0, 0)].re);
        for b in &s[1..=self.n_max_photons] {
            v.extend([b[(0, 0)].re, b[(1, 1)].re, b[(0, 1)].re, b[(0, 1)].im]);
        }
        v.push(s[self.n_max_photons + 1][(1, 1)].re);
        v
    }

    pub fn from_real(&self, v: &[f64]) -> SectorState {
        let nm = self.n_max_photons;
        let mut s = vec![Matrix2::zeros(); self.rungs()];
        s[0][(0, 0)] = C64::new(v[0], 0.0);
        for n in 1..=nm {
            let base = 1 + 4 * (n - 1);
            let c = C64::new(v[base + 2], v[base + 3]);
            s[n] = Matrix2::new(C64::new(v[base], 0.0), c, c.conj(), C64::new(v[base + 1], 0.0));
        }
        s[nm + 1][(1, 1)] = C64::new(v[1 + 4 * nm], 0.0);
        s
    }

    /// Population coordinates (entries `p_*` of [`SectorModel::to_real`]).
    pub fn population_mask(&self) -> Vec<bool> {
        let mut m = vec![true];
        for _ in 0..self.n_max_photons {
            m.extend([true, true, false, false]);
        }
        m.push(true);
        m
    }

    /// The flow as a real matrix on Hermitian sector states (linear flows only).
    pub fn real_matrix(&self) -> DMatrix<f64> {
        assert!(!self.normalised, "normalised flow is nonlinear");
        let m = self.real_dim();
        let mut out = DMatrix::zeros(m, m);
        let mut e = vec![0.0; m];
        let mut buf = self.vacuum();
        for k in 0..m {
            e[k] = 1.0;
            let s = self.from_real(&e);
            self.apply_into(&s, &mut buf);
            for (i, v) in self.to_real(&buf).into_iter().enumerate() {
                out[(i, k)] = v;
            }
            e[k] = 0.0;
        }
        out
    }
}

pub fn sector_trace(s: &SectorState) -> C64 {
    s.iter().map(|b| b.trace()).sum()
}

pub fn sector_max_diff(a: &SectorState, b: &SectorState) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| (x - y).iter().map(|z| z.norm()).collect::<Vec<_>>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::lindblad_rhs;
    use crate::linalg::max_abs_diff;
    use crate::nhqm::NhqmGenerator;
    use crate::quantum::{build_operators, Frame};

    fn mixed_sector_state(model: &SectorModel) -> SectorState {
        let v: Vec<f64> = (0..model.real_dim()).map(|k| 0.05 + 0.01 * (k % 7) as f64).collect();
        let mut s = model.from_real(&v);
        let tr = sector_trace(&s);
        for b in s.iter_mut() {
            *b /= tr;
        }
        s
    }

    #[test]
    fn matches_dense_lindblad_off_resonance() {
        let mut p = SystemParams::resonant_benchmark().with_pump(0.04).with_cutoff(4);
        p.omega_x = 1000.3;
        let ops = build_operators(&p).unwrap();
        let model = SectorModel::lindblad(&p);
        let s = mixed_sector_state(&model);
        let rho = model.to_density(&s);
        let dense = lindblad_rhs(&p, &ops, rho.as_matrix()).unwrap();
        let via_sector = model.to_density(&model.apply(&s));
        let diff = max_abs_diff(&dense, via_sector.as_matrix());
        assert!(diff < 1e-13, "{diff}");
    }

    #[test]
    fn matches_dense_nhqm() {
        let p = SystemParams::resonant_benchmark().with_pump(0.04).with_cutoff(3);
        let ops = build_operators(&p).unwrap();
        let model = SectorModel::nhqm(&p, true);
        let s = mixed_sector_state(&model);
        let rho = model.to_density(&s);
        let gen = NhqmGenerator::new(crate::nhqm::build_split_in(&p, &ops, true, Frame::Rotating));
        let via_sector = model.to_density(&model.apply(&s));
        let dd = gen.apply(rho.as_matrix()) - via_sector.as_matrix();
        let diff = crate::linalg::max_abs(&dd);
        assert!(diff < 1e-13, "{diff}");
    }

    #[test]
    fn real_coordinates_round_trip() {
        let model = SectorModel::lindblad(&SystemParams::resonant_benchmark().with_cutoff(3));
        let v: Vec<f64> = (0..model.real_dim()).map(|k| k as f64 * 0.5 - 1.0).collect();
        assert_eq!(model.to_real(&model.from_real(&v)), v);
        let s = model.from_real(&v);
        assert_eq!(model.from_density(&model.to_density(&s)).unwrap(), s);
    }

    #[test]
    fn real_matrix_is_the_flow() {
        let model = SectorModel::lindblad(&SystemParams::resonant_benchmark().with_pump(0.02).with_cutoff(3));
        let s = mixed_sector_state(&model);
        let lhs = &model.real_matrix() * nalgebra::DVector::from_vec(model.to_real(&s));
        let rhs = model.to_real(&model.apply(&s));
        let diff = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-15);
    }
}
