use nalgebra::DMatrix;

use super::basis::{excitation_of, BasisIndex};
use super::params::SystemParams;
use super::{CMatrix, C64};
use crate::error::Result;

/// Ladder, lowering, Hamiltonian and excitation-number matrices on the
/// truncated bare-state basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSet {
    pub n_max_photons: usize,
    pub a: CMatrix,
    pub a_dag: CMatrix,
    pub sigma: CMatrix,
    pub sigma_dag: CMatrix,
    pub h_jc: CMatrix,
    pub n_op: CMatrix,
}

/// `h_jc = ω_x σ†σ + ω_c a†a + g(σ a† + a σ†)`.
pub fn build_operators(params: &SystemParams) -> Result<OperatorSet> {
    params.validate()?;
    let n = params.n_max_photons;
    let d = params.dim();

    let mut a = DMatrix::zeros(d, d);
    let mut sigma = DMatrix::zeros(d, d);
    for photons in 0..=n {
        sigma[(BasisIndex::g(photons).flat(), BasisIndex::x(photons).flat())] = C64::new(1.0, 0.0);
        if photons > 0 {
            let amp = C64::new((photons as f64).sqrt(), 0.0);
            a[(BasisIndex::g(photons - 1).flat(), BasisIndex::g(photons).flat())] = amp;
            a[(BasisIndex::x(photons - 1).flat(), BasisIndex::x(photons).flat())] = amp;
        }
    }
    let a_dag = a.adjoint();
    let sigma_dag = sigma.adjoint();

    // exact diagonals: a†a as a product carries √n·√n rounding, which ω ~ 10³ would amplify
    let num_photons = number_diagonal(d, |b| b.photons as f64);
    let num_tls = number_diagonal(d, |b| if b.tls == super::basis::Tls::X { 1.0 } else { 0.0 });
    let exchange = &sigma * &a_dag + &a * &sigma_dag;
    let h_jc = num_tls.scale(params.omega_x) + num_photons.scale(params.omega_c) + exchange.scale(params.g);
    // diagonal by construction, so it commutes with h_jc entry for entry
    let n_op = CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            C64::new(excitation_of(i) as f64, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });

    Ok(OperatorSet { n_max_photons: n, a, a_dag, sigma, sigma_dag, h_jc, n_op })
}

fn number_diagonal(d: usize, f: impl Fn(BasisIndex) -> f64) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| if i == j { C64::new(f(BasisIndex::from_flat(i)), 0.0) } else { C64::new(0.0, 0.0) })
}

impl OperatorSet {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// `a†a`
    pub fn num_photons(&self) -> CMatrix {
        number_diagonal(self.dim(), |b| b.photons as f64)
    }

    /// `σ†σ`
    pub fn num_tls(&self) -> CMatrix {
        number_diagonal(self.dim(), |b| if b.tls == super::basis::Tls::X { 1.0 } else { 0.0 })
    }

    /// Projector onto the top Fock level `n_max_photons` (both TLS states).
    pub fn top_fock_projector(&self) -> CMatrix {
        let d = self.dim();
        let top = self.n_max_photons;
        CMatrix::from_fn(d, d, |i, j| {
            if i == j && BasisIndex::from_flat(i).photons == top {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Hamiltonian seen in a frame rotating at `omega_ref · N`.
    pub fn h_jc_shifted(&self, omega_ref: f64) -> CMatrix {
        &self.h_jc - self.n_op.scale(omega_ref)
    }
}
