use serde::{Deserialize, Serialize};

use super::basis::excitation_of;
use super::{CMatrix, C64};

/// Integration frame. Every generator in this crate commutes with the
/// excitation number `N`, so removing `omega_c · N` from the Hamiltonian is
/// exact: lab-frame entries follow as `ρ_ij e^{−i ω_c (N_i − N_j) t}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Lab,
    #[default]
    Rotating,
}

impl Frame {
    pub fn reference_frequency(self, omega_c: f64) -> f64 {
        match self {
            Frame::Lab => 0.0,
            Frame::Rotating => omega_c,
        }
    }
}

/// Map a rotating-frame matrix at time `t` back to the lab frame.
pub fn rotate_to_lab(rho: &CMatrix, omega_ref: f64, t: f64) -> CMatrix {
    if omega_ref == 0.0 || t == 0.0 {
        return rho.clone();
    }
    let d = rho.nrows();
    let max_exc = excitation_of(d - 1).max(excitation_of(d.saturating_sub(2)));
    // phases indexed by excitation difference, computed once
    let phases: Vec<C64> = (0..=max_exc).map(|k| C64::from_polar(1.0, -omega_ref * k as f64 * t)).collect();
    CMatrix::from_fn(d, d, |i, j| {
        let (ni, nj) = (excitation_of(i), excitation_of(j));
        let v = rho[(i, j)];
        if ni >= nj {
            v * phases[ni - nj]
        } else {
            v * phases[nj - ni].conj()
        }
    })
}
