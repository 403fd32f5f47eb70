//! Plumbing shared by the three time-evolution front ends.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{IntegrationSpec, SolverTag, Trajectory};
use crate::quantum::{rotate_to_lab, CMatrix, DensityMatrix, Frame, OperatorSet, SystemParams};

/// Options common to every `evolve_*` entry point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    /// Frame used internally. Results are always reported in the lab frame.
    pub frame: Frame,
    /// Largest tolerated population on the highest rung(s), checked at every sample.
    pub cutoff_tol: f64,
    /// Skip the truncation check entirely.
    pub check_cutoff: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { frame: Frame::Rotating, cutoff_tol: 1e-8, check_cutoff: true }
    }
}

/// Lowest excitation counted as "top of the ladder" for truncation checks.
///
/// Without pump the `|X, n_max⟩` rung is the only level that feels the cutoff.
/// With pump the `|G, n_max⟩` level stops receiving population as well, so the
/// whole rung `n_max` is monitored.
pub fn top_rung(params: &SystemParams) -> usize {
    if params.pump_p > 0.0 {
        params.n_max_photons
    } else {
        params.n_max_photons + 1
    }
}

pub(crate) fn check_cutoff(params: &SystemParams, opts: &EvolveOptions, times: &[f64], states: &[DensityMatrix]) -> Result<()> {
    if !opts.check_cutoff {
        return Ok(());
    }
    let top = top_rung(params);
    for (t, s) in times.iter().zip(states) {
        let population = s.population_from_rung(top);
        if population >= opts.cutoff_tol {
            return Err(Error::CutoffViolation { t: *t, population });
        }
    }
    Ok(())
}

pub(crate) fn check_dim(params: &SystemParams, rho0: &DensityMatrix) -> Result<()> {
    if rho0.dim() != params.dim() {
        return Err(Error::DimensionMismatch { expected: params.dim(), found: rho0.dim() });
    }
    Ok(())
}

/// Hamiltonian in the integration frame.
pub(crate) fn frame_hamiltonian(params: &SystemParams, ops: &OperatorSet, frame: Frame) -> CMatrix {
    ops.h_jc_shifted(frame.reference_frequency(params.omega_c))
}

/// Turn frame samples into a lab-frame trajectory and run the truncation check.
pub(crate) fn finish(
    params: &SystemParams,
    opts: &EvolveOptions,
    spec: &IntegrationSpec,
    states: Vec<CMatrix>,
    solver: SolverTag,
) -> Result<Trajectory> {
    let omega = opts.frame.reference_frequency(params.omega_c);
    let states = spec
        .sample_times
        .iter()
        .zip(states)
        .map(|(&t, m)| DensityMatrix::from_matrix(rotate_to_lab(&m, omega, t)))
        .collect::<Result<Vec<_>>>()?;
    check_cutoff(params, opts, &spec.sample_times, &states)?;
    Ok(Trajectory { times: spec.sample_times.clone(), states, solver })
}
