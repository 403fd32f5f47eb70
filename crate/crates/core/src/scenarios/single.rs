//! Single trajectories and single steady states.

use super::config::fig1_timeseries_elements;
use super::fig1::Timeseries;
use super::{evolve_solver, ScenarioConfig, Status, TrackedElement};
use crate::error::{Error, Result};
use crate::integrator::{SolverTag, Trajectory};
use crate::metrics::fidelity;
use crate::quantum::{BasisIndex, DensityMatrix};
use crate::steady_state::{
    lindblad_steady_state_converged, nheh_steady_state, nhqm_fixed_points, nhqm_relaxed_states, FixedPointReport,
};

#[derive(Debug, Clone)]
pub struct EvolveResult {
    pub trajectories: Vec<Trajectory>,
    pub table: Timeseries,
}

fn tracked_or_default(cfg: &ScenarioConfig) -> Vec<TrackedElement> {
    if !cfg.tracked.is_empty() {
        return cfg.tracked.clone();
    }
    fig1_timeseries_elements()
        .into_iter()
        .filter(|t| t.row.check_in(cfg.params.n_max_photons).is_ok() && t.col.check_in(cfg.params.n_max_photons).is_ok())
        .collect()
}

/// Evolve `options.initial` (default `|G1⟩⟨G1|`) with every listed solver.
pub fn run_evolve(cfg: &ScenarioConfig) -> Result<EvolveResult> {
    cfg.validate()?;
    let initial = cfg.options.initial.unwrap_or(super::InitialState::Basis(BasisIndex::g(1)));
    let rho0 = initial.build(cfg.params.n_max_photons)?;
    let tracked = tracked_or_default(cfg);
    let mut trajectories = Vec::new();
    let mut columns = Vec::new();
    for &s in &cfg.solvers {
        let t = evolve_solver(cfg, &cfg.params, s, &rho0)?;
        for el in &tracked {
            columns.push((format!("{s}_{}", el.label()), t.series(el.row, el.col, el.part)));
        }
        trajectories.push(t);
    }
    let times = trajectories[0].times.clone();
    let alpha = match initial {
        super::InitialState::AlphaMixture(a) | super::InitialState::AlphaSuperposition(a) => a,
        super::InitialState::Basis(_) => f64::NAN,
    };
    Ok(EvolveResult { trajectories, table: Timeseries { alpha, times, columns } })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyRow {
    pub method: SolverTag,
    pub cutoff: usize,
    pub fidelity: Option<f64>,
    pub residual: Option<f64>,
    pub mean_photon_number: Option<f64>,
    pub vacuum_population: Option<f64>,
    pub status: Status,
}

#[derive(Debug, Clone)]
pub struct SteadyResult {
    pub rows: Vec<SteadyRow>,
    pub states: Vec<(SolverTag, DensityMatrix)>,
    /// Fixed-point search at the configured cutoff, when NHQM is listed and the cutoff is at most 3.
    pub fixed_points: Option<FixedPointReport>,
}

/// Largest cutoff at which the dense fixed-point search runs.
pub const FIXED_POINT_MAX_CUTOFF: usize = 3;

/// Steady state of each listed solver at `params`.
pub fn run_steady(cfg: &ScenarioConfig) -> Result<SteadyResult> {
    cfg.validate()?;
    let reference = lindblad_steady_state_converged(&cfg.params, &cfg.options.cutoff_search)?;
    let cutoff = reference.n_max_photons;
    let params = cfg.params.with_cutoff(cutoff);
    let rho_l = reference.state.rho.clone();
    let mut rows = Vec::new();
    let mut states = Vec::new();
    for &method in &cfg.solvers {
        let outcome: Result<(DensityMatrix, f64)> = match method {
            SolverTag::Lindblad => Ok((rho_l.clone(), reference.state.residual)),
            SolverTag::Nheh => nheh_steady_state(&params, cfg.options.nheh_correction, &cfg.options.relax).map(|r| (r.rho, r.residual)),
            SolverTag::Nhqm => nhqm_relaxed_states(&params, cfg.options.nhqm_include_pump, &cfg.options.relax)
                .and_then(|v| v.into_iter().next().ok_or_else(|| Error::NotConverged("no seeds".into())))
                .map(|r| (r.rho, r.residual)),
        };
        let row = match outcome {
            Ok((rho, residual)) => {
                let (fid, status) = match fidelity(&rho, &rho_l) {
                    Ok(f) => (Some(f), Status::Ok),
                    Err(e) => (None, Status::Failed(e.to_string())),
                };
                let r = SteadyRow {
                    method,
                    cutoff,
                    fidelity: fid,
                    residual: Some(residual),
                    mean_photon_number: Some(rho.mean_photon_number()),
                    vacuum_population: Some(rho.population(BasisIndex::g(0))),
                    status,
                };
                states.push((method, rho));
                r
            }
            Err(e) => SteadyRow {
                method,
                cutoff,
                fidelity: None,
                residual: None,
                mean_photon_number: None,
                vacuum_population: None,
                status: Status::Failed(e.to_string()),
            },
        };
        rows.push(row);
    }
    let fixed_points = if cfg.solvers.contains(&SolverTag::Nhqm) && cfg.params.n_max_photons <= FIXED_POINT_MAX_CUTOFF {
        Some(nhqm_fixed_points(&cfg.params, cfg.options.nhqm_include_pump)?)
    } else {
        None
    };
    Ok(SteadyResult { rows, states, fixed_points })
}
