//! Steady-state fidelity against the Lindblad steady state over a pump grid.

use rayon::prelude::*;

use super::{ScenarioConfig, Status};
use crate::error::{Error, Result};
use crate::integrator::SolverTag;
use crate::linalg::max_abs_diff;
use crate::metrics::fidelity;
use crate::quantum::{BasisIndex, DensityMatrix};
use crate::steady_state::{lindblad_steady_state_converged, nheh_steady_state, nhqm_relaxed_states};

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Row {
    pub pump: f64,
    pub method: SolverTag,
    pub fidelity: Option<f64>,
    /// Largest entry of the generator applied to the returned state.
    pub residual: Option<f64>,
    pub status: Status,
    pub cutoff: Option<usize>,
    pub mean_photon_number: Option<f64>,
    pub vacuum_population: Option<f64>,
    /// `max |ρ − |G0⟩⟨G0||` over entries.
    pub distance_to_vacuum: Option<f64>,
    /// Relaxation time used, for the relaxed methods.
    pub relax_time: Option<f64>,
}

/// Steady states at one pump value.
#[derive(Debug, Clone)]
pub struct Fig2Point {
    pub pump: f64,
    pub lindblad: Option<DensityMatrix>,
    pub other: Vec<(SolverTag, Option<DensityMatrix>)>,
}

#[derive(Debug, Clone)]
pub struct Fig2Result {
    pub rows: Vec<Fig2Row>,
    pub states: Vec<Fig2Point>,
}

impl Fig2Result {
    pub fn row(&self, pump: f64, method: SolverTag) -> Option<&Fig2Row> {
        self.rows.iter().find(|r| (r.pump - pump).abs() < 1e-12 && r.method == method)
    }
}

fn describe(rho: &DensityMatrix) -> (f64, f64, f64) {
    let g0 = BasisIndex::g(0);
    let vac = DensityMatrix::projector(g0, rho.n_max_photons()).expect("vacuum fits");
    (rho.mean_photon_number(), rho.population(g0), max_abs_diff(rho.as_matrix(), vac.as_matrix()))
}

fn failed(pump: f64, method: SolverTag, msg: String) -> Fig2Row {
    Fig2Row {
        pump,
        method,
        fidelity: None,
        residual: None,
        status: Status::Failed(msg),
        cutoff: None,
        mean_photon_number: None,
        vacuum_population: None,
        distance_to_vacuum: None,
        relax_time: None,
    }
}

fn run_point(cfg: &ScenarioConfig, pump: f64) -> (Vec<Fig2Row>, Fig2Point) {
    let params = cfg.params.with_pump(pump);
    let mut point = Fig2Point { pump, lindblad: None, other: Vec::new() };
    let reference = match lindblad_steady_state_converged(&params, &cfg.options.cutoff_search) {
        Ok(r) => r,
        Err(e) => {
            let rows = cfg.solvers.iter().map(|&s| failed(pump, s, format!("lindblad reference: {e}"))).collect();
            return (rows, point);
        }
    };
    let cutoff = reference.n_max_photons;
    let params = params.with_cutoff(cutoff);
    let rho_l = reference.state.rho.clone();
    let mut rows = Vec::new();
    for &method in &cfg.solvers {
        let outcome: Result<(DensityMatrix, f64, Option<f64>, Status)> = match method {
            SolverTag::Lindblad => Ok((rho_l.clone(), reference.state.residual, None, Status::Ok)),
            SolverTag::Nheh => nheh_steady_state(&params, cfg.options.nheh_correction, &cfg.options.relax)
                .map(|r| (r.rho, r.residual, Some(r.t), Status::Ok)),
            SolverTag::Nhqm => nhqm_relaxed_states(&params, cfg.options.nhqm_include_pump, &cfg.options.relax).and_then(|all| {
                let spread = all
                    .iter()
                    .map(|r| max_abs_diff(r.rho.as_matrix(), all[0].rho.as_matrix()))
                    .fold(0.0, f64::max);
                let t = all.iter().map(|r| r.t).fold(0.0, f64::max);
                let first = all.into_iter().next().ok_or_else(|| Error::NotConverged("no seeds".into()))?;
                let status = if spread < 1e-8 { Status::Ok } else { Status::Failed(format!("seeds disagree by {spread:.3e}")) };
                Ok((first.rho, first.residual, Some(t), status))
            }),
        };
        match outcome {
            Ok((rho, residual, relax_time, status)) => {
                let (n, p0, dist) = describe(&rho);
                let (fid, status) = match fidelity(&rho, &rho_l) {
                    Ok(f) => (Some(f), status),
                    Err(e) => (None, Status::Failed(format!("fidelity: {e}"))),
                };
                rows.push(Fig2Row {
                    pump,
                    method,
                    fidelity: fid,
                    residual: Some(residual),
                    status,
                    cutoff: Some(cutoff),
                    mean_photon_number: Some(n),
                    vacuum_population: Some(p0),
                    distance_to_vacuum: Some(dist),
                    relax_time,
                });
                if method != SolverTag::Lindblad {
                    point.other.push((method, Some(rho)));
                }
            }
            Err(e) => {
                rows.push(failed(pump, method, e.to_string()));
                point.other.push((method, None));
            }
        }
    }
    point.lindblad = Some(rho_l);
    (rows, point)
}

/// Fidelity of each solver's steady state against the Lindblad one at every pump value.
///
/// The cutoff is chosen per pump value by doubling until the Lindblad mean photon
/// number settles; the other methods reuse it.
pub fn run_fig2(cfg: &ScenarioConfig) -> Result<Fig2Result> {
    cfg.validate()?;
    let grid = cfg.require_sweep(false)?;
    let per: Vec<(Vec<Fig2Row>, Fig2Point)> = grid.par_iter().map(|&p| run_point(cfg, p)).collect();
    let mut rows = Vec::new();
    let mut states = Vec::new();
    for (r, s) in per {
        rows.extend(r);
        states.push(s);
    }
    Ok(Fig2Result { rows, states })
}
