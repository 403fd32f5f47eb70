//! Correlation sweep over the initial mixture weight α.

use rayon::prelude::*;

use super::{evolve_solver, ScenarioConfig, Status, TrackedElement};
use super::config::fig1_timeseries_elements;
use crate::error::{Error, Result};
use crate::integrator::{SolverTag, Trajectory};
use crate::metrics::trajectory_correlation;
use crate::quantum::DensityMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Row {
    pub alpha: f64,
    pub element: TrackedElement,
    /// `(other, lindblad)`
    pub pair: (SolverTag, SolverTag),
    pub correlation: Option<f64>,
    pub status: Status,
}

impl Fig1Row {
    pub fn pair_label(&self) -> String {
        format!("{}_vs_{}", self.pair.0, self.pair.1)
    }
}

/// Named columns sampled on a common time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Timeseries {
    pub alpha: f64,
    pub times: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
}

#[derive(Debug, Clone)]
pub struct Fig1Result {
    pub rows: Vec<Fig1Row>,
    pub timeseries: Option<Timeseries>,
}

impl Fig1Result {
    pub fn correlation(&self, alpha: f64, element: TrackedElement, other: SolverTag) -> Option<&Fig1Row> {
        self.rows
            .iter()
            .find(|r| (r.alpha - alpha).abs() < 1e-12 && r.element == element && r.pair.0 == other)
    }
}

fn evolve_all(cfg: &ScenarioConfig, alpha: f64) -> Vec<(SolverTag, Result<Trajectory>)> {
    cfg.solvers
        .iter()
        .map(|&s| {
            let traj = DensityMatrix::alpha_mixture(alpha, cfg.params.n_max_photons)
                .and_then(|rho0| evolve_solver(cfg, &cfg.params, s, &rho0));
            (s, traj)
        })
        .collect()
}

fn rows_for(cfg: &ScenarioConfig, alpha: f64, trajs: &[(SolverTag, Result<Trajectory>)]) -> Vec<Fig1Row> {
    let reference = trajs.iter().find(|(s, _)| *s == SolverTag::Lindblad).map(|(_, t)| t);
    let mut rows = Vec::new();
    for (other, traj) in trajs.iter().filter(|(s, _)| *s != SolverTag::Lindblad) {
        for &element in &cfg.tracked {
            let outcome = match (traj, reference) {
                (Ok(a), Some(Ok(b))) => trajectory_correlation(a, b, (element.row, element.col), element.part),
                (Err(e), _) | (_, Some(Err(e))) => Err(Error::NotConverged(e.to_string())),
                (_, None) => Err(Error::Config("no lindblad reference".into())),
            };
            let (correlation, status) = match outcome {
                Ok(c) => (Some(c), Status::Ok),
                Err(Error::ConstantSeries) => (None, Status::Undefined),
                Err(e) => (None, Status::Failed(e.to_string())),
            };
            rows.push(Fig1Row { alpha, element, pair: (*other, SolverTag::Lindblad), correlation, status });
        }
    }
    rows
}

fn timeseries(alpha: f64, trajs: &[(SolverTag, Result<Trajectory>)]) -> Result<Timeseries> {
    let mut times = None;
    let mut columns = Vec::new();
    for (s, t) in trajs {
        let t = t.as_ref().map_err(|e| Error::NotConverged(format!("{s}: {e}")))?;
        times.get_or_insert_with(|| t.times.clone());
        for el in fig1_timeseries_elements() {
            columns.push((format!("{s}_{}", el.label()), t.series(el.row, el.col, el.part)));
        }
    }
    Ok(Timeseries { alpha, times: times.unwrap_or_default(), columns })
}

/// Correlate every non-Lindblad solver against Lindblad for each α and tracked element.
///
/// A failing solver marks its rows as failed and the sweep carries on. The
/// time series at `options.timeseries_alpha` is returned alongside.
pub fn run_fig1(cfg: &ScenarioConfig) -> Result<Fig1Result> {
    cfg.validate()?;
    let grid = cfg.require_sweep(true)?;
    if !cfg.solvers.contains(&SolverTag::Lindblad) || cfg.solvers.len() < 2 {
        return Err(Error::Config("fig1 needs lindblad plus at least one other solver".into()));
    }
    let ts_alpha = cfg.options.timeseries_alpha;
    let per_alpha: Vec<(Vec<Fig1Row>, Option<Result<Timeseries>>)> = grid
        .par_iter()
        .map(|&alpha| {
            let trajs = evolve_all(cfg, alpha);
            let ts = ((alpha - ts_alpha).abs() < 1e-12).then(|| timeseries(alpha, &trajs));
            (rows_for(cfg, alpha, &trajs), ts)
        })
        .collect();
    let mut rows = Vec::new();
    let mut ts = None;
    for (r, t) in per_alpha {
        rows.extend(r);
        if t.is_some() {
            ts = t;
        }
    }
    let timeseries = match ts {
        Some(t) => Some(t?),
        None if (0.0..=1.0).contains(&ts_alpha) => Some(timeseries(ts_alpha, &evolve_all(cfg, ts_alpha))?),
        None => None,
    };
    Ok(Fig1Result { rows, timeseries })
}
