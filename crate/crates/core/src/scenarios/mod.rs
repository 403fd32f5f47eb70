//! Sweeps and single runs driven by [`ScenarioConfig`] files, and their CSV output.

mod config;
mod fig1;
mod fig2;
mod output;
mod single;

pub use config::{
    fig1_elements, fig1_timeseries_elements, uniform_grid, InitialState, IntegrationConfig, RunOptions, ScenarioConfig,
    Sweep, TrackedElement,
};
pub use fig1::{run_fig1, Fig1Result, Fig1Row, Timeseries};
pub use fig2::{run_fig2, Fig2Point, Fig2Result, Fig2Row};
pub use output::{emit_outputs, fmt_float, Emitted, ResultTable};
pub use single::{run_evolve, run_steady, EvolveResult, SteadyResult, SteadyRow};

use std::fmt;

use crate::error::Result;
use crate::integrator::{SolverTag, Trajectory};
use crate::lindblad::evolve_lindblad;
use crate::nheh::{evolve_nheh_with, NhehOptions, RungLayout};
use crate::nhqm::evolve_nhqm;
use crate::quantum::{DensityMatrix, SystemParams};

/// Environment variable selecting the worker-thread count.
pub const THREADS_ENV: &str = "JCLADDER_THREADS";

/// `JCLADDER_THREADS` if set to a positive integer, else the available parallelism.
pub fn worker_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Run `f` on a dedicated pool of `threads` workers.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Outcome of one table row.
#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Ok,
    /// Correlation of a constant series.
    Undefined,
    Failed(String),
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Ok => f.write_str("ok"),
            Status::Undefined => f.write_str("undefined (constant series)"),
            Status::Failed(m) => write!(f, "failed: {m}"),
        }
    }
}

/// Evolve `rho0` with one solver under the scenario's integration and solver options.
pub fn evolve_solver(cfg: &ScenarioConfig, params: &SystemParams, solver: SolverTag, rho0: &DensityMatrix) -> Result<Trajectory> {
    let spec = cfg.integration.spec();
    match solver {
        SolverTag::Lindblad => evolve_lindblad(params, rho0, &spec),
        SolverTag::Nhqm => evolve_nhqm(params, rho0, &spec, cfg.options.nhqm_include_pump),
        SolverTag::Nheh => {
            let mut opts = NhehOptions::for_params(params);
            if let Some(s) = cfg.options.nheh_schedule {
                opts.schedule = s;
            }
            opts.correction = cfg.options.nheh_correction;
            evolve_nheh_with(params, rho0, &spec, &RungLayout::for_cutoff(params.n_max_photons), &opts)
        }
    }
}
