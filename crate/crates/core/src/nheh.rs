//! Non-Hermitian effective Hamiltonian with rung-to-rung recycling terms.
//!
//! The effective Hamiltonian `Ĥ = H_JC + H₋` drains every rung; jump terms
//! `κ aρa†`, `γ σρσ†` and `P a†ρa` hand the lost population to the adjacent
//! rung. With those coefficients the summed flow is exactly the Lindblad one.
//!
//! The cascade groups matrix blocks into cohorts: cohort `n` holds every
//! block `(r, c)` of excitation numbers with `max(r, c) = n`. Ĥ keeps blocks
//! in place while the jumps move `(r+1, c+1) → (r, c)` (decay) and
//! `(r−1, c−1) → (r, c)` (pump), so cohort `n` only sees cohorts `n ± 1`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dynamics::{check_dim, finish, EvolveOptions};
use crate::error::{Error, Result};
use crate::generator::MasterGenerator;
use crate::integrator::{integrate_dense, integrate_states, DenseOutput, IntegrationSpec, SolverTag, Trajectory};
use crate::linalg::max_abs_diff;
use crate::quantum::{
    build_operators, excitation_of, hermitian_flow, jump_transfer, CMatrix, DensityMatrix, Frame, OperatorSet,
    SystemParams, C64,
};

/// Partition of the bare-state basis into excitation rungs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RungLayout {
    /// Highest rung present (`n_max_photons + 1`, which holds only `|X, n_max⟩`).
    pub n_max_rung: usize,
    /// Flat indices belonging to each rung, in basis order.
    pub members: Vec<Vec<usize>>,
    /// Row and column index lists for every `(row_rung, col_rung)` block.
    pub block_index_map: BTreeMap<(usize, usize), (Vec<usize>, Vec<usize>)>,
}

impl RungLayout {
    pub fn for_cutoff(n_max_photons: usize) -> Self {
        let d = 2 * (n_max_photons + 1);
        let n_max_rung = n_max_photons + 1;
        let mut members = vec![Vec::new(); n_max_rung + 1];
        for i in 0..d {
            members[excitation_of(i)].push(i);
        }
        let mut block_index_map = BTreeMap::new();
        for r in 0..=n_max_rung {
            for c in 0..=n_max_rung {
                block_index_map.insert((r, c), (members[r].clone(), members[c].clone()));
            }
        }
        Self { n_max_rung, members, block_index_map }
    }

    pub fn dim(&self) -> usize {
        self.members.iter().map(Vec::len).sum()
    }

    pub fn rung_dim(&self, n: usize) -> usize {
        self.members[n].len()
    }

    /// Copy of `rho` keeping only the blocks of cohort `n`.
    pub fn cohort(&self, n: usize, rho: &CMatrix) -> CMatrix {
        CMatrix::from_fn(rho.nrows(), rho.ncols(), |i, j| {
            if excitation_of(i).max(excitation_of(j)) == n {
                rho[(i, j)]
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Extract block `(r, c)` as a small matrix.
    pub fn block(&self, r: usize, c: usize, rho: &CMatrix) -> CMatrix {
        let (rows, cols) = &self.block_index_map[&(r, c)];
        CMatrix::from_fn(rows.len(), cols.len(), |i, j| rho[(rows[i], cols[j])])
    }

    /// Reassemble a full matrix from all of its blocks.
    pub fn assemble(&self, blocks: &BTreeMap<(usize, usize), CMatrix>) -> CMatrix {
        let d = self.dim();
        let mut out = CMatrix::zeros(d, d);
        for (key, b) in blocks {
            let (rows, cols) = &self.block_index_map[key];
            for (i, &ri) in rows.iter().enumerate() {
                for (j, &cj) in cols.iter().enumerate() {
                    out[(ri, cj)] = b[(i, j)];
                }
            }
        }
        out
    }
}

/// Coefficient in front of the recycling terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correction {
    /// `κ aρa†`: reproduces the Lindblad flow.
    #[default]
    FullRate,
    /// `κ/2 aρa†`: loses trace at half the decay rate.
    HalfRate,
}

impl Correction {
    fn factor(self) -> f64 {
        match self {
            Correction::FullRate => 1.0,
            Correction::HalfRate => 0.5,
        }
    }
}

/// Order in which the cohorts are integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Highest cohort first, each one sourced from the finished cohort above. Requires `P = 0`.
    TopDown,
    /// All cohorts integrated together as one system.
    #[default]
    Joint,
    /// Gauss-Seidel sweeps over whole trajectories until successive sweeps agree.
    IterativeSweep,
}

/// `Ĥ = H_JC − iκ/2 a†a − iγ_x/2 σ†σ − iP/2 aa†`.
pub fn effective_hamiltonian(params: &SystemParams, ops: &OperatorSet, frame: Frame) -> CMatrix {
    crate::lindblad::effective_hamiltonian(params, ops, frame)
}

/// `H_Ĥ(ρ) + κ C_a(ρ) + γ_x C_σ(ρ) + P C_{a†}(ρ)`, evaluated literally.
pub fn nheh_rhs(params: &SystemParams, ops: &OperatorSet, rho: &CMatrix) -> Result<CMatrix> {
    nheh_rhs_with(params, ops, rho, Correction::FullRate)
}

pub fn nheh_rhs_with(params: &SystemParams, ops: &OperatorSet, rho: &CMatrix, correction: Correction) -> Result<CMatrix> {
    // H_Ĥ is linear in Ĥ: the anti-Hermitian part and the recycling terms are
    // summed first, so the O(ω) commutator is rounded once
    let h = effective_hamiltonian(params, ops, Frame::Lab);
    let h_minus = &h - &ops.h_jc;
    let f = correction.factor();
    let mut diss = hermitian_flow(&h_minus, rho)?;
    diss += jump_transfer(&ops.a, rho)?.scale(f * params.kappa);
    diss += jump_transfer(&ops.sigma, rho)?.scale(f * params.gamma_x);
    diss += jump_transfer(&ops.a_dag, rho)?.scale(f * params.pump_p);
    Ok(hermitian_flow(&ops.h_jc, rho)? + diss)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NhehOptions {
    pub evolve: EvolveOptions,
    pub schedule: Schedule,
    pub correction: Correction,
    /// Convergence threshold between successive sweeps (max norm over all samples and entries).
    pub sweep_tol: f64,
    pub max_sweeps: usize,
}

impl Default for NhehOptions {
    fn default() -> Self {
        Self {
            evolve: EvolveOptions::default(),
            schedule: Schedule::Joint,
            correction: Correction::FullRate,
            sweep_tol: 1e-8,
            max_sweeps: 200,
        }
    }
}

impl NhehOptions {
    /// Top-down without pump, joint solve otherwise.
    pub fn for_params(params: &SystemParams) -> Self {
        let schedule = if params.pump_p == 0.0 { Schedule::TopDown } else { Schedule::Joint };
        Self { schedule, ..Default::default() }
    }
}

struct CascadeParts {
    drift: MasterGenerator,
    decay: MasterGenerator,
    pump: MasterGenerator,
    full: MasterGenerator,
}

fn cascade_parts(params: &SystemParams, ops: &OperatorSet, frame: Frame, correction: Correction) -> CascadeParts {
    let d = ops.dim();
    let zero = CMatrix::zeros(d, d);
    let k = effective_hamiltonian(params, ops, frame);
    let f = correction.factor();
    let decay = [(f * params.kappa, &ops.a), (f * params.gamma_x, &ops.sigma)];
    let pump = [(f * params.pump_p, &ops.a_dag)];
    CascadeParts {
        drift: MasterGenerator::new(&k, &[]),
        decay: MasterGenerator::new(&zero, &decay),
        pump: MasterGenerator::new(&zero, &pump),
        full: MasterGenerator::new(&k, &[decay[0], decay[1], pump[0]]),
    }
}

pub fn evolve_nheh_cascade(
    params: &SystemParams,
    rho0: &DensityMatrix,
    spec: &IntegrationSpec,
    layout: &RungLayout,
) -> Result<Trajectory> {
    evolve_nheh_with(params, rho0, spec, layout, &NhehOptions::for_params(params))
}

pub fn evolve_nheh_with(
    params: &SystemParams,
    rho0: &DensityMatrix,
    spec: &IntegrationSpec,
    layout: &RungLayout,
    opts: &NhehOptions,
) -> Result<Trajectory> {
    let ops = build_operators(params)?;
    check_dim(params, rho0)?;
    if layout.dim() != rho0.dim() {
        return Err(Error::DimensionMismatch { expected: layout.dim(), found: rho0.dim() });
    }
    let parts = cascade_parts(params, &ops, opts.evolve.frame, opts.correction);
    let states = match opts.schedule {
        Schedule::Joint => {
            integrate_states(|_, r: &CMatrix, out: &mut CMatrix| parts.full.apply_into(r, out), rho0.as_matrix(), spec)?
        }
        Schedule::TopDown => {
            if params.pump_p > 0.0 {
                return Err(Error::InvalidSpec(
                    "top-down cascade cannot source the pump from an unsolved lower rung; use the joint or iterative schedule".into(),
                ));
            }
            top_down(&parts, rho0.as_matrix(), spec, layout)?
        }
        Schedule::IterativeSweep => iterative_sweep(&parts, rho0.as_matrix(), spec, layout, opts)?,
    };
    let traj = finish(params, &opts.evolve, spec, states, SolverTag::Nheh)?;
    if opts.correction == Correction::FullRate {
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let tr = s.trace();
            if (tr.re - 1.0).abs() > 1e-9 {
                return Err(Error::NotConverged(format!("cascade trace {:.12} at t = {t}", tr.re)));
            }
        }
    }
    Ok(traj)
}

/// Integrate one cohort with time-dependent sources from its neighbours.
fn solve_cohort(
    parts: &CascadeParts,
    init: &CMatrix,
    spec: &IntegrationSpec,
    above: Option<&DenseOutput<CMatrix>>,
    below: Option<&DenseOutput<CMatrix>>,
) -> Result<(Vec<CMatrix>, DenseOutput<CMatrix>)> {
    let mut src = init.clone();
    let mut tmp = init.clone();
    let rhs = |t: f64, r: &CMatrix, out: &mut CMatrix| {
        parts.drift.apply_into(r, out);
        if let Some(a) = above {
            a.eval_into(t, &mut src);
            parts.decay.apply_into(&src, &mut tmp);
            *out += &tmp;
        }
        if let Some(b) = below {
            b.eval_into(t, &mut src);
            parts.pump.apply_into(&src, &mut tmp);
            *out += &tmp;
        }
    };
    integrate_dense(rhs, init, spec)
}

fn top_down(parts: &CascadeParts, rho0: &CMatrix, spec: &IntegrationSpec, layout: &RungLayout) -> Result<Vec<CMatrix>> {
    let mut total = vec![CMatrix::zeros(rho0.nrows(), rho0.ncols()); spec.sample_times.len()];
    let mut above: Option<DenseOutput<CMatrix>> = None;
    for n in (0..=layout.n_max_rung).rev() {
        let init = layout.cohort(n, rho0);
        let (samples, dense) = solve_cohort(parts, &init, spec, above.as_ref(), None)?;
        for (acc, s) in total.iter_mut().zip(&samples) {
            *acc += s;
        }
        above = Some(dense);
    }
    Ok(total)
}

fn iterative_sweep(
    parts: &CascadeParts,
    rho0: &CMatrix,
    spec: &IntegrationSpec,
    layout: &RungLayout,
    opts: &NhehOptions,
) -> Result<Vec<CMatrix>> {
    let top = layout.n_max_rung;
    let mut dense: Vec<Option<DenseOutput<CMatrix>>> = vec![None; top + 1];
    let mut samples: Vec<Vec<CMatrix>> = vec![Vec::new(); top + 1];

    for sweep in 0..opts.max_sweeps {
        let mut change: f64 = 0.0;
        for n in (0..=top).rev() {
            let init = layout.cohort(n, rho0);
            let above = if n < top { dense[n + 1].as_ref() } else { None };
            let below = if n > 0 { dense[n - 1].as_ref() } else { None };
            let (s, d) = solve_cohort(parts, &init, spec, above, below)?;
            if samples[n].is_empty() {
                change = f64::INFINITY;
            } else {
                for (a, b) in samples[n].iter().zip(&s) {
                    change = change.max(max_abs_diff(a, b));
                }
            }
            samples[n] = s;
            dense[n] = Some(d);
        }
        if change < opts.sweep_tol && sweep > 0 {
            let mut total = vec![CMatrix::zeros(rho0.nrows(), rho0.ncols()); spec.sample_times.len()];
            for cohort in &samples {
                for (acc, s) in total.iter_mut().zip(cohort) {
                    *acc += s;
                }
            }
            return Ok(total);
        }
    }
    Err(Error::NotConverged(format!("cascade sweeps did not settle within {} iterations", opts.max_sweeps)))
}
