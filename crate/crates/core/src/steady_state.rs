//! Steady states of the three flows.
//!
//! Lindblad: null vector of the generator restricted to the excitation-diagonal
//! sector, which is invariant and contains the unique steady state.
//!
//! NHEH: long-time relaxation from the vacuum in the same sector.
//!
//! NHQM: the normalised flow is nonlinear and has many fixed points.
//! [`nhqm_fixed_points`] collects them from seeded relaxation plus Newton
//! refinement and classifies each one.

use std::cmp::Ordering;

use nalgebra::{DVector, SVD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::top_rung;
use crate::error::{Error, Result};
use crate::integrator::{integrate_states, IntegrationSpec, Method};
use crate::linalg::{hermitian_eigenvalues, hermitian_part, max_abs, max_abs_diff};
use crate::nheh::Correction;
use crate::nhqm::{build_split_in, NhqmGenerator, NhqmSplit};
use crate::quantum::{build_operators, BasisIndex, CMatrix, DensityMatrix, Frame, SystemParams, C64};
use crate::sector::{sector_max_diff, sector_trace, SectorModel, SectorState};

/// A steady state obtained by a linear solve.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// `max |L(ρ)|` over entries.
    pub residual: f64,
    pub smallest_singular: f64,
    pub next_singular: f64,
    /// Population at and above [`top_rung`].
    pub top_population: f64,
}

/// Null-space threshold on the smallest singular value.
pub const NULL_TOL: f64 = 1e-10;
/// The second singular value must exceed this for a one-dimensional null space.
pub const GAP_TOL: f64 = 1e-8;

fn solve_sector(params: &SystemParams, with_svd: bool) -> Result<SteadyState> {
    params.validate_for_steady_state()?;
    let model = SectorModel::lindblad(params);
    let l = model.real_matrix();
    let m = l.nrows();

    // replace the vacuum-population equation with the trace condition
    let mut a = l.clone();
    let pops = model.population_mask();
    for (j, &is_pop) in pops.iter().enumerate() {
        a[(0, j)] = if is_pop { 1.0 } else { 0.0 };
    }
    let mut b = DVector::zeros(m);
    b[0] = 1.0;
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::DegenerateNullSpace { smallest: 0.0, next: 0.0 })?;

    let (smallest, next) = if with_svd {
        let mut sv: Vec<f64> = l.singular_values().iter().copied().collect();
        sv.sort_by(|p, q| p.partial_cmp(q).unwrap_or(Ordering::Equal));
        (sv[0], sv.get(1).copied().unwrap_or(f64::INFINITY))
    } else {
        (f64::NAN, f64::NAN)
    };
    if with_svd && !(smallest < NULL_TOL && next > GAP_TOL) {
        return Err(Error::DegenerateNullSpace { smallest, next });
    }

    let state = model.from_real(x.as_slice());
    let residual = model.apply(&state).iter().flat_map(|b| b.iter()).fold(0.0, |acc: f64, z| acc.max(z.norm()));
    let rho = model.to_density(&state);
    let min = rho.min_eigenvalue();
    if min < -1e-8 {
        return Err(Error::NotPositive(min));
    }
    let top_population = rho.population_from_rung(top_rung(params));
    Ok(SteadyState { rho, residual, smallest_singular: smallest, next_singular: next, top_population })
}

/// Lindblad steady state at the cutoff in `params`.
///
/// Fails with [`Error::CutoffViolation`] when more than `cutoff_tol` of the
/// population sits on the top rung.
pub fn lindblad_steady_state(params: &SystemParams, cutoff_tol: f64) -> Result<SteadyState> {
    let ss = solve_sector(params, true)?;
    if ss.top_population >= cutoff_tol {
        return Err(Error::CutoffViolation { t: f64::INFINITY, population: ss.top_population });
    }
    Ok(ss)
}

/// Cutoff doubling rule for pumped steady states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CutoffSearch {
    pub start: usize,
    pub max: usize,
    /// Accept once the mean photon number moves by less than this on doubling.
    pub photon_tol: f64,
    pub cutoff_tol: f64,
}

impl Default for CutoffSearch {
    fn default() -> Self {
        Self { start: 16, max: 1024, photon_tol: 1e-8, cutoff_tol: 1e-8 }
    }
}

#[derive(Debug, Clone)]
pub struct ConvergedSteadyState {
    pub state: SteadyState,
    pub n_max_photons: usize,
    /// `(cutoff, mean photon number)` for every cutoff tried.
    pub history: Vec<(usize, f64)>,
}

/// Double the cutoff until the mean photon number settles; keep the smaller of the converged pair.
pub fn lindblad_steady_state_converged(params: &SystemParams, search: &CutoffSearch) -> Result<ConvergedSteadyState> {
    let mut history = Vec::new();
    let mut n = search.start.max(1);
    let mut prev: Option<(usize, f64, f64)> = None;
    while n <= search.max {
        let p = params.with_cutoff(n);
        let ss = solve_sector(&p, false)?;
        let mean = ss.rho.mean_photon_number();
        history.push((n, mean));
        if let Some((pn, pmean, ptop)) = prev {
            if (mean - pmean).abs() < search.photon_tol && ptop < search.cutoff_tol {
                let state = lindblad_steady_state(&params.with_cutoff(pn), search.cutoff_tol)?;
                return Ok(ConvergedSteadyState { state, n_max_photons: pn, history });
            }
        }
        prev = Some((n, mean, ss.top_population));
        n *= 2;
    }
    Err(Error::NotConverged(format!("steady state not converged up to cutoff {}", search.max)))
}

/// Stopping rule for long-time relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RelaxOptions {
    /// Length of each integration window.
    pub window: f64,
    /// Stop once the largest entry change over one window falls below this.
    pub tol: f64,
    pub t_max: f64,
    pub rk_tol: f64,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        Self { window: 50.0, tol: 1e-9, t_max: 20_000.0, rk_tol: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub struct Relaxed {
    pub rho: DensityMatrix,
    pub t: f64,
    pub last_change: f64,
    pub residual: f64,
}

/// Integrate a sector flow window by window until it stops moving.
pub fn relax_sector(model: &SectorModel, init: SectorState, opts: &RelaxOptions) -> Result<Relaxed> {
    let mut state = init;
    let mut t = 0.0;
    let mut last_change = f64::INFINITY;
    while t < opts.t_max {
        let spec = IntegrationSpec {
            t_start: t,
            t_end: t + opts.window,
            sample_times: vec![t + opts.window],
            method: Method::Rk45Adaptive,
            dt_or_tol: opts.rk_tol,
        };
        let next = integrate_states(|_, r: &SectorState, out: &mut SectorState| model.apply_into(r, out), &state, &spec)?
            .pop()
            .expect("one sample");
        last_change = sector_max_diff(&next, &state);
        state = next;
        t += opts.window;
        if last_change < opts.tol {
            let residual = model.apply(&state).iter().flat_map(|b| b.iter()).fold(0.0, |acc: f64, z| acc.max(z.norm()));
            let tr = sector_trace(&state);
            if (tr.re - 1.0).abs() > 1e-8 {
                return Err(Error::TraceDeviation { trace: tr.re, tol: 1e-8 });
            }
            // the exact flow conserves trace; remove the integrator's drift
            for b in state.iter_mut() {
                *b /= tr;
            }
            return Ok(Relaxed { rho: model.to_density(&state), t, last_change, residual });
        }
    }
    Err(Error::NotConverged(format!("relaxation still moving by {last_change:.3e} at t = {t}")))
}

/// NHEH steady state: relax from the vacuum.
pub fn nheh_steady_state(params: &SystemParams, correction: Correction, opts: &RelaxOptions) -> Result<Relaxed> {
    params.validate_for_steady_state()?;
    let model = SectorModel::nheh(params, correction);
    relax_sector(&model, model.vacuum(), opts)
}

/// NHQM long-time limits from the vacuum and a few mixed sector seeds.
pub fn nhqm_relaxed_states(params: &SystemParams, include_pump: bool, opts: &RelaxOptions) -> Result<Vec<Relaxed>> {
    params.validate()?;
    let model = SectorModel::nhqm(params, include_pump);
    let mut seeds = vec![model.vacuum()];
    // uniform over the lowest rungs, and a geometric ladder reaching higher
    for (reach, ratio) in [(3usize, 1.0f64), (model.rungs().min(40), 0.8)] {
        let mut s = vec![nalgebra::Matrix2::zeros(); model.rungs()];
        let mut w = 1.0;
        for (n, block) in s.iter_mut().enumerate().take(reach) {
            let slots = if n == 0 || n == model.rungs() - 1 { 1.0 } else { 2.0 };
            for k in 0..2 {
                if crate::sector::slot_index(n, k, model.n_max_photons()).is_some() {
                    block[(k, k)] = C64::new(w / slots, 0.0);
                }
            }
            w *= ratio;
        }
        let tr = sector_trace(&s);
        for b in s.iter_mut() {
            *b /= tr;
        }
        seeds.push(s);
    }
    seeds.into_iter().map(|s| relax_sector(&model, s, opts)).collect()
}

/// One physicality criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Hermitian,
    UnitTrace,
    Positive,
    /// Small traceless perturbations decay under the linearised flow.
    Stable,
}

#[derive(Debug, Clone)]
pub struct Candidate {
    /// Full-dimension matrix (zero outside the search support), lab frame.
    pub rho: CMatrix,
    /// `max |rhs(ρ)| / max(1, max |ρ|)` for the normalised flow.
    pub residual: f64,
    pub failed: Vec<Check>,
    /// Numerical rank (singular values above `1e-8`).
    pub rank: usize,
    /// Largest real part of the linearisation on traceless perturbations.
    pub growth_rate: f64,
}

impl Candidate {
    pub fn is_physical(&self) -> bool {
        self.failed.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct FixedPointReport {
    pub n_max_photons: usize,
    /// Flat indices the search was restricted to.
    pub support: Vec<usize>,
    pub candidates: Vec<Candidate>,
    /// The unique candidate passing every check, if there is exactly one.
    pub selected: Option<usize>,
}

impl FixedPointReport {
    pub fn physical_count(&self) -> usize {
        self.candidates.iter().filter(|c| c.is_physical()).count()
    }

    /// Candidates that passed the density-matrix checks but not necessarily stability.
    pub fn density_like_count(&self) -> usize {
        self.candidates
            .iter()
            .filter(|c| c.failed.iter().all(|f| *f == Check::Stable))
            .count()
    }

    /// Candidates of the form `|u⟩⟨v| / ⟨v|u⟩`.
    pub fn rank_one_count(&self) -> usize {
        self.candidates.iter().filter(|c| c.rank == 1).count()
    }
}

/// Knobs for [`nhqm_fixed_points_with`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FixedPointSearch {
    pub include_pump: bool,
    /// Restrict to these basis states (all of them when `None`).
    pub support: Option<Vec<BasisIndex>>,
    pub relax_time: f64,
    pub residual_tol: f64,
    pub dedup_tol: f64,
    pub max_newton: usize,
    /// Size of the off-Hermitian kick applied to Newton starts.
    pub kick: f64,
    /// Also start from `|u⟩⟨v| / ⟨v|u⟩` built on eigenvectors of the
    /// non-Hermitian Hamiltonian. Relaxation alone lands inside the continuous
    /// families and rarely reaches these isolated points.
    pub spectral_seeds: bool,
    pub rng_seed: u64,
}

impl Default for FixedPointSearch {
    fn default() -> Self {
        Self {
            include_pump: true,
            support: None,
            relax_time: 500.0,
            residual_tol: 1e-10,
            dedup_tol: 1e-6,
            max_newton: 200,
            kick: 0.3,
            spectral_seeds: true,
            rng_seed: 0x5eed_f1,
        }
    }
}

fn random_complex(rng: &mut ChaCha8Rng, r: usize) -> CMatrix {
    CMatrix::from_fn(r, r, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Deterministic seeds on an `r`-dimensional support: basis projectors, the
/// maximally mixed state, then random density matrices until `count`.
pub fn default_seeds(r: usize, count: usize, rng_seed: u64) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(count.max(r + 1));
    for i in 0..r {
        let mut m = CMatrix::zeros(r, r);
        m[(i, i)] = C64::new(1.0, 0.0);
        out.push(m);
    }
    out.push(CMatrix::identity(r, r).unscale(r as f64));
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    while out.len() < count {
        let a = random_complex(&mut rng, r);
        let m = &a * a.adjoint();
        let tr = m.trace().re;
        out.push(m.unscale(tr));
    }
    out
}

struct Reduced {
    split_lab: NhqmSplit,
    h_lab: CMatrix,
    gen_rot: NhqmGenerator,
    omega: f64,
    excitations: Vec<usize>,
}

fn restrict(m: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

/// `max |rhs(ρ)| / max(1, max |ρ|)`: cross terms between nearly parallel
/// eigenvectors have large entries, so the absolute residual alone measures
/// their size rather than their accuracy.
fn scaled_residual(split: &NhqmSplit, h: &CMatrix, rho: &CMatrix) -> f64 {
    max_abs(&nhqm_residual(split, h, rho)) / max_abs(rho).max(1.0)
}

/// Literal normalised-flow right-hand side.
fn nhqm_residual(split: &NhqmSplit, h: &CMatrix, rho: &CMatrix) -> CMatrix {
    let i = C64::i();
    let s = split.feedback_rate(rho);
    (rho * h.adjoint() - h * rho) * i + rho * s
}

/// Jacobian of [`nhqm_residual`] stacked over the trace row, as a dense matrix on `vec(δ)`.
fn jacobian(split: &NhqmSplit, h: &CMatrix, rho: &CMatrix, with_trace_row: bool) -> CMatrix {
    let r = rho.nrows();
    let n = r * r;
    let s = split.feedback_rate(rho);
    let mut j = CMatrix::zeros(n + with_trace_row as usize, n);
    for col in 0..n {
        let (a, b) = (col % r, col / r);
        let mut e = CMatrix::zeros(r, r);
        e[(a, b)] = C64::new(1.0, 0.0);
        let trh = split.h_minus[(b, a)] * C64::new(0.0, 2.0);
        let out = (&e * h.adjoint() - h * &e) * C64::i() + &e * s + rho * trh;
        for (k, v) in out.iter().enumerate() {
            j[(k, col)] = *v;
        }
        if with_trace_row && a == b {
            j[(n, col)] = C64::new(1.0, 0.0);
        }
    }
    j
}

fn newton(red: &Reduced, start: &CMatrix, opts: &FixedPointSearch) -> Option<CMatrix> {
    let r = start.nrows();
    let n = r * r;
    let mut rho = start.clone();
    let tr = rho.trace();
    rho /= tr;
    let merit = |m: &CMatrix| {
        let f = nhqm_residual(&red.split_lab, &red.h_lab, m);
        let t = m.trace() - C64::new(1.0, 0.0);
        (f.norm_squared() + t.norm_sqr()).sqrt()
    };
    let mut current = merit(&rho);
    for _ in 0..opts.max_newton {
        let f = nhqm_residual(&red.split_lab, &red.h_lab, &rho);
        let t = rho.trace() - C64::new(1.0, 0.0);
        if max_abs(&f) / max_abs(&rho).max(1.0) < 0.1 * opts.residual_tol && t.norm() < 1e-14 {
            return Some(rho);
        }
        let j = jacobian(&red.split_lab, &red.h_lab, &rho, true);
        let mut g = DVector::from_iterator(n + 1, f.iter().copied().chain(std::iter::once(t)));
        g.neg_mut();
        let svd = SVD::new(j, true, true);
        let smax = svd.singular_values.max();
        let step = svd.solve(&g, 1e-12 * smax.max(1.0)).ok()?;
        let delta = CMatrix::from_column_slice(r, r, step.as_slice());
        let mut lambda = 1.0;
        loop {
            let trial = &rho + &delta * C64::new(lambda, 0.0);
            let m = merit(&trial);
            if m < current || lambda < 1e-6 {
                rho = trial;
                current = m;
                break;
            }
            lambda *= 0.5;
        }
        if !current.is_finite() {
            return None;
        }
    }
    (scaled_residual(&red.split_lab, &red.h_lab, &rho) < opts.residual_tol).then_some(rho)
}

fn classify(red: &Reduced, rho: &CMatrix) -> (Vec<Check>, usize, f64) {
    let mut failed = Vec::new();
    let herm = max_abs(&(rho - rho.adjoint()));
    if herm > 1e-8 {
        failed.push(Check::Hermitian);
    }
    if (rho.trace() - C64::new(1.0, 0.0)).norm() > 1e-8 {
        failed.push(Check::UnitTrace);
    }
    if herm > 1e-8 || hermitian_eigenvalues(&hermitian_part(rho)).into_iter().fold(f64::INFINITY, f64::min) < -1e-8 {
        failed.push(Check::Positive);
    }
    // the trace functional is a left eigenvector of the linearisation with
    // eigenvalue s; the remaining eigenvalues act on traceless perturbations
    let s = red.split_lab.feedback_rate(rho);
    let jac = jacobian(&red.split_lab, &red.h_lab, rho, false);
    let eig: Vec<C64> = jac.schur().unpack().1.diagonal().iter().copied().collect();
    let drop = eig
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - s).norm().partial_cmp(&(b.1 - s).norm()).unwrap_or(Ordering::Equal))
        .map(|(k, _)| k);
    let growth_rate = eig
        .iter()
        .enumerate()
        .filter(|(k, _)| Some(*k) != drop)
        .map(|(_, z)| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    if !(growth_rate < -1e-9) {
        failed.push(Check::Stable);
    }
    let sv = rho.singular_values();
    let rank = sv.iter().filter(|&&v| v > 1e-8).count();
    (failed, rank, growth_rate)
}

/// Fixed points of the normalised flow, from the default 64 seeds.
pub fn nhqm_fixed_points(params: &SystemParams, include_pump: bool) -> Result<FixedPointReport> {
    let opts = FixedPointSearch { include_pump, ..Default::default() };
    let r = opts.support.as_ref().map_or(params.dim(), Vec::len);
    nhqm_fixed_points_with(params, &default_seeds(r, 64, opts.rng_seed), &opts)
}

/// Fixed points of the normalised flow.
///
/// Every seed is relaxed for `relax_time` and refined by damped Newton
/// iteration; each seed is also refined directly after a deterministic
/// off-Hermitian kick, so that non-Hermitian roots can be reached. Seeds are
/// matrices on the search support.
pub fn nhqm_fixed_points_with(params: &SystemParams, seeds: &[CMatrix], opts: &FixedPointSearch) -> Result<FixedPointReport> {
    let ops = build_operators(params)?;
    let support: Vec<usize> = match &opts.support {
        Some(s) => {
            for b in s {
                b.check_in(params.n_max_photons)?;
            }
            s.iter().map(BasisIndex::flat).collect()
        }
        None => (0..params.dim()).collect(),
    };
    let r = support.len();
    if let Some(bad) = seeds.iter().find(|s| s.nrows() != r || s.ncols() != r) {
        return Err(Error::DimensionMismatch { expected: r, found: bad.nrows() });
    }
    let lab = build_split_in(params, &ops, opts.include_pump, Frame::Lab);
    let rot = build_split_in(params, &ops, opts.include_pump, Frame::Rotating);
    let split_lab = NhqmSplit { h_plus: restrict(&lab.h_plus, &support), h_minus: restrict(&lab.h_minus, &support) };
    let split_rot = NhqmSplit { h_plus: restrict(&rot.h_plus, &support), h_minus: restrict(&rot.h_minus, &support) };
    let red = Reduced {
        h_lab: split_lab.total(),
        split_lab,
        gen_rot: NhqmGenerator::new(split_rot),
        omega: Frame::Rotating.reference_frequency(params.omega_c),
        excitations: support.iter().map(|&i| BasisIndex::from_flat(i).excitation()).collect(),
    };

    let mut seeds = seeds.to_vec();
    if opts.spectral_seeds {
        let basis: Vec<BasisIndex> = support.iter().map(|&i| BasisIndex::from_flat(i)).collect();
        for m in rank_one_fixed_points(params, opts.include_pump, &basis)? {
            seeds.push(restrict(&m, &support));
        }
    }

    let spec = IntegrationSpec::adaptive(opts.relax_time, 2);
    let found: Vec<Vec<CMatrix>> = seeds
        .par_iter()
        .enumerate()
        .map(|(k, seed)| {
            let mut out = Vec::new();
            let relaxed = integrate_states(|_, m: &CMatrix, o: &mut CMatrix| red.gen_rot.apply_into(m, o), seed, &spec)
                .ok()
                .and_then(|mut v| v.pop())
                .map(|m| rotate_reduced(&m, &red, opts.relax_time));
            if let Some(m) = relaxed.and_then(|m| newton(&red, &m, opts)) {
                out.push(m);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed ^ (k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let kick = hermitian_part(&random_complex(&mut rng, r)) * C64::new(0.0, opts.kick);
            for start in [seed.clone(), seed + kick] {
                if let Some(m) = newton(&red, &start, opts) {
                    out.push(m);
                }
            }
            out
        })
        .collect();

    let mut unique: Vec<CMatrix> = Vec::new();
    for m in found.into_iter().flatten() {
        if !unique.iter().any(|u| max_abs_diff(u, &m) < opts.dedup_tol) {
            unique.push(m);
        }
    }
    if unique.is_empty() {
        return Err(Error::NotConverged("no seed reached a fixed point".into()));
    }

    let mut candidates: Vec<Candidate> = unique
        .into_iter()
        .map(|m| {
            let residual = scaled_residual(&red.split_lab, &red.h_lab, &m);
            let (failed, rank, growth_rate) = classify(&red, &m);
            let mut full = CMatrix::zeros(params.dim(), params.dim());
            for (i, &fi) in support.iter().enumerate() {
                for (j, &fj) in support.iter().enumerate() {
                    full[(fi, fj)] = m[(i, j)];
                }
            }
            Candidate { rho: full, residual, failed, rank, growth_rate }
        })
        .collect();
    candidates.sort_by(|a, b| {
        a.failed
            .len()
            .cmp(&b.failed.len())
            .then_with(|| lexicographic(&a.rho, &b.rho))
    });
    let physical: Vec<usize> = (0..candidates.len()).filter(|&k| candidates[k].is_physical()).collect();
    let selected = (physical.len() == 1).then(|| physical[0]);
    Ok(FixedPointReport { n_max_photons: params.n_max_photons, support, candidates, selected })
}

fn rotate_reduced(m: &CMatrix, red: &Reduced, t: f64) -> CMatrix {
    let r = m.nrows();
    CMatrix::from_fn(r, r, |i, j| {
        let dn = red.excitations[i] as f64 - red.excitations[j] as f64;
        m[(i, j)] * C64::from_polar(1.0, -red.omega * dn * t)
    })
}

/// Order by diagonal (largest first), then by the remaining entries, at `1e-9` resolution.
fn lexicographic(a: &CMatrix, b: &CMatrix) -> Ordering {
    let key = |m: &CMatrix| -> Vec<i64> {
        let q = |x: f64| (x * 1e9).round() as i64;
        let mut k: Vec<i64> = (0..m.nrows()).map(|i| -q(m[(i, i)].re)).collect();
        k.extend(m.iter().flat_map(|z| [q(z.re), q(z.im)]));
        k
    };
    key(a).cmp(&key(b))
}

/// Rank-one fixed points `|u_i⟩⟨v_j| / ⟨v_j|u_i⟩` built from the eigenvectors of the
/// non-Hermitian Hamiltonian within each rung; used as an independent oracle.
pub fn rank_one_fixed_points(params: &SystemParams, include_pump: bool, support: &[BasisIndex]) -> Result<Vec<CMatrix>> {
    let ops = build_operators(params)?;
    let lab = build_split_in(params, &ops, include_pump, Frame::Lab);
    let idx: Vec<usize> = support.iter().map(BasisIndex::flat).collect();
    let h = restrict(&lab.total(), &idx);
    let mut out = Vec::new();
    // group support indices by rung; every block is at most 2×2
    let mut rungs: Vec<Vec<usize>> = Vec::new();
    for (k, b) in support.iter().enumerate() {
        let n = b.excitation();
        match rungs.iter_mut().find(|g| support[g[0]].excitation() == n) {
            Some(g) => g.push(k),
            None => rungs.push(vec![k]),
        }
    }
    for g in &rungs {
        let vecs: Vec<DVector<C64>> = match g.len() {
            1 => vec![DVector::from_element(1, C64::new(1.0, 0.0))],
            2 => {
                let (a, b, c, d) = (h[(g[0], g[0])], h[(g[0], g[1])], h[(g[1], g[0])], h[(g[1], g[1])]);
                let tr = a + d;
                let disc = ((a - d) * (a - d) + b * c * 4.0).sqrt();
                [(tr + disc) * 0.5, (tr - disc) * 0.5]
                    .iter()
                    .map(|&l| {
                        if b.norm() > 0.0 {
                            DVector::from_vec(vec![b, l - a])
                        } else if (l - a).norm() < (l - d).norm() {
                            DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
                        } else {
                            DVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)])
                        }
                    })
                    .collect()
            }
            _ => return Err(Error::InvalidParams("rung block larger than 2".into())),
        };
        for u in &vecs {
            for v in &vecs {
                let overlap = v.dotc(u);
                if overlap.norm() < 1e-12 {
                    continue;
                }
                let mut m = CMatrix::zeros(params.dim(), params.dim());
                for (i, &gi) in g.iter().enumerate() {
                    for (j, &gj) in g.iter().enumerate() {
                        m[(idx[gi], idx[gj])] = u[i] * v[j].conj() / overlap;
                    }
                }
                out.push(m);
            }
        }
    }
    Ok(out)
}

/// `{G0, G1, X0}`: the smallest support on which the single-excitation dynamics closes.
pub fn first_rung_support() -> Vec<BasisIndex> {
    vec![BasisIndex::g(0), BasisIndex::g(1), BasisIndex::x(0)]
}

/// Scaled residual of the normalised flow in the lab frame, at full dimension.
pub fn fixed_point_residual(params: &SystemParams, include_pump: bool, rho: &CMatrix) -> Result<f64> {
    let ops = build_operators(params)?;
    let lab = build_split_in(params, &ops, include_pump, Frame::Lab);
    Ok(scaled_residual(&lab, &lab.total(), rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{evolve_lindblad_with, lindblad_rhs};
    use crate::dynamics::EvolveOptions;

    #[test]
    fn unpumped_steady_state_is_vacuum() {
        let p = SystemParams::resonant_benchmark().with_cutoff(4);
        let ss = lindblad_steady_state(&p, 1e-8).unwrap();
        assert!((ss.rho.population(BasisIndex::g(0)) - 1.0).abs() < 1e-14);
        assert!(ss.smallest_singular < NULL_TOL);
    }

    #[test]
    fn pumped_steady_state_solves_full_generator() {
        let p = SystemParams::resonant_benchmark().with_pump(0.05).with_cutoff(24);
        let ss = solve_sector(&p, true).unwrap();
        let ops = build_operators(&p).unwrap();
        let res = max_abs(&lindblad_rhs(&p, &ops, ss.rho.as_matrix()).unwrap());
        assert!(res < 1e-10, "{res}");
        assert!((ss.rho.trace().re - 1.0).abs() < 1e-13);
        assert!(ss.rho.mean_photon_number() > 0.0);
    }

    #[test]
    fn steady_state_is_invariant() {
        let p = SystemParams::resonant_benchmark().with_pump(0.05).with_cutoff(32);
        let ss = lindblad_steady_state(&p, 1e-8).unwrap();
        let spec = IntegrationSpec::adaptive(10.0, 2);
        let traj = evolve_lindblad_with(&p, &ss.rho, &spec, &EvolveOptions::default()).unwrap();
        let drift = max_abs_diff(traj.last().as_matrix(), ss.rho.as_matrix());
        assert!(drift < 1e-9, "{drift}");
    }

    #[test]
    fn gain_above_loss_is_refused() {
        let p = SystemParams::resonant_benchmark().with_pump(0.1).with_cutoff(8);
        assert!(matches!(lindblad_steady_state(&p, 1e-8), Err(Error::UnboundedGain { .. })));
    }

    #[test]
    fn small_cutoff_is_flagged() {
        let p = SystemParams::resonant_benchmark().with_pump(0.09).with_cutoff(8);
        assert!(matches!(lindblad_steady_state(&p, 1e-8), Err(Error::CutoffViolation { .. })));
    }

    #[test]
    fn nheh_relaxes_to_lindblad() {
        let p = SystemParams::resonant_benchmark().with_pump(0.03).with_cutoff(24);
        let ss = lindblad_steady_state(&p, 1e-8).unwrap();
        let rel = nheh_steady_state(&p, Correction::FullRate, &RelaxOptions::default()).unwrap();
        assert!(max_abs_diff(ss.rho.as_matrix(), rel.rho.as_matrix()) < 1e-8);
    }

    #[test]
    fn nhqm_relaxes_to_vacuum() {
        let p = SystemParams::resonant_benchmark().with_pump(0.05).with_cutoff(16);
        for r in nhqm_relaxed_states(&p, true, &RelaxOptions::default()).unwrap() {
            assert!((r.rho.population(BasisIndex::g(0)) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn analytic_rank_one_points_are_fixed() {
        let p = SystemParams::resonant_benchmark().with_pump(0.05);
        let support = first_rung_support();
        let pts = rank_one_fixed_points(&p, true, &support).unwrap();
        assert_eq!(pts.len(), 5);
        for m in &pts {
            let r = fixed_point_residual(&p, true, m).unwrap();
            assert!(r < 1e-10, "{r} {m}");
        }
    }

    #[test]
    fn dissipative_vacuum_is_the_physical_fixed_point() {
        let p = SystemParams::resonant_benchmark();
        let opts = FixedPointSearch { include_pump: false, support: Some(first_rung_support()), ..Default::default() };
        let report = nhqm_fixed_points_with(&p, &default_seeds(3, 16, 1), &opts).unwrap();
        let sel = report.selected.expect("unique physical fixed point");
        let c = &report.candidates[sel];
        assert!((c.rho[(0, 0)].re - 1.0).abs() < 1e-10);
        assert!(c.residual < 1e-10);
    }
}
