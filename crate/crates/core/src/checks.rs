//! Built-in invariant suite, run by `jcbench --check`.
//!
//! Each check measures one quantity at a fixed seed and compares it with a bound.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::integrator::{integrate_states, IntegrationSpec, Method};
use crate::lindblad::{evolve_lindblad, lindblad_generator, lindblad_rhs};
use crate::linalg::{max_abs, max_abs_diff};
use crate::metrics::{fidelity, pearson};
use crate::nheh::{evolve_nheh_with, nheh_rhs, NhehOptions, RungLayout};
use crate::nhqm::{build_split, first_rung_rhs, nhqm_rhs, FirstRung};
use crate::quantum::{build_operators, BasisIndex, CMatrix, DensityMatrix, Frame, SystemParams, C64};
use crate::steady_state::lindblad_steady_state;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub value: f64,
    pub bound: String,
    pub passed: bool,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{mark}  {:<34} {:.3e}  (need {})", self.name, self.value, self.bound)
    }
}

fn below(name: &'static str, value: f64, bound: f64) -> CheckOutcome {
    CheckOutcome { name, value, bound: format!("< {bound:e}"), passed: value < bound }
}

fn within(name: &'static str, value: f64, lo: f64, hi: f64) -> CheckOutcome {
    CheckOutcome { name, value, bound: format!("in [{lo}, {hi}]"), passed: (lo..=hi).contains(&value) }
}

/// Worst trace drift, hermiticity error and negative eigenvalue along a trajectory.
pub fn trajectory_invariants(states: &[DensityMatrix]) -> (f64, f64, f64) {
    let t0 = states[0].trace().re;
    let mut drift: f64 = 0.0;
    let mut herm: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    for s in states {
        drift = drift.max((s.trace().re - t0).abs()).max(s.trace().im.abs());
        herm = herm.max(s.hermiticity_error());
        min_eig = min_eig.min(s.min_eigenvalue());
    }
    (drift, herm, min_eig)
}

/// Random valid state supported on `{G0, G1, X0}` at cutoff 1, with its first-rung elements.
pub fn random_first_rung_state(rng: &mut ChaCha8Rng) -> (CMatrix, FirstRung) {
    let a = CMatrix::from_fn(3, 3, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let m = &a * a.adjoint();
    let m = m.unscale(m.trace().re);
    let idx = [BasisIndex::g(0).flat(), BasisIndex::g(1).flat(), BasisIndex::x(0).flat()];
    let mut full = CMatrix::zeros(4, 4);
    for i in 0..3 {
        for j in 0..3 {
            full[(idx[i], idx[j])] = m[(i, j)];
        }
    }
    let (g0, g1, x0) = (idx[0], idx[1], idx[2]);
    let fr = [full[(g0, g0)], full[(g1, g1)], full[(x0, x0)], full[(g1, g0)], full[(g1, x0)], full[(x0, g0)]];
    (full, fr)
}

/// Largest entrywise gap between the closed first-rung equations and the full flow.
pub fn first_rung_gap(params: &SystemParams, n: usize, seed: u64) -> Result<f64> {
    let p = params.with_cutoff(1).with_pump(0.0);
    let ops = build_operators(&p)?;
    let split = build_split(&p, &ops, false);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (g0, g1, x0) = (BasisIndex::g(0).flat(), BasisIndex::g(1).flat(), BasisIndex::x(0).flat());
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let (full, fr) = random_first_rung_state(&mut rng);
        let a = first_rung_rhs(&p, &fr)?;
        let b = nhqm_rhs(&split, &full)?;
        let b = [b[(g0, g0)], b[(g1, g1)], b[(x0, x0)], b[(g1, g0)], b[(g1, x0)], b[(x0, g0)]];
        for (u, v) in a.iter().zip(&b) {
            worst = worst.max((u - v).norm());
        }
    }
    Ok(worst)
}

/// Largest entrywise gap between the corrected NHEH and Lindblad right-hand sides.
pub fn nheh_lindblad_gap(params: &SystemParams, n: usize, seed: u64) -> Result<f64> {
    let ops = build_operators(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let r = DensityMatrix::random(&mut rng, params.n_max_photons);
        let a = lindblad_rhs(params, &ops, r.as_matrix())?;
        let b = nheh_rhs(params, &ops, r.as_matrix())?;
        worst = worst.max(max_abs_diff(&a, &b));
    }
    Ok(worst)
}

/// `err(h) / err(h/2)` for fixed-step RK4 on a pumped Lindblad problem.
pub fn rk4_order_ratio() -> Result<f64> {
    let p = SystemParams::resonant_benchmark().with_pump(0.02).with_cutoff(4);
    let ops = build_operators(&p)?;
    let gen = lindblad_generator(&p, &ops, Frame::Rotating);
    let rho0 = DensityMatrix::alpha_superposition(0.3, 4)?.into_matrix();
    let rhs = |_: f64, r: &CMatrix, o: &mut CMatrix| gen.apply_into(r, o);
    let t = 5.0;
    let reference = integrate_states(rhs, &rho0, &IntegrationSpec::uniform(0.0, t, 2, Method::Rk45Adaptive, 1e-13))?;
    let err = |h: f64| -> Result<f64> {
        let s = integrate_states(rhs, &rho0, &IntegrationSpec::uniform(0.0, t, 2, Method::Rk4Fixed, h))?;
        Ok(max_abs_diff(&s[1], &reference[1]))
    };
    Ok(err(0.2)? / err(0.1)?)
}

/// Run the whole suite.
pub fn run_checks() -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let bench = SystemParams::resonant_benchmark();

    let p = bench.with_pump(0.02).with_cutoff(12);
    let rho0 = DensityMatrix::alpha_superposition(0.3, 12)?;
    let spec = IntegrationSpec::adaptive(200.0, 401);
    let traj = evolve_lindblad(&p, &rho0, &spec)?;
    let (drift, herm, min_eig) = trajectory_invariants(&traj.states);
    out.push(below("lindblad trace drift", drift, 1e-9));
    out.push(below("lindblad hermiticity", herm, 1e-10));
    out.push(below("lindblad negativity", (-min_eig).max(0.0), 1e-8));

    let nh = evolve_nheh_with(&p, &rho0, &spec, &RungLayout::for_cutoff(12), &NhehOptions::for_params(&p))?;
    let (drift, _, _) = trajectory_invariants(&nh.states);
    out.push(below("nheh trace drift", drift, 1e-9));
    out.push(below("nheh vs lindblad trajectory", nh.max_abs_diff(&traj)?, 1e-6));

    out.push(below("nheh_rhs vs lindblad_rhs", nheh_lindblad_gap(&bench.with_pump(0.05).with_cutoff(3), 200, 1)?, 1e-13));
    out.push(below("first-rung vs full normalised flow", first_rung_gap(&bench, 200, 2)?, 1e-12));
    out.push(within("rk4 error ratio", rk4_order_ratio()?, 12.0, 20.0));

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut sym: f64 = 0.0;
    let mut range: f64 = 0.0;
    for _ in 0..50 {
        let a = DensityMatrix::random(&mut rng, 2);
        let b = DensityMatrix::random(&mut rng, 2);
        let (fab, fba) = (fidelity(&a, &b)?, fidelity(&b, &a)?);
        sym = sym.max((fab - fba).abs());
        range = range.max(fab - 1.0).max(-fab);
    }
    out.push(below("fidelity symmetry", sym, 1e-10));
    out.push(below("fidelity range excess", range.max(0.0), 1e-12));
    let psi = DensityMatrix::random_pure_vector(&mut rng, 2);
    let sigma = DensityMatrix::random(&mut rng, 2);
    let expect = (psi.adjoint() * sigma.as_matrix() * &psi)[(0, 0)].re;
    out.push(below("fidelity pure-state reduction", (fidelity(&DensityMatrix::pure(&psi)?, &sigma)? - expect).abs(), 1e-10));

    let x: Vec<f64> = (0..50).map(|k| (k as f64 * 0.3).sin()).collect();
    let y: Vec<f64> = (0..50).map(|k| (k as f64 * 0.3).cos() + 0.1 * k as f64).collect();
    let y2: Vec<f64> = y.iter().map(|v| 3.5 * v - 2.0).collect();
    out.push(below("pearson affine invariance", (pearson(&x, &y)? - pearson(&x, &y2)?).abs(), 1e-12));

    let p = bench.with_pump(0.05).with_cutoff(32);
    let ss = lindblad_steady_state(&p, 1e-8)?;
    let residual = max_abs(&lindblad_rhs(&p, &build_operators(&p)?, ss.rho.as_matrix())?);
    out.push(below("steady-state residual", residual, 1e-10));
    Ok(out)
}
