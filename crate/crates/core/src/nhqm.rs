//! Normalised non-Hermitian evolution.
//!
//! The Hamiltonian is split as `H = H₊ + H₋` with `H₊` Hermitian and `H₋`
//! anti-Hermitian. The flow
//!
//! ```text
//! dρ/dt = i(ρH† − Hρ) + 2iρ·tr(ρH₋)
//! ```
//!
//! is `ρ ↦ e^{−iHt} ρ e^{iH†t}` followed by trace normalisation. Its trace
//! obeys `d tr/dt = s (tr − 1)` with `s = 2i tr(ρH₋)`; the unit-trace manifold
//! is invariant but repelling whenever `s > 0`, which is every lossy state
//! outside the vacuum. Round-off then grows like `e^{st}` and overflows long
//! before `t = 1000`. The time stepper therefore uses the feedback
//! `−tr(L(ρ)) ρ / tr(ρ)` with `L(ρ) = −i(Hρ − ρH†)`: identical on unit-trace
//! states, but it leaves the trace neutral instead of repelling.

use nalgebra::DVector;

use crate::dynamics::{check_dim, finish, frame_hamiltonian, EvolveOptions};
use crate::error::{Error, Result};
use crate::generator::MasterGenerator;
use crate::integrator::{integrate_states, IntegrationSpec, SolverTag, Trajectory};
use crate::quantum::{build_operators, hermitian_flow, CMatrix, DensityMatrix, Frame, OperatorSet, SystemParams, C64};

/// Hermitian / anti-Hermitian parts of the non-Hermitian Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct NhqmSplit {
    pub h_plus: CMatrix,
    pub h_minus: CMatrix,
}

impl NhqmSplit {
    pub fn total(&self) -> CMatrix {
        &self.h_plus + &self.h_minus
    }

    /// `2i tr(ρ H₋)`, the rate fed back by the normalisation term.
    pub fn feedback_rate(&self, rho: &CMatrix) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..rho.ncols() {
            for i in 0..rho.nrows() {
                acc += rho[(i, j)] * self.h_minus[(j, i)];
            }
        }
        acc * C64::new(0.0, 2.0)
    }
}

/// `H₊ = H_JC`, `H₋ = −iκ/2 a†a − iγ_x/2 σ†σ [− iP/2 aa†]` (lab frame).
pub fn build_split(params: &SystemParams, ops: &OperatorSet, include_pump: bool) -> NhqmSplit {
    build_split_in(params, ops, include_pump, Frame::Lab)
}

pub(crate) fn build_split_in(params: &SystemParams, ops: &OperatorSet, include_pump: bool, frame: Frame) -> NhqmSplit {
    let mut loss = ops.num_photons().scale(params.kappa) + ops.num_tls().scale(params.gamma_x);
    if include_pump {
        loss += (&ops.a * &ops.a_dag).scale(params.pump_p);
    }
    NhqmSplit { h_plus: frame_hamiltonian(params, ops, frame), h_minus: loss * C64::new(0.0, -0.5) }
}

fn check_unit_trace(rho: &CMatrix, tol: f64) -> Result<()> {
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > tol {
        return Err(Error::TraceDeviation { trace: tr.re, tol });
    }
    Ok(())
}

/// `H_{H₊}(ρ) + H_{H₋}(ρ) + 2iρ·tr(ρH₋)`, evaluated literally.
pub fn nhqm_rhs(split: &NhqmSplit, rho: &CMatrix) -> Result<CMatrix> {
    check_unit_trace(rho, 1e-9)?;
    let mut out = hermitian_flow(&split.h_plus, rho)?;
    out += hermitian_flow(&split.h_minus, rho)?;
    out += rho * split.feedback_rate(rho);
    Ok(out)
}

/// How the normalisation term is evaluated off the unit-trace manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Feedback {
    /// `2iρ·tr(ρH₋)` as written; unit trace is repelling.
    Literal,
    /// `2iρ·tr(ρH₋)/tr(ρ)`; trace is conserved exactly.
    #[default]
    TraceNeutral,
}

/// Sparse evaluator of the same flow, without the trace precondition.
pub struct NhqmGenerator {
    split: NhqmSplit,
    linear: MasterGenerator,
    feedback: Feedback,
}

impl NhqmGenerator {
    pub fn new(split: NhqmSplit) -> Self {
        Self::with_feedback(split, Feedback::default())
    }

    pub fn with_feedback(split: NhqmSplit, feedback: Feedback) -> Self {
        let linear = MasterGenerator::new(&split.total(), &[]);
        Self { split, linear, feedback }
    }

    pub fn apply_into(&self, rho: &CMatrix, out: &mut CMatrix) {
        self.linear.apply_into(rho, out);
        let mut s = self.split.feedback_rate(rho);
        if self.feedback == Feedback::TraceNeutral {
            s /= rho.trace();
        }
        for (o, r) in out.iter_mut().zip(rho.iter()) {
            *o += r * s;
        }
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = rho.clone();
        self.apply_into(rho, &mut out);
        out
    }

    pub fn split(&self) -> &NhqmSplit {
        &self.split
    }
}

/// Single-excitation elements in the order
/// `[ρ_G0G0, ρ_G1G1, ρ_X0X0, ρ_G1G0, ρ_G1X0, ρ_X0G0]`.
pub type FirstRung = [C64; 6];

/// Closed first-rung equations of the dissipative flow (no pump), lab frame.
///
/// Obtained by restricting the general flow to the support `{G0, G1, X0}`:
///
/// ```text
/// ρ̇_G0G0 = (κρ_G1G1 + γρ_X0X0) ρ_G0G0
/// ρ̇_G1G1 = −ig(ρ_X0G1 − ρ_G1X0) − κρ_G1G1(1 − ρ_G1G1) + γρ_X0X0ρ_G1G1
/// ρ̇_X0X0 = −ig(ρ_G1X0 − ρ_X0G1) − γρ_X0X0(1 − ρ_X0X0) + κρ_G1G1ρ_X0X0
/// ρ̇_G1G0 = [−iω_c − κ/2 + s] ρ_G1G0 − ig ρ_X0G0
/// ρ̇_G1X0 = [−i(ω_c − ω_x) − (κ+γ)/2 + s] ρ_G1X0 − ig(ρ_X0X0 − ρ_G1G1)
/// ρ̇_X0G0 = [−iω_x − γ/2 + s] ρ_X0G0 − ig ρ_G1G0
/// ```
///
/// with `s = κρ_G1G1 + γρ_X0X0`.
pub fn first_rung_rhs(params: &SystemParams, rho: &FirstRung) -> Result<FirstRung> {
    first_rung_impl(params, rho, false)
}

/// Same system with the emitter-population line written as
/// `−γρ_X0X0(1 − ρ_X0X0)ρ_X0X0`, i.e. with an extra `ρ_X0X0` factor.
/// Kept only to quantify how far that form is from the derived one.
pub fn first_rung_rhs_extra_factor(params: &SystemParams, rho: &FirstRung) -> Result<FirstRung> {
    first_rung_impl(params, rho, true)
}

fn first_rung_impl(params: &SystemParams, rho: &FirstRung, extra_factor: bool) -> Result<FirstRung> {
    let [g0g0, g1g1, x0x0, g1g0, g1x0, x0g0] = *rho;
    let pop = g0g0 + g1g1 + x0x0;
    if (pop - C64::new(1.0, 0.0)).norm() > 1e-9 {
        return Err(Error::TraceDeviation { trace: pop.re, tol: 1e-9 });
    }
    let i = C64::i();
    let (g, k, y) = (params.g, params.kappa, params.gamma_x);
    let x0g1 = g1x0.conj();
    let s = g1g1 * k + x0x0 * y;

    let emitter_loss = if extra_factor { x0x0 * (1.0 - x0x0) * x0x0 } else { x0x0 * (1.0 - x0x0) };
    Ok([
        s * g0g0,
        -i * g * (x0g1 - g1x0) - g1g1 * (1.0 - g1g1) * k + x0x0 * g1g1 * y,
        -i * g * (g1x0 - x0g1) - emitter_loss * y + g1g1 * x0x0 * k,
        (-i * params.omega_c - k / 2.0 + s) * g1g0 - i * g * x0g0,
        (-i * (params.omega_c - params.omega_x) - (k + y) / 2.0 + s) * g1x0 - i * g * (x0x0 - g1g1),
        (-i * params.omega_x - y / 2.0 + s) * x0g0 - i * g * g1g0,
    ])
}

/// Options for [`evolve_nhqm_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NhqmOptions {
    pub evolve: EvolveOptions,
    pub include_pump: bool,
    pub feedback: Feedback,
    /// Rescale to unit trace at every sample (debugging aid; hides integrator error).
    pub renormalize: bool,
    /// Largest tolerated trace drift before the run is rejected.
    pub trace_drift_tol: f64,
}

impl Default for NhqmOptions {
    fn default() -> Self {
        Self { evolve: EvolveOptions::default(), include_pump: false, feedback: Feedback::TraceNeutral, renormalize: false, trace_drift_tol: 1e-6 }
    }
}

pub fn evolve_nhqm(params: &SystemParams, rho0: &DensityMatrix, spec: &IntegrationSpec, include_pump: bool) -> Result<Trajectory> {
    evolve_nhqm_with(params, rho0, spec, &NhqmOptions { include_pump, ..Default::default() })
}

pub fn evolve_nhqm_with(
    params: &SystemParams,
    rho0: &DensityMatrix,
    spec: &IntegrationSpec,
    opts: &NhqmOptions,
) -> Result<Trajectory> {
    let ops = build_operators(params)?;
    check_dim(params, rho0)?;
    check_unit_trace(rho0.as_matrix(), 1e-9)?;
    let gen = NhqmGenerator::with_feedback(build_split_in(params, &ops, opts.include_pump, opts.evolve.frame), opts.feedback);
    let rhs = |_: f64, r: &CMatrix, out: &mut CMatrix| gen.apply_into(r, out);

    let states = if opts.renormalize {
        spec.validate()?;
        let mut states = Vec::with_capacity(spec.sample_times.len());
        let mut t0 = spec.t_start;
        let mut current = rho0.as_matrix().clone();
        for &ts in &spec.sample_times {
            if ts > t0 {
                let leg = IntegrationSpec { t_start: t0, t_end: ts, sample_times: vec![ts], ..spec.clone() };
                current = integrate_states(rhs, &current, &leg)?.pop().expect("one sample");
                let tr = current.trace();
                current.unscale_mut(tr.re);
            }
            states.push(current.clone());
            t0 = ts;
        }
        states
    } else {
        integrate_states(rhs, rho0.as_matrix(), spec)?
    };

    for (t, m) in spec.sample_times.iter().zip(&states) {
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > opts.trace_drift_tol {
            return Err(Error::NotConverged(format!(
                "trace drifted to {:.3e} at t = {t}; reduce the step or tolerance",
                tr.re
            )));
        }
    }
    finish(params, &opts.evolve, spec, states, SolverTag::Nhqm)
}

/// Pure-state counterpart: integrate `dψ/dt = −iHψ`, then normalise each sample.
pub fn evolve_nh_schrodinger(
    params: &SystemParams,
    psi0: &DVector<C64>,
    spec: &IntegrationSpec,
    include_pump: bool,
    frame: Frame,
) -> Result<Vec<DensityMatrix>> {
    let ops = build_operators(params)?;
    if psi0.len() != params.dim() {
        return Err(Error::DimensionMismatch { expected: params.dim(), found: psi0.len() });
    }
    let h = build_split_in(params, &ops, include_pump, frame).total() * -C64::i();
    let y0 = CMatrix::from_column_slice(psi0.len(), 1, psi0.as_slice());
    let states = integrate_states(|_, y: &CMatrix, out: &mut CMatrix| out.gemm(C64::new(1.0, 0.0), &h, y, C64::new(0.0, 0.0)), &y0, spec)?;
    let omega = frame.reference_frequency(params.omega_c);
    spec.sample_times
        .iter()
        .zip(states)
        .map(|(&t, y)| {
            let psi = DVector::from_column_slice(y.as_slice());
            let rho = DensityMatrix::pure(&psi)?;
            DensityMatrix::from_matrix(crate::quantum::rotate_to_lab(rho.as_matrix(), omega, t))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, max_abs_diff};
    use crate::quantum::BasisIndex;

    fn bench() -> (SystemParams, OperatorSet) {
        let p = SystemParams::resonant_benchmark();
        let ops = build_operators(&p).unwrap();
        (p, ops)
    }

    #[test]
    fn dissipative_split_is_diagonal() {
        let (p, ops) = bench();
        let s = build_split(&p, &ops, false);
        let expect = [0.0, p.gamma_x / 2.0, p.kappa / 2.0, (p.kappa + p.gamma_x) / 2.0];
        for (i, e) in expect.iter().enumerate() {
            assert!((s.h_minus[(i, i)] - C64::new(0.0, -e)).norm() < 1e-15);
        }
        assert!(max_abs(&(&s.h_minus + s.h_minus.adjoint())) == 0.0);
        assert!(max_abs(&(&s.h_plus - s.h_plus.adjoint())) == 0.0);
    }

    #[test]
    fn lossless_split_vanishes() {
        let mut p = SystemParams::resonant_benchmark();
        p.kappa = 0.0;
        p.gamma_x = 0.0;
        let ops = build_operators(&p).unwrap();
        assert_eq!(max_abs(&build_split(&p, &ops, true).h_minus), 0.0);
    }

    #[test]
    fn pump_term_uses_truncated_commutator() {
        let p = SystemParams::resonant_benchmark().with_pump(0.04).with_cutoff(3);
        let ops = build_operators(&p).unwrap();
        let with = build_split(&p, &ops, true).h_minus;
        let without = build_split(&p, &ops, false).h_minus;
        let id = CMatrix::identity(8, 8);
        let aad = ops.num_photons() + id - ops.top_fock_projector().scale(4.0);
        let expect = &without + aad * C64::new(0.0, -p.pump_p / 2.0);
        assert!(max_abs_diff(&with, &expect) < 1e-15);
    }

    #[test]
    fn vacuum_is_fixed() {
        let (p, ops) = bench();
        let g0 = DensityMatrix::projector(BasisIndex::g(0), 1).unwrap();
        let out = nhqm_rhs(&build_split(&p, &ops, false), g0.as_matrix()).unwrap();
        assert_eq!(max_abs(&out), 0.0);
    }

    #[test]
    fn non_unit_trace_rejected() {
        let (p, ops) = bench();
        let half = DensityMatrix::maximally_mixed(1).into_matrix().scale(0.5);
        assert!(matches!(nhqm_rhs(&build_split(&p, &ops, false), &half), Err(Error::TraceDeviation { .. })));
    }

    #[test]
    fn first_rung_fixed_point_and_single_photon() {
        let p = SystemParams::resonant_benchmark();
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        assert!(first_rung_rhs(&p, &[one, z, z, z, z, z]).unwrap().iter().all(|v| v.norm() == 0.0));
        let d = first_rung_rhs(&p, &[z, one, z, z, z, z]).unwrap();
        assert_eq!(d[0].norm(), 0.0);
        assert_eq!(d[1].norm(), 0.0);
        // coherence seeded by −ig(ρ_X0X0 − ρ_G1G1) = +ig
        assert!((d[4] - C64::new(0.0, p.g)).norm() < 1e-15);
        assert!(first_rung_rhs(&p, &[one, one, z, z, z, z]).is_err());
    }

    #[test]
    fn generator_matches_reference() {
        let p = SystemParams::resonant_benchmark().with_pump(0.05).with_cutoff(2);
        let ops = build_operators(&p).unwrap();
        let split = build_split(&p, &ops, true);
        let rho = DensityMatrix::alpha_superposition(0.4, 2).unwrap().into_matrix();
        let gen = NhqmGenerator::new(split.clone());
        assert!(max_abs_diff(&gen.apply(&rho), &nhqm_rhs(&split, &rho).unwrap()) < 1e-12);
    }

    #[test]
    fn literal_feedback_loses_the_trace() {
        let p = SystemParams::resonant_benchmark();
        let rho0 = DensityMatrix::alpha_mixture(0.0, 1).unwrap();
        let spec = IntegrationSpec::adaptive(1000.0, 11);
        let opts = NhqmOptions { feedback: Feedback::Literal, ..Default::default() };
        assert!(evolve_nhqm_with(&p, &rho0, &spec, &opts).is_err());
        let neutral = evolve_nhqm(&p, &rho0, &spec, false).unwrap();
        assert!((neutral.last().trace().re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn renormalized_run_matches_plain() {
        let p = SystemParams::resonant_benchmark();
        let rho0 = DensityMatrix::alpha_mixture(0.2, 1).unwrap();
        let spec = IntegrationSpec::adaptive(20.0, 11);
        let plain = evolve_nhqm(&p, &rho0, &spec, false).unwrap();
        let opts = NhqmOptions { renormalize: true, ..Default::default() };
        let renorm = evolve_nhqm_with(&p, &rho0, &spec, &opts).unwrap();
        assert!(plain.max_abs_diff(&renorm).unwrap() < 1e-8);
    }
}
