//! Lindblad master equation with cavity loss, emitter decay and incoherent pump.

use crate::dynamics::{check_dim, finish, frame_hamiltonian, EvolveOptions};
use crate::error::Result;
use crate::generator::MasterGenerator;
use crate::integrator::{integrate_states, IntegrationSpec, SolverTag, Trajectory};
use crate::quantum::{
    build_operators, hermitian_flow, lindblad_dissipator, CMatrix, DensityMatrix, Frame, OperatorSet, SystemParams, C64,
};

/// `H_{H_JC}(ρ) + κ/2 L_a(ρ) + γ_x/2 L_σ(ρ) + P/2 L_{a†}(ρ)`, evaluated literally.
///
/// Dense reference implementation; the time stepper uses [`lindblad_generator`].
pub fn lindblad_rhs(params: &SystemParams, ops: &OperatorSet, rho: &CMatrix) -> Result<CMatrix> {
    // small terms first, so the O(ω) commutator is rounded once
    let mut diss = lindblad_dissipator(&ops.a, rho)?.scale(params.kappa / 2.0);
    diss += lindblad_dissipator(&ops.sigma, rho)?.scale(params.gamma_x / 2.0);
    diss += lindblad_dissipator(&ops.a_dag, rho)?.scale(params.pump_p / 2.0);
    Ok(hermitian_flow(&ops.h_jc, rho)? + diss)
}

/// Effective non-Hermitian Hamiltonian `H − (i/2) Σ r L†L` in the given frame.
pub(crate) fn effective_hamiltonian(params: &SystemParams, ops: &OperatorSet, frame: Frame) -> CMatrix {
    let h = frame_hamiltonian(params, ops, frame);
    let aad = &ops.a * &ops.a_dag;
    let decay = ops.num_photons().scale(params.kappa) + ops.num_tls().scale(params.gamma_x) + aad.scale(params.pump_p);
    h - decay * C64::new(0.0, 0.5)
}

/// Sparse form of [`lindblad_rhs`] (in `frame`).
pub fn lindblad_generator(params: &SystemParams, ops: &OperatorSet, frame: Frame) -> MasterGenerator {
    let k = effective_hamiltonian(params, ops, frame);
    MasterGenerator::new(
        &k,
        &[(params.kappa, &ops.a), (params.gamma_x, &ops.sigma), (params.pump_p, &ops.a_dag)],
    )
}

pub fn evolve_lindblad(params: &SystemParams, rho0: &DensityMatrix, spec: &IntegrationSpec) -> Result<Trajectory> {
    evolve_lindblad_with(params, rho0, spec, &EvolveOptions::default())
}

pub fn evolve_lindblad_with(
    params: &SystemParams,
    rho0: &DensityMatrix,
    spec: &IntegrationSpec,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let ops = build_operators(params)?;
    check_dim(params, rho0)?;
    let gen = lindblad_generator(params, &ops, opts.frame);
    let states = integrate_states(|_, r: &CMatrix, out: &mut CMatrix| gen.apply_into(r, out), rho0.as_matrix(), spec)?;
    finish(params, opts, spec, states, SolverTag::Lindblad)
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
    fn vacuum_is_fixed() {
        let (p, ops) = bench();
        let g0 = DensityMatrix::projector(BasisIndex::g(0), 1).unwrap();
        assert_eq!(max_abs(&lindblad_rhs(&p, &ops, g0.as_matrix()).unwrap()), 0.0);
    }

    #[test]
    fn single_photon_expansion() {
        let (p, ops) = bench();
        let g1 = DensityMatrix::projector(BasisIndex::g(1), 1).unwrap();
        let out = lindblad_rhs(&p, &ops, g1.as_matrix()).unwrap();
        let (g0i, g1i, x0i) = (BasisIndex::g(0).flat(), BasisIndex::g(1).flat(), BasisIndex::x(0).flat());
        assert!((out[(g0i, g0i)] - C64::new(p.kappa, 0.0)).norm() < 1e-15);
        assert!((out[(g1i, g1i)] - C64::new(-p.kappa, 0.0)).norm() < 1e-15);
        // i(ρH − Hρ): ⟨X0|·|G1⟩ = −ig, ⟨G1|·|X0⟩ = +ig
        assert!((out[(x0i, g1i)] - C64::new(0.0, -p.g)).norm() < 1e-15);
        assert!((out[(g1i, x0i)] - C64::new(0.0, p.g)).norm() < 1e-15);
    }

    #[test]
    fn generator_matches_reference_in_lab_frame() {
        let p = SystemParams::resonant_benchmark().with_pump(0.03).with_cutoff(3);
        let ops = build_operators(&p).unwrap();
        let rho = CMatrix::from_fn(8, 8, |i, j| C64::new((i * 3 + j) as f64 * 0.01, (i as f64 - j as f64) * 0.02));
        let gen = lindblad_generator(&p, &ops, Frame::Lab);
        let diff = max_abs_diff(&gen.apply(&rho), &lindblad_rhs(&p, &ops, &rho).unwrap());
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn frames_agree() {
        let p = SystemParams::resonant_benchmark();
        let rho0 = DensityMatrix::alpha_superposition(0.3, 1).unwrap();
        let spec = IntegrationSpec::adaptive(2.0, 5);
        let rot = evolve_lindblad(&p, &rho0, &spec).unwrap();
        let lab_opts = EvolveOptions { frame: Frame::Lab, ..Default::default() };
        let lab = evolve_lindblad_with(&p, &rho0, &spec, &lab_opts).unwrap();
        assert!(rot.max_abs_diff(&lab).unwrap() < 1e-7);
    }

    #[test]
    fn cutoff_violation_is_reported() {
        let p = SystemParams::resonant_benchmark().with_pump(0.09).with_cutoff(2);
        let rho0 = DensityMatrix::projector(BasisIndex::g(0), 2).unwrap();
        let spec = IntegrationSpec::adaptive(200.0, 11);
        let err = evolve_lindblad(&p, &rho0, &spec).unwrap_err();
        assert!(matches!(err, crate::Error::CutoffViolation { .. }), "{err}");
    }
}
