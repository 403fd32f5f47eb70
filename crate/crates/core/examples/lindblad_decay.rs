// Vacuum Rabi oscillation of |G1> decaying under the Lindblad master equation.

use jcladder::checks::trajectory_invariants;
use jcladder::integrator::IntegrationSpec;
use jcladder::lindblad::evolve_lindblad;
use jcladder::quantum::{BasisIndex, DensityMatrix, SystemParams};

pub struct DecayReport {
    pub trace_drift: f64,
    pub hermiticity: f64,
    pub min_eigenvalue: f64,
    pub final_vacuum: f64,
}

pub fn run_example() -> jcladder::Result<DecayReport> {
    let p = SystemParams::resonant_benchmark();
    let rho0 = DensityMatrix::projector(BasisIndex::g(1), p.n_max_photons)?;
    let traj = evolve_lindblad(&p, &rho0, &IntegrationSpec::adaptive(200.0, 201))?;
    println!("{:>6}  {:>10}  {:>10}  {:>10}", "t", "G0G0", "G1G1", "X0X0");
    for k in (0..traj.times.len()).step_by(20) {
        let s = &traj.states[k];
        println!(
            "{:>6.1}  {:>10.6}  {:>10.6}  {:>10.6}",
            traj.times[k],
            s.population(BasisIndex::g(0)),
            s.population(BasisIndex::g(1)),
            s.population(BasisIndex::x(0))
        );
    }
    let (trace_drift, hermiticity, min_eigenvalue) = trajectory_invariants(&traj.states);
    let final_vacuum = traj.last().population(BasisIndex::g(0));
    println!("trace drift {trace_drift:.2e}, hermiticity {hermiticity:.2e}, min eigenvalue {min_eigenvalue:.2e}");
    Ok(DecayReport { trace_drift, hermiticity, min_eigenvalue, final_vacuum })
}

#[allow(dead_code)]
fn main() -> jcladder::Result<()> {
    run_example().map(|_| ())
}
