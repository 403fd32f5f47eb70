// The normalised non-Hermitian flow against Lindblad from |G1>: the
// populations drift apart because NHQM never feeds the vacuum.

use jcladder::integrator::{IntegrationSpec, Part};
use jcladder::lindblad::evolve_lindblad;
use jcladder::metrics::trajectory_correlation;
use jcladder::nhqm::evolve_nhqm;
use jcladder::quantum::{BasisIndex, DensityMatrix, SystemParams};

pub struct NhqmReport {
    pub g1g1_correlation: f64,
    pub max_deviation: f64,
}

pub fn run_example() -> jcladder::Result<NhqmReport> {
    let p = SystemParams::resonant_benchmark();
    let rho0 = DensityMatrix::alpha_mixture(0.0, p.n_max_photons)?;
    let spec = IntegrationSpec::adaptive(1000.0, 2001);
    let lind = evolve_lindblad(&p, &rho0, &spec)?;
    let nhqm = evolve_nhqm(&p, &rho0, &spec, false)?;
    let g1 = BasisIndex::g(1);
    let r = trajectory_correlation(&nhqm, &lind, (g1, g1), Part::Real)?;
    let dev = nhqm.max_abs_diff(&lind)?;
    for k in [0, 200, 1000, 2000] {
        println!(
            "t = {:>6.1}  G1G1 lindblad {:.6}  nhqm {:.6}",
            lind.times[k],
            lind.states[k].population(g1),
            nhqm.states[k].population(g1)
        );
    }
    println!("pearson(G1G1) = {r:.6}, max entrywise deviation {dev:.3e}");
    Ok(NhqmReport { g1g1_correlation: r, max_deviation: dev })
}

#[allow(dead_code)]
fn main() -> jcladder::Result<()> {
    run_example().map(|_| ())
}
