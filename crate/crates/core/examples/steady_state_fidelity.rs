// Steady states of the three flows at one pump rate and their fidelity to
// the Lindblad state.

use jcladder::metrics::fidelity;
use jcladder::quantum::{BasisIndex, SystemParams};
use jcladder::steady_state::{
    lindblad_steady_state_converged, nheh_steady_state, nhqm_relaxed_states, CutoffSearch, RelaxOptions,
};
use jcladder::nheh::Correction;

pub struct FidelityReport {
    pub cutoff: usize,
    pub mean_photons: f64,
    pub nheh_fidelity: f64,
    pub nhqm_fidelity: f64,
    pub lindblad_vacuum: f64,
}

pub fn run_example() -> jcladder::Result<FidelityReport> {
    let p = SystemParams::resonant_benchmark().with_pump(0.05);
    let lind = lindblad_steady_state_converged(&p, &CutoffSearch::default())?;
    for (n, photons) in &lind.history {
        println!("cutoff {n:>4}: <n> = {photons:.12}");
    }
    let p = p.with_cutoff(lind.n_max_photons);
    let rho_l = &lind.state.rho;
    let nheh = nheh_steady_state(&p, Correction::FullRate, &RelaxOptions::default())?;
    let nhqm = nhqm_relaxed_states(&p, true, &RelaxOptions::default())?;
    let nheh_fidelity = fidelity(&nheh.rho, rho_l)?;
    let nhqm_fidelity = fidelity(&nhqm[0].rho, rho_l)?;
    let lindblad_vacuum = rho_l.population(BasisIndex::g(0));
    println!("F(nheh, lindblad) = {nheh_fidelity:.12}");
    println!("F(nhqm, lindblad) = {nhqm_fidelity:.12}  (<G0|rho|G0> = {lindblad_vacuum:.12})");
    Ok(FidelityReport {
        cutoff: lind.n_max_photons,
        mean_photons: rho_l.mean_photon_number(),
        nheh_fidelity,
        nhqm_fidelity,
        lindblad_vacuum,
    })
}

#[allow(dead_code)]
fn main() -> jcladder::Result<()> {
    run_example().map(|_| ())
}
