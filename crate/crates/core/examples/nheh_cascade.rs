// Corrected NHEH evolution by excitation cohorts, unpumped (top-down) and
// pumped (joint), against Lindblad.

use jcladder::integrator::IntegrationSpec;
use jcladder::lindblad::evolve_lindblad;
use jcladder::nheh::{evolve_nheh_with, NhehOptions, RungLayout, Schedule};
use jcladder::quantum::{DensityMatrix, SystemParams};

pub struct CascadeReport {
    pub unpumped_gap: f64,
    pub pumped_gap: f64,
}

pub fn run_example() -> jcladder::Result<CascadeReport> {
    let spec = IntegrationSpec::adaptive(300.0, 301);

    let p = SystemParams::resonant_benchmark().with_cutoff(3);
    let rho0 = DensityMatrix::alpha_superposition(0.4, 3)?;
    let mut opts = NhehOptions::for_params(&p);
    opts.schedule = Schedule::TopDown;
    let nh = evolve_nheh_with(&p, &rho0, &spec, &RungLayout::for_cutoff(3), &opts)?;
    let unpumped_gap = nh.max_abs_diff(&evolve_lindblad(&p, &rho0, &spec)?)?;
    println!("P = 0, top-down cohorts: max |nheh - lindblad| = {unpumped_gap:.3e}");

    let p = SystemParams::resonant_benchmark().with_pump(0.03).with_cutoff(24);
    let rho0 = DensityMatrix::alpha_superposition(0.4, 24)?;
    let opts = NhehOptions::for_params(&p);
    let nh = evolve_nheh_with(&p, &rho0, &spec, &RungLayout::for_cutoff(24), &opts)?;
    let pumped_gap = nh.max_abs_diff(&evolve_lindblad(&p, &rho0, &spec)?)?;
    println!("P = 0.03 g, {:?} schedule: max |nheh - lindblad| = {pumped_gap:.3e}", opts.schedule);
    Ok(CascadeReport { unpumped_gap, pumped_gap })
}

#[allow(dead_code)]
fn main() -> jcladder::Result<()> {
    run_example().map(|_| ())
}
