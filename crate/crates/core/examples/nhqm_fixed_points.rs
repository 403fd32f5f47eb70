// Fixed points of the pumped NHQM flow on {G0, G1, X0} and the filter that
// singles out the physical one.

use jcladder::quantum::SystemParams;
use jcladder::steady_state::{first_rung_support, nhqm_fixed_points_with, default_seeds, FixedPointReport, FixedPointSearch};

pub fn run_example() -> jcladder::Result<FixedPointReport> {
    let p = SystemParams::resonant_benchmark().with_pump(0.05);
    let opts = FixedPointSearch { support: Some(first_rung_support()), ..Default::default() };
    let seeds = default_seeds(3, 64, opts.rng_seed);
    let report = nhqm_fixed_points_with(&p, &seeds, &opts)?;
    println!(
        "{} fixed points: {} rank one, {} density-like, {} physical",
        report.candidates.len(),
        report.rank_one_count(),
        report.density_like_count(),
        report.physical_count()
    );
    for c in report.candidates.iter().filter(|c| c.rank == 1) {
        println!("  rank one, growth {:+.4e}, failed {:?}", c.growth_rate, c.failed);
    }
    if let Some(k) = report.selected {
        println!("selected: candidate {k}, G0G0 = {:.12}", report.candidates[k].rho[(0, 0)].re);
    }
    Ok(report)
}

#[allow(dead_code)]
fn main() -> jcladder::Result<()> {
    run_example().map(|_| ())
}
