// Five-point correlation sweep from `configs/fig1_small.toml`, written as CSV.

use std::path::PathBuf;

use jcladder::scenarios::{emit_outputs, run_fig1, Fig1Result, ResultTable, ScenarioConfig};

pub fn run_example() -> jcladder::Result<Fig1Result> {
    let path = PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/fig1_small.toml"));
    let cfg = ScenarioConfig::load(&path)?;
    let result = run_fig1(&cfg)?;
    for row in result.rows.iter().filter(|r| r.element.part == jcladder::integrator::Part::Real) {
        let value = row.correlation.map_or_else(|| "-".to_string(), |c| format!("{c:.10}"));
        println!("alpha {:.2}  {:<8} {:<20} {value}  {}", row.alpha, row.element.label(), row.pair_label(), row.status);
    }
    let out = std::env::temp_dir().join("jcladder_fig1_small");
    let emitted = emit_outputs(&ResultTable::Fig1(&result), &cfg, &out, 0.0)?;
    println!("wrote {} files under {}", emitted.files.len(), out.display());
    Ok(result)
}

#[allow(dead_code)]
fn main() -> jcladder::Result<()> {
    run_example().map(|_| ())
}
