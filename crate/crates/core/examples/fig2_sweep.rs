// Five-point steady-state fidelity sweep from `configs/fig2_small.toml`.

use std::path::PathBuf;

use jcladder::scenarios::{emit_outputs, run_fig2, Fig2Result, ResultTable, ScenarioConfig};

pub fn run_example() -> jcladder::Result<Fig2Result> {
    let path = PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/fig2_small.toml"));
    let cfg = ScenarioConfig::load(&path)?;
    let result = run_fig2(&cfg)?;
    for row in &result.rows {
        let f = row.fidelity.map_or_else(|| "-".to_string(), |f| format!("{f:.12}"));
        println!("P {:.2}  {:<8} F = {f}  cutoff {:?}  {}", row.pump, row.method.to_string(), row.cutoff, row.status);
    }
    let out = std::env::temp_dir().join("jcladder_fig2_small");
    emit_outputs(&ResultTable::Fig2(&result), &cfg, &out, 0.0)?;
    Ok(result)
}

#[allow(dead_code)]
fn main() -> jcladder::Result<()> {
    run_example().map(|_| ())
}
