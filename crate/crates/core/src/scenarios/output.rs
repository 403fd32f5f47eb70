//! CSV and manifest emission. Floats are written as `{:.14e}` (15 significant
//! digits), missing values as empty fields, so reruns are byte-identical.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::fig1::{Fig1Result, Timeseries};
use super::fig2::Fig2Result;
use super::single::{EvolveResult, SteadyResult};
use super::ScenarioConfig;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermitian_part, max_abs};
use crate::steady_state::FixedPointReport;

pub enum ResultTable<'a> {
    Fig1(&'a Fig1Result),
    Fig2(&'a Fig2Result),
    Evolve(&'a EvolveResult),
    Steady(&'a SteadyResult),
}

/// Paths written by [`emit_outputs`], manifest last.
#[derive(Debug, Clone, PartialEq)]
pub struct Emitted {
    pub files: Vec<PathBuf>,
}

pub fn fmt_float(x: f64) -> String {
    format!("{x:.14e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

fn opt_usize(x: Option<usize>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

struct Csv {
    path: PathBuf,
    writer: csv::Writer<Vec<u8>>,
}

impl Csv {
    fn new(dir: &Path, name: &str, header: &[&str]) -> Result<Self> {
        let mut c = Self { path: dir.join(name), writer: csv::Writer::from_writer(Vec::new()) };
        c.row(header.iter().map(|s| s.to_string()))?;
        Ok(c)
    }

    fn row(&mut self, fields: impl IntoIterator<Item = String>) -> Result<()> {
        self.writer
            .write_record(fields.into_iter().collect::<Vec<_>>())
            .map_err(|e| Error::io(&self.path, std::io::Error::other(e)))
    }

    fn finish(self, files: &mut Vec<PathBuf>) -> Result<()> {
        let bytes = self.writer.into_inner().map_err(|e| Error::io(&self.path, std::io::Error::other(e.to_string())))?;
        fs::write(&self.path, bytes).map_err(|e| Error::io(&self.path, e))?;
        files.push(self.path);
        Ok(())
    }
}

fn write_timeseries(dir: &Path, name: &str, ts: &Timeseries, files: &mut Vec<PathBuf>) -> Result<()> {
    let mut header = vec!["t".to_string()];
    header.extend(ts.columns.iter().map(|(n, _)| n.clone()));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = Csv::new(dir, name, &header_refs)?;
    for (k, &t) in ts.times.iter().enumerate() {
        csv.row(std::iter::once(fmt_float(t)).chain(ts.columns.iter().map(|(_, v)| fmt_float(v[k]))))?;
    }
    csv.finish(files)
}

fn write_fixed_points(dir: &Path, report: &FixedPointReport, files: &mut Vec<PathBuf>) -> Result<()> {
    let mut csv = Csv::new(
        dir,
        "fixed_points.csv",
        &[
            "index",
            "rank",
            "residual",
            "growth_rate",
            "failed_checks",
            "physical",
            "selected",
            "rho_G0G0_re",
            "rho_G0G0_im",
            "hermiticity_error",
            "min_eigenvalue",
        ],
    )?;
    for (k, c) in report.candidates.iter().enumerate() {
        let failed: Vec<String> = c
            .failed
            .iter()
            .map(|f| serde_json::to_value(f).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default())
            .collect();
        let min_eig = hermitian_eigenvalues(&hermitian_part(&c.rho)).into_iter().fold(f64::INFINITY, f64::min);
        csv.row([
            k.to_string(),
            c.rank.to_string(),
            fmt_float(c.residual),
            fmt_float(c.growth_rate),
            failed.join(";"),
            c.is_physical().to_string(),
            (report.selected == Some(k)).to_string(),
            fmt_float(c.rho[(0, 0)].re),
            fmt_float(c.rho[(0, 0)].im),
            fmt_float(max_abs(&(&c.rho - c.rho.adjoint()))),
            fmt_float(min_eig),
        ])?;
    }
    csv.finish(files)
}

/// Write the CSVs for `table` plus `manifest.json` into `dir` (created if missing).
pub fn emit_outputs(table: &ResultTable<'_>, cfg: &ScenarioConfig, dir: &Path, wall_time_s: f64) -> Result<Emitted> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    let mut summary = serde_json::Map::new();
    match table {
        ResultTable::Fig1(r) => {
            let mut csv = Csv::new(dir, "fig1_correlations.csv", &["alpha", "element", "part", "solver_pair", "correlation", "status"])?;
            for row in &r.rows {
                csv.row([
                    fmt_float(row.alpha),
                    format!("{}{}", row.element.row, row.element.col),
                    row.element.part.to_string(),
                    row.pair_label(),
                    opt(row.correlation),
                    row.status.to_string(),
                ])?;
            }
            csv.finish(&mut files)?;
            if let Some(ts) = &r.timeseries {
                write_timeseries(dir, &format!("fig1_timeseries_alpha{}.csv", ts.alpha), ts, &mut files)?;
            }
            summary.insert("rows".into(), json!(r.rows.len()));
        }
        ResultTable::Fig2(r) => {
            let mut csv = Csv::new(dir, "fig2_fidelity.csv", &["pump_over_g", "method", "fidelity", "residual", "status"])?;
            for row in &r.rows {
                csv.row([
                    fmt_float(row.pump),
                    row.method.to_string(),
                    opt(row.fidelity),
                    opt(row.residual),
                    row.status.to_string(),
                ])?;
            }
            csv.finish(&mut files)?;
            let mut csv = Csv::new(
                dir,
                "fig2_states.csv",
                &["pump_over_g", "method", "cutoff", "mean_photon_number", "vacuum_population", "distance_to_vacuum", "relax_time"],
            )?;
            for row in &r.rows {
                csv.row([
                    fmt_float(row.pump),
                    row.method.to_string(),
                    opt_usize(row.cutoff),
                    opt(row.mean_photon_number),
                    opt(row.vacuum_population),
                    opt(row.distance_to_vacuum),
                    opt(row.relax_time),
                ])?;
            }
            csv.finish(&mut files)?;
            summary.insert("rows".into(), json!(r.rows.len()));
        }
        ResultTable::Evolve(r) => {
            write_timeseries(dir, "evolve_timeseries.csv", &r.table, &mut files)?;
            summary.insert("samples".into(), json!(r.table.times.len()));
        }
        ResultTable::Steady(r) => {
            let mut csv = Csv::new(
                dir,
                "steady_state.csv",
                &["method", "cutoff", "fidelity", "residual", "mean_photon_number", "vacuum_population", "status"],
            )?;
            for row in &r.rows {
                csv.row([
                    row.method.to_string(),
                    row.cutoff.to_string(),
                    opt(row.fidelity),
                    opt(row.residual),
                    opt(row.mean_photon_number),
                    opt(row.vacuum_population),
                    row.status.to_string(),
                ])?;
            }
            csv.finish(&mut files)?;
            if let Some(fp) = &r.fixed_points {
                write_fixed_points(dir, fp, &mut files)?;
                summary.insert(
                    "fixed_points".into(),
                    json!({
                        "n_max_photons": fp.n_max_photons,
                        "total": fp.candidates.len(),
                        "rank_one": fp.rank_one_count(),
                        "density_like": fp.density_like_count(),
                        "physical": fp.physical_count(),
                        "selected": fp.selected,
                    }),
                );
            }
        }
    }

    let manifest = json!({
        "scenario": cfg.name,
        "crate": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": serde_json::to_value(cfg).map_err(|e| Error::Config(e.to_string()))?,
        "integration": {
            "method": cfg.integration.method,
            "tol_or_dt": cfg.integration.tol,
            "samples": cfg.integration.samples,
            "t_end": cfg.integration.t_end,
        },
        "threads": super::worker_threads(),
        "wall_time_s": wall_time_s,
        "files": files.iter().map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned())).collect::<Vec<_>>(),
        "summary": summary,
    });
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    files.push(path);
    Ok(Emitted { files })
}
