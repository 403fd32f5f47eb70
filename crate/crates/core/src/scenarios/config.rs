//! Declarative scenario files.
//!
//! A scenario is a TOML document. Top-level keys: `name`, `solvers`,
//! `outputs`. Tables: `[params]` (a [`SystemParams`]), `[sweep]` holding
//! exactly one of `alpha_grid` or `pump_grid`, `[integration]`, `[options]`,
//! and any number of `[[tracked]]` entries with `row`, `col`, `part`.
//! Omitted tables take the defaults below. See `configs/` for complete files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{IntegrationSpec, Method, Part, SolverTag};
use crate::nheh::{Correction, Schedule};
use crate::quantum::{BasisIndex, DensityMatrix, SystemParams};
use crate::steady_state::{CutoffSearch, RelaxOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    AlphaGrid(Vec<f64>),
    PumpGrid(Vec<f64>),
}

impl Sweep {
    pub fn values(&self) -> &[f64] {
        match self {
            Sweep::AlphaGrid(v) | Sweep::PumpGrid(v) => v,
        }
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive, snapped to multiples
/// of `1e-12` so that grids like `0.03` equal their decimal literals.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let snap = |x: f64| (x * 1e12).round() / 1e12;
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| snap(lo + (hi - lo) * k as f64 / (n - 1) as f64)).collect(),
    }
}

/// Compact form of an [`IntegrationSpec`] on `[0, t_end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegrationConfig {
    pub t_end: f64,
    pub samples: usize,
    pub method: Method,
    /// Local error tolerance for `rk45`, step size for `rk4`.
    pub tol: f64,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self { t_end: 1000.0, samples: 2001, method: Method::Rk45Adaptive, tol: 1e-10 }
    }
}

impl IntegrationConfig {
    pub fn spec(&self) -> IntegrationSpec {
        IntegrationSpec::uniform(0.0, self.t_end, self.samples, self.method, self.tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackedElement {
    pub row: BasisIndex,
    pub col: BasisIndex,
    pub part: Part,
}

impl TrackedElement {
    pub fn new(row: BasisIndex, col: BasisIndex, part: Part) -> Self {
        Self { row, col, part }
    }

    /// `re_X0G1` style label.
    pub fn label(&self) -> String {
        let p = match self.part {
            Part::Real => "re",
            Part::Imag => "im",
            Part::Abs => "abs",
        };
        format!("{p}_{}{}", self.row, self.col)
    }
}

/// Initial state for `evolve` scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// `α|G0⟩⟨G0| + (1−α)|G1⟩⟨G1|`
    AlphaMixture(f64),
    /// `(√α|G0⟩ + √(1−α)|G1⟩)(h.c.)`
    AlphaSuperposition(f64),
    Basis(BasisIndex),
}

impl InitialState {
    pub fn build(&self, n_max_photons: usize) -> Result<DensityMatrix> {
        match *self {
            InitialState::AlphaMixture(a) => DensityMatrix::alpha_mixture(a, n_max_photons),
            InitialState::AlphaSuperposition(a) => DensityMatrix::alpha_superposition(a, n_max_photons),
            InitialState::Basis(b) => DensityMatrix::projector(b, n_max_photons),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunOptions {
    /// Keep the gain term in the anti-Hermitian part of the NHQM Hamiltonian.
    pub nhqm_include_pump: bool,
    /// `None` picks top-down without pump and the joint solve with it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nheh_schedule: Option<Schedule>,
    pub nheh_correction: Correction,
    /// Where the fig1 time-series file is taken.
    pub timeseries_alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialState>,
    pub cutoff_search: CutoffSearch,
    pub relax: RelaxOptions,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            nhqm_include_pump: true,
            nheh_schedule: None,
            nheh_correction: Correction::FullRate,
            timeseries_alpha: 0.0,
            initial: None,
            cutoff_search: CutoffSearch::default(),
            relax: RelaxOptions::default(),
        }
    }
}

fn default_outputs() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub solvers: Vec<SolverTag>,
    #[serde(default = "default_outputs")]
    pub outputs: PathBuf,
    pub params: SystemParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub integration: IntegrationConfig,
    #[serde(default)]
    pub options: RunOptions,
    #[serde(default)]
    pub tracked: Vec<TrackedElement>,
}

/// Populations and the two coherences compared in the correlation sweep;
/// coherences in all three parts.
pub fn fig1_elements() -> Vec<TrackedElement> {
    use BasisIndex as B;
    let mut v = vec![
        TrackedElement::new(B::x(0), B::x(0), Part::Real),
        TrackedElement::new(B::g(1), B::g(1), Part::Real),
        TrackedElement::new(B::g(0), B::g(0), Part::Real),
    ];
    for (r, c) in [(B::x(0), B::g(1)), (B::g(0), B::g(1))] {
        for p in [Part::Real, Part::Imag, Part::Abs] {
            v.push(TrackedElement::new(r, c, p));
        }
    }
    v
}

/// Series written to the fig1 time-series file.
pub fn fig1_timeseries_elements() -> Vec<TrackedElement> {
    use BasisIndex as B;
    vec![
        TrackedElement::new(B::x(0), B::g(1), Part::Imag),
        TrackedElement::new(B::g(1), B::g(0), Part::Imag),
        TrackedElement::new(B::g(0), B::g(0), Part::Real),
        TrackedElement::new(B::g(1), B::g(1), Part::Real),
        TrackedElement::new(B::x(0), B::x(0), Part::Real),
    ]
}

impl ScenarioConfig {
    /// 101 values of α on the resonant benchmark, to `t = 1000`.
    pub fn fig1_default() -> Self {
        Self {
            name: "fig1".into(),
            solvers: vec![SolverTag::Lindblad, SolverTag::Nhqm, SolverTag::Nheh],
            outputs: default_outputs(),
            params: SystemParams::resonant_benchmark(),
            sweep: Some(Sweep::AlphaGrid(uniform_grid(0.0, 1.0, 101))),
            integration: IntegrationConfig::default(),
            options: RunOptions::default(),
            tracked: fig1_elements(),
        }
    }

    /// Ten pump rates from 0 to `0.09 g`.
    pub fn fig2_default() -> Self {
        Self {
            name: "fig2".into(),
            sweep: Some(Sweep::PumpGrid(uniform_grid(0.0, 0.09, 10))),
            tracked: Vec::new(),
            ..Self::fig1_default()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.solvers.is_empty() {
            return Err(Error::Config("no solvers selected".into()));
        }
        self.params.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.integration.spec().validate().map_err(|e| Error::Config(e.to_string()))?;
        if let Some(sweep) = &self.sweep {
            let v = sweep.values();
            if v.is_empty() {
                return Err(Error::Config("sweep grid is empty".into()));
            }
            if v.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::Config("sweep grid must be strictly increasing".into()));
            }
            match sweep {
                Sweep::AlphaGrid(_) => {
                    if v.iter().any(|a| !(0.0..=1.0).contains(a)) {
                        return Err(Error::Config("alpha values must lie in [0, 1]".into()));
                    }
                }
                Sweep::PumpGrid(_) => {
                    if v.iter().any(|&p| !(p >= 0.0 && p < self.params.kappa)) {
                        return Err(Error::Config(format!("pump values must lie in [0, kappa = {})", self.params.kappa)));
                    }
                }
            }
        }
        for t in &self.tracked {
            for b in [t.row, t.col] {
                b.check_in(self.params.n_max_photons).map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        Ok(())
    }

    pub(crate) fn require_sweep(&self, alpha: bool) -> Result<&[f64]> {
        match (&self.sweep, alpha) {
            (Some(Sweep::AlphaGrid(v)), true) | (Some(Sweep::PumpGrid(v)), false) => Ok(v),
            _ => Err(Error::Config(format!(
                "scenario {:?} needs a [sweep] {} table",
                self.name,
                if alpha { "alpha_grid" } else { "pump_grid" }
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        for cfg in [ScenarioConfig::fig1_default(), ScenarioConfig::fig2_default()] {
            let text = cfg.to_toml().unwrap();
            assert_eq!(ScenarioConfig::from_toml(&text).unwrap(), cfg);
        }
    }

    #[test]
    fn minimal_file_parses() {
        let cfg = ScenarioConfig::from_toml(
            r#"
            name = "tiny"
            solvers = ["lindblad", "nheh"]
            [params]
            omega_x = 1000.0
            omega_c = 1000.0
            kappa = 0.1
            gamma_x = 0.01
            n_max_photons = 1
            [sweep]
            alpha_grid = [0.0, 0.5, 1.0]
            [[tracked]]
            row = "X0"
            col = "G1"
            part = "imag"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.integration, IntegrationConfig::default());
        assert_eq!(cfg.tracked[0].label(), "im_X0G1");
        assert_eq!(cfg.params.g, 1.0);
    }

    #[test]
    fn bad_grids_are_config_errors() {
        let mut cfg = ScenarioConfig::fig2_default();
        cfg.sweep = Some(Sweep::PumpGrid(vec![0.0, 0.1]));
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.sweep = Some(Sweep::AlphaGrid(vec![0.5, 0.2]));
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.sweep = Some(Sweep::AlphaGrid(vec![]));
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }
}
