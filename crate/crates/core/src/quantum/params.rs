use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical rates of the pumped-dissipative Jaynes-Cummings model plus the
/// Fock cutoff. Frequencies and rates are in units of `g`, times in `1/g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega_x: f64,
    pub omega_c: f64,
    #[serde(default = "unit_coupling")]
    pub g: f64,
    pub kappa: f64,
    pub gamma_x: f64,
    #[serde(default)]
    pub pump_p: f64,
    pub n_max_photons: usize,
}

fn unit_coupling() -> f64 {
    1.0
}

impl SystemParams {
    /// Resonant strong-coupling point used throughout the benchmarks:
    /// `omega_x = omega_c = 1000 g`, `kappa = 0.1 g`, `gamma_x = 0.01 g`,
    /// no pump, one photon above vacuum.
    pub fn resonant_benchmark() -> Self {
        Self {
            omega_x: 1000.0,
            omega_c: 1000.0,
            g: 1.0,
            kappa: 0.1,
            gamma_x: 0.01,
            pump_p: 0.0,
            n_max_photons: 1,
        }
    }

    pub fn with_pump(mut self, pump_p: f64) -> Self {
        self.pump_p = pump_p;
        self
    }

    pub fn with_cutoff(mut self, n_max_photons: usize) -> Self {
        self.n_max_photons = n_max_photons;
        self
    }

    /// Dimension of the truncated space: two TLS states times `n_max_photons + 1` Fock levels.
    pub fn dim(&self) -> usize {
        2 * (self.n_max_photons + 1)
    }

    /// Highest excitation number present in the basis (`|X, n_max⟩`).
    pub fn max_rung(&self) -> usize {
        self.n_max_photons + 1
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.omega_x, self.omega_c, self.g, self.kappa, self.gamma_x, self.pump_p]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        if self.g <= 0.0 {
            return Err(Error::InvalidParams(format!("coupling g must be positive, got {}", self.g)));
        }
        for (name, v) in [("kappa", self.kappa), ("gamma_x", self.gamma_x), ("pump_p", self.pump_p)] {
            if v < 0.0 {
                return Err(Error::InvalidParams(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if self.n_max_photons == 0 && self.pump_p > 0.0 {
            return Err(Error::NoRoomToPump);
        }
        Ok(())
    }

    /// Linear gain must stay below linear loss for a normalizable steady state.
    pub fn validate_for_steady_state(&self) -> Result<()> {
        self.validate()?;
        if self.pump_p > 0.0 && self.pump_p >= self.kappa {
            return Err(Error::UnboundedGain { pump: self.pump_p, kappa: self.kappa });
        }
        Ok(())
    }
}
