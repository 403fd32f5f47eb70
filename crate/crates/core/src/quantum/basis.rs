use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// State of the two-level system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tls {
    G,
    X,
}

/// Bare state `|tls, photons⟩`.
///
/// Flat index is `2 * photons + (0 for G, 1 for X)`, so the basis for a
/// smaller cutoff is a prefix of the basis for a larger one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisIndex {
    pub tls: Tls,
    pub photons: usize,
}

impl BasisIndex {
    pub const fn new(tls: Tls, photons: usize) -> Self {
        Self { tls, photons }
    }

    pub const fn g(photons: usize) -> Self {
        Self::new(Tls::G, photons)
    }

    pub const fn x(photons: usize) -> Self {
        Self::new(Tls::X, photons)
    }

    pub fn flat(&self) -> usize {
        2 * self.photons + matches!(self.tls, Tls::X) as usize
    }

    pub fn from_flat(index: usize) -> Self {
        let tls = if index % 2 == 0 { Tls::G } else { Tls::X };
        Self { tls, photons: index / 2 }
    }

    /// Eigenvalue of `a†a + σ†σ`.
    pub fn excitation(&self) -> usize {
        self.photons + matches!(self.tls, Tls::X) as usize
    }

    pub fn check_in(&self, n_max_photons: usize) -> Result<()> {
        if self.photons > n_max_photons {
            return Err(Error::InvalidParams(format!(
                "basis state {self} exceeds photon cutoff {n_max_photons}"
            )));
        }
        Ok(())
    }
}

/// Excitation number of a flat basis index.
pub fn excitation_of(flat: usize) -> usize {
    flat / 2 + flat % 2
}

impl fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = match self.tls {
            Tls::G => 'G',
            Tls::X => 'X',
        };
        write!(f, "{t}{}", self.photons)
    }
}

impl FromStr for BasisIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut chars = s.chars();
        let tls = match chars.next() {
            Some('G') | Some('g') => Tls::G,
            Some('X') | Some('x') => Tls::X,
            _ => return Err(Error::Config(format!("bad basis label {s:?}, expected e.g. G0 or X1"))),
        };
        let photons = chars
            .as_str()
            .parse()
            .map_err(|_| Error::Config(format!("bad photon number in basis label {s:?}")))?;
        Ok(Self { tls, photons })
    }
}

impl Serialize for BasisIndex {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BasisIndex {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
