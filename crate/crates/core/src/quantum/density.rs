use super::basis::{excitation_of, BasisIndex};
use super::{CMatrix, C64};
use crate::error::{Error, Result};
use crate::linalg;

/// Density matrix on the truncated bare-state basis.
///
/// Construction only checks shape; physical validity (Hermitian, unit trace,
/// positive) is inspected through [`DensityMatrix::validate`] because solver
/// outputs are only valid up to integration tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    data: CMatrix,
}

/// Tolerances for [`DensityMatrix::validate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub hermiticity: f64,
    pub trace: f64,
    pub positivity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { hermiticity: 1e-10, trace: 1e-9, positivity: 1e-8 }
    }
}

impl DensityMatrix {
    pub fn from_matrix(data: CMatrix) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::DimensionMismatch { expected: data.nrows(), found: data.ncols() });
        }
        if data.nrows() % 2 != 0 || data.nrows() == 0 {
            return Err(Error::InvalidParams(format!(
                "dimension {} is not 2·(n_max_photons + 1)",
                data.nrows()
            )));
        }
        Ok(Self { data })
    }

    /// `|b⟩⟨b|`
    pub fn projector(b: BasisIndex, n_max_photons: usize) -> Result<Self> {
        Self::diagonal_mixture(&[(1.0, b)], n_max_photons)
    }

    /// `Σ p_k |b_k⟩⟨b_k|`
    pub fn diagonal_mixture(weights: &[(f64, BasisIndex)], n_max_photons: usize) -> Result<Self> {
        let d = 2 * (n_max_photons + 1);
        let mut m = CMatrix::zeros(d, d);
        for &(p, b) in weights {
            b.check_in(n_max_photons)?;
            m[(b.flat(), b.flat())] += C64::new(p, 0.0);
        }
        Ok(Self { data: m })
    }

    /// `α|G,0⟩⟨G,0| + (1−α)|G,1⟩⟨G,1|`
    pub fn alpha_mixture(alpha: f64, n_max_photons: usize) -> Result<Self> {
        check_alpha(alpha)?;
        Self::diagonal_mixture(&[(alpha, BasisIndex::g(0)), (1.0 - alpha, BasisIndex::g(1))], n_max_photons)
    }

    /// `|ψ⟩⟨ψ|` with `|ψ⟩ = √α|G,0⟩ + √(1−α)|G,1⟩`: same populations as
    /// [`DensityMatrix::alpha_mixture`] but carrying the inter-rung coherence.
    pub fn alpha_superposition(alpha: f64, n_max_photons: usize) -> Result<Self> {
        check_alpha(alpha)?;
        let d = 2 * (n_max_photons + 1);
        let mut psi = nalgebra::DVector::zeros(d);
        psi[BasisIndex::g(0).flat()] = C64::new(alpha.sqrt(), 0.0);
        psi[BasisIndex::g(1).flat()] = C64::new((1.0 - alpha).sqrt(), 0.0);
        Self::pure(&psi)
    }

    /// Normalized `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`.
    pub fn pure(psi: &nalgebra::DVector<C64>) -> Result<Self> {
        let norm = psi.norm_squared();
        if norm == 0.0 {
            return Err(Error::InvalidParams("zero state vector".into()));
        }
        Self::from_matrix((psi * psi.adjoint()).unscale(norm))
    }

    /// `AA† / tr(AA†)` with `A` uniform in the unit square entrywise: full-rank
    /// with probability one.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R, n_max_photons: usize) -> Self {
        let d = 2 * (n_max_photons + 1);
        let a = CMatrix::from_fn(d, d, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let m = &a * a.adjoint();
        let tr = m.trace().re;
        Self { data: m.unscale(tr) }
    }

    /// Random normalized state vector.
    pub fn random_pure_vector<R: rand::Rng + ?Sized>(rng: &mut R, n_max_photons: usize) -> nalgebra::DVector<C64> {
        let d = 2 * (n_max_photons + 1);
        let v = nalgebra::DVector::from_fn(d, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let n = v.norm();
        v.unscale(n)
    }

    pub fn maximally_mixed(n_max_photons: usize) -> Self {
        let d = 2 * (n_max_photons + 1);
        Self { data: CMatrix::identity(d, d).unscale(d as f64) }
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_max_photons(&self) -> usize {
        self.dim() / 2 - 1
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn element(&self, row: BasisIndex, col: BasisIndex) -> C64 {
        self.data[(row.flat(), col.flat())]
    }

    pub fn population(&self, b: BasisIndex) -> f64 {
        self.element(b, b).re
    }

    pub fn hermiticity_error(&self) -> f64 {
        linalg::max_abs(&(&self.data - self.data.adjoint()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&linalg::hermitian_part(&self.data))
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// `tr(ρ a†a)`
    pub fn mean_photon_number(&self) -> f64 {
        (0..self.dim()).map(|i| BasisIndex::from_flat(i).photons as f64 * self.data[(i, i)].re).sum()
    }

    /// Total population with excitation number `>= rung`.
    pub fn population_from_rung(&self, rung: usize) -> f64 {
        (0..self.dim()).filter(|&i| excitation_of(i) >= rung).map(|i| self.data[(i, i)].re).sum()
    }

    /// Zero-pad to a larger cutoff (basis of the smaller cutoff is a prefix).
    pub fn embed(&self, n_max_photons: usize) -> Result<Self> {
        let d = 2 * (n_max_photons + 1);
        if d < self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: d });
        }
        let mut m = CMatrix::zeros(d, d);
        m.view_mut((0, 0), (self.dim(), self.dim())).copy_from(&self.data);
        Ok(Self { data: m })
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > tol.hermiticity {
            return Err(Error::InvalidParams(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol.trace || tr.im.abs() > tol.trace {
            return Err(Error::TraceDeviation { trace: tr.re, tol: tol.trace });
        }
        let min = self.min_eigenvalue();
        if min < -tol.positivity {
            return Err(Error::NotPositive(min));
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParams(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    Ok(())
}

impl AsRef<CMatrix> for DensityMatrix {
    fn as_ref(&self) -> &CMatrix {
        &self.data
    }
}
