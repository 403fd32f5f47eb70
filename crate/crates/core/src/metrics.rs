//! Pearson correlation of trajectories and Uhlmann fidelity of states.

use crate::error::{Error, Result};
use crate::integrator::{Part, Trajectory};
use crate::linalg::sqrt_psd;
use crate::quantum::{BasisIndex, DensityMatrix, Tolerances};

/// A series counts as constant when `max − min ≤ CONSTANT_REL · max(1, max |x|)`.
pub const CONSTANT_REL: f64 = 1e-12;

fn is_constant(x: &[f64]) -> bool {
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    hi - lo <= CONSTANT_REL * scale
}

/// Sample correlation coefficient of two equally long series.
///
/// A (numerically) constant series has no defined correlation and yields
/// [`Error::ConstantSeries`] rather than NaN.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if is_constant(x) || is_constant(y) {
        return Err(Error::ConstantSeries);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// [`pearson`] of one matrix element (or its real/imaginary part or modulus) along two trajectories.
pub fn trajectory_correlation(a: &Trajectory, b: &Trajectory, element: (BasisIndex, BasisIndex), part: Part) -> Result<f64> {
    if a.times != b.times {
        return Err(Error::TimeGridMismatch);
    }
    let (row, col) = element;
    for s in [row, col] {
        s.check_in(a.states[0].n_max_photons())?;
        s.check_in(b.states[0].n_max_photons())?;
    }
    pearson(&a.series(row, col, part), &b.series(row, col, part))
}

/// `F(ρ, σ) = [tr √(√ρ σ √ρ)]²`.
///
/// Both arguments must be valid density matrices; eigenvalues within
/// `Tolerances::default().positivity` below zero are clipped, and eigenvalues
/// under the rounding floor of each matrix count as zero. The trace is taken
/// as the sum of singular values of `√ρ √σ`, whose squares are the eigenvalues
/// of `√ρ σ √ρ`; this avoids square roots of rounding noise in the small eigenvalues.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let tol = Tolerances::default();
    rho.validate(&tol)?;
    sigma.validate(&tol)?;
    let a = sqrt_psd(rho.as_matrix(), tol.positivity)? * sqrt_psd(sigma.as_matrix(), tol.positivity)?;
    let root: f64 = a.singular_values().iter().sum();
    Ok((root * root).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{CMatrix, C64};

    #[test]
    fn pearson_examples() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[-1.0, -2.0, -3.0]).unwrap() + 1.0).abs() < 1e-15);
        // covariance 1.5, variances 1 and 7/3
        let expected = 1.5 / (7.0f64 / 3.0).sqrt();
        let r = pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap();
        assert!((r - expected).abs() < 1e-14);
        assert!((r - 0.981_980_506).abs() < 1e-9);
    }

    #[test]
    fn pearson_rejects_constant_and_short() {
        assert!(matches!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(Error::ConstantSeries)));
        assert!(matches!(pearson(&[0.0, 0.0], &[0.0, 0.0]), Err(Error::ConstantSeries)));
        assert!(matches!(pearson(&[1.0], &[1.0]), Err(Error::LengthMismatch(1, 1))));
        assert!(matches!(pearson(&[1.0, 2.0], &[1.0, 2.0, 3.0]), Err(Error::LengthMismatch(2, 3))));
    }

    #[test]
    fn fidelity_examples() {
        let g0 = DensityMatrix::projector(BasisIndex::g(0), 1).unwrap();
        let g1 = DensityMatrix::projector(BasisIndex::g(1), 1).unwrap();
        assert!(fidelity(&g0, &g1).unwrap().abs() < 1e-15);
        assert!((fidelity(&g0, &g0).unwrap() - 1.0).abs() < 1e-15);

        let a = DensityMatrix::diagonal_mixture(&[(0.5, BasisIndex::g(0)), (0.5, BasisIndex::x(0))], 0).unwrap();
        let b = DensityMatrix::diagonal_mixture(&[(0.9, BasisIndex::g(0)), (0.1, BasisIndex::x(0))], 0).unwrap();
        assert!((fidelity(&a, &b).unwrap() - 0.8).abs() < 1e-14);
    }

    #[test]
    fn fidelity_rejects_non_states() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = C64::new(1.5, 0.0);
        m[(1, 1)] = C64::new(-0.5, 0.0);
        let bad = DensityMatrix::from_matrix(m).unwrap();
        let g0 = DensityMatrix::projector(BasisIndex::g(0), 0).unwrap();
        assert!(matches!(fidelity(&bad, &g0), Err(Error::NotPositive(_))));
    }
}
