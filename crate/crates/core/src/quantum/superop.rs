//! Superoperator actions shared by all three formalisms.

use super::basis::excitation_of;
use super::{CMatrix, C64};
use crate::error::{Error, Result};

fn check_dims(x: &CMatrix, rho: &CMatrix) -> Result<()> {
    if !x.is_square() || x.nrows() != rho.nrows() || !rho.is_square() {
        return Err(Error::DimensionMismatch { expected: x.nrows(), found: rho.nrows() });
    }
    Ok(())
}

/// `i(ρX† − Xρ)`; equals `i[ρ, X]` for Hermitian `X`.
pub fn hermitian_flow(x: &CMatrix, rho: &CMatrix) -> Result<CMatrix> {
    check_dims(x, rho)?;
    Ok((rho * x.adjoint() - x * rho) * C64::i())
}

/// `2XρX† − X†Xρ − ρX†X`
pub fn lindblad_dissipator(x: &CMatrix, rho: &CMatrix) -> Result<CMatrix> {
    check_dims(x, rho)?;
    let xd = x.adjoint();
    let xdx = &xd * x;
    Ok((x * rho * &xd).scale(2.0) - &xdx * rho - rho * &xdx)
}

/// `XρX†`
pub fn jump_transfer(x: &CMatrix, rho: &CMatrix) -> Result<CMatrix> {
    check_dims(x, rho)?;
    Ok(x * rho * x.adjoint())
}

/// Keep the block whose row and column excitation are both `n`.
pub fn rung_projector(n: usize, rho: &CMatrix) -> Result<CMatrix> {
    excitation_block(n, n, rho)
}

/// Keep the block with row excitation `row_rung` and column excitation `col_rung`.
pub fn excitation_block(row_rung: usize, col_rung: usize, rho: &CMatrix) -> Result<CMatrix> {
    if !rho.is_square() || rho.nrows() % 2 != 0 {
        return Err(Error::DimensionMismatch { expected: rho.nrows(), found: rho.ncols() });
    }
    let max = rho.nrows() / 2;
    for r in [row_rung, col_rung] {
        if r > max {
            return Err(Error::RungOutOfRange { rung: r, max });
        }
    }
    let mut out = rho.clone();
    for j in 0..rho.ncols() {
        for i in 0..rho.nrows() {
            if excitation_of(i) != row_rung || excitation_of(j) != col_rung {
                out[(i, j)] = C64::new(0.0, 0.0);
            }
        }
    }
    Ok(out)
}
