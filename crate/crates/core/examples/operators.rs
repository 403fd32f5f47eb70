// Truncated basis, ladder operators and the rung structure of the
// Jaynes-Cummings Hamiltonian.

use jcladder::linalg::max_abs;
use jcladder::quantum::{build_operators, BasisIndex, SystemParams};

pub struct OperatorsReport {
    pub dim: usize,
    /// `max |[H_JC, N_exc]|`: zero because the exchange term conserves excitations.
    pub excitation_commutator: f64,
    /// `max |[a, a†] − 1|` below the top Fock level.
    pub ccr_defect: f64,
}

pub fn run_example() -> jcladder::Result<OperatorsReport> {
    let p = SystemParams::resonant_benchmark().with_cutoff(3);
    let ops = build_operators(&p)?;
    println!("cutoff {} photons, dimension {}", p.n_max_photons, ops.dim());
    for flat in 0..ops.dim() {
        let b = BasisIndex::from_flat(flat);
        println!("  {flat}: {b}  rung {}", b.excitation());
    }

    let comm = &ops.h_jc * &ops.n_op - &ops.n_op * &ops.h_jc;
    let ca = &ops.a * &ops.a_dag - &ops.a_dag * &ops.a;
    let mut ccr_defect: f64 = 0.0;
    for flat in 0..ops.dim() {
        if BasisIndex::from_flat(flat).photons < p.n_max_photons {
            ccr_defect = ccr_defect.max((ca[(flat, flat)].re - 1.0).abs());
        }
    }
    let g1 = BasisIndex::g(1).flat();
    let x0 = BasisIndex::x(0).flat();
    println!("<G1|H|X0> = {}", ops.h_jc[(g1, x0)]);
    println!("max |[H, N]| = {:.3e}", max_abs(&comm));
    println!("max |[a, a+] - 1| below the top = {ccr_defect:.3e}");
    Ok(OperatorsReport { dim: ops.dim(), excitation_commutator: max_abs(&comm), ccr_defect })
}

#[allow(dead_code)]
fn main() -> jcladder::Result<()> {
    run_example().map(|_| ())
}
