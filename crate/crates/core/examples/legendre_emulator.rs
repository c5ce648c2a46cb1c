// Tanh networks emulating tensor Legendre polynomials to a certified accuracy.

use holo_learn::multiindex::MultiIndex;
use holo_learn::neural::{build_legendre_emulator_on, build_square_emulator};
use holo_learn::sampling::halton_points;

pub fn run_example() -> holo_learn::Result<()> {
    let sq = build_square_emulator(1e-6, 1.01)?;
    println!("square emulator: h = {:.3e}, error {:.2e}", sq.h, sq.measured_error);

    for dense in [vec![1], vec![2, 1], vec![1, 1, 2]] {
        let nu = MultiIndex::from_dense(&dense);
        let e = build_legendre_emulator_on(&nu, 1e-3, 5000)?;
        let check = e.sup_error(&halton_points(5000, dense.len(), 999))?;
        println!(
            "nu = {nu}: width {}, depth {}, certified {:.2e}, fresh points {:.2e}",
            e.spec.width, e.spec.depth, e.spec.measured_error, check
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> holo_learn::Result<()> {
    run_example()
}
