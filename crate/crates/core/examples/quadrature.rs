// Orthonormal Legendre polynomials and Clenshaw-Curtis sparse grids.

use holo_learn::legendre::{eval_psi, eval_tensor};
use holo_learn::multiindex::MultiIndex;
use holo_learn::quadrature::{gauss_legendre, smolyak, tensor_rule, RuleFamily};

pub fn run_example() -> holo_learn::Result<()> {
    let gauss = gauss_legendre(12)?;
    for (i, j) in [(0, 0), (3, 3), (3, 5), (7, 7)] {
        println!("<psi_{i}, psi_{j}> = {:+.3e}", gauss.integrate(|x| eval_psi(i, x) * eval_psi(j, x)));
    }

    let nu = MultiIndex::from_dense(&[2, 1, 0, 1]);
    let f = |x: &[f64]| eval_tensor(&nu, x).unwrap().powi(2);
    let reference = tensor_rule(4, &gauss_legendre(4)?)?.integrate(f);
    for level in 1..=4 {
        let grid = smolyak(4, level, RuleFamily::ClenshawCurtis)?;
        println!("level {level}: {:>5} nodes, integral {:.12} (tensor Gauss {reference:.12})", grid.len(), grid.integrate(f));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> holo_learn::Result<()> {
    run_example()
}
