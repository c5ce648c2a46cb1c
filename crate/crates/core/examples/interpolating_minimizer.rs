// Networks that interpolate the data while matching a polynomial fit away from it.

use holo_learn::harness::relative_test_error;
use holo_learn::multiindex::hyperbolic_cross_in;
use holo_learn::neural::{build_interpolating_minimizer, MinimizerOptions};
use holo_learn::operators::{generate_training_set, OracleSpec};
use holo_learn::polyfit::{assemble_design, least_squares_fit};
use holo_learn::quadrature::{smolyak, RuleFamily};

pub fn run_example() -> holo_learn::Result<()> {
    let m = 10;
    let r = 2 * m + 2;
    let oracle = OracleSpec { k: 17, ..OracleSpec::default() }.build()?.with_input_dim(r)?;
    let norm = oracle.output_norm().clone();
    let data = generate_training_set(&oracle, m, 0.0, 2)?;
    let fit = least_squares_fit(&assemble_design(&hyperbolic_cross_in(3, 4)?, &data.x)?, &data.y, &norm)?;
    let rule = smolyak(r, 2, RuleFamily::ClenshawCurtis)?;
    println!("polynomial fit test error {:.3e}", relative_test_error(|x| fit.expansion.eval(x), &oracle, &rule, &norm)?);
    for z in [0.0, 1e-6] {
        let opts = MinimizerOptions { r, z_scale: z, seed: 4, grid_points: 2000, ..MinimizerOptions::default() };
        let mn = build_interpolating_minimizer(&fit, &data, &norm, &opts)?;
        let err = relative_test_error(|x| mn.net.forward(x), &oracle, &rule, &norm)?;
        println!("z = {z:e}: training residual {:.2e}, sigma_min(B) {:.3}, test error {err:.3e}", mn.training_residual, mn.sigma_min);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> holo_learn::Result<()> {
    run_example()
}
