// Least-squares, greedy and weighted-L4 polynomial fits of the diffusion oracle.

use holo_learn::legendre::NormKind;
use holo_learn::multiindex::{hyperbolic_cross_in, WeightSystem};
use holo_learn::operators::{generate_training_set, OracleSpec};
use holo_learn::polyfit::{assemble_design, greedy_sparse_fit, iterative_fit, least_squares_fit, IterativeOptions};

pub fn run_example() -> holo_learn::Result<()> {
    let oracle = OracleSpec { k: 33, ..OracleSpec::default() }.build()?;
    let data = generate_training_set(&oracle, 80, 0.0, 7)?;
    let lambda = hyperbolic_cross_in(8, 4)?;
    let design = assemble_design(&lambda, &data.x)?;

    let ls = least_squares_fit(&design, &data.y, oracle.output_norm())?;
    println!("least squares: rms residual {:.3e}, rank {}", ls.residual_rms, ls.rank);

    let greedy = greedy_sparse_fit(&design, &data.y, 2000.0, &WeightSystem::default(), oracle.output_norm())?;
    let history: Vec<String> = greedy.history.iter().map(|h| format!("{h:.2e}")).collect();
    println!("greedy: {} terms selected, residual history {}", greedy.selected_set.len(), history.join(" "));

    let l4 = OracleSpec { k: 33, norm: NormKind::WeightedL4, ..OracleSpec::default() }.build()?;
    let opts = IterativeOptions { max_iterations: 500, ..IterativeOptions::default() };
    let fit = iterative_fit(&design, &data.y, l4.output_norm(), &opts)?;
    println!("weighted L4: loss {:.3e} -> {:.3e} in {} steps", fit.history[0], fit.history[fit.history.len() - 1], fit.history.len() - 1);
    Ok(())
}

#[allow(dead_code)]
fn main() -> holo_learn::Result<()> {
    run_example()
}
