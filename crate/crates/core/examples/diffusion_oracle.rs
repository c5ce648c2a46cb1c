// The parametric diffusion oracle and noisy training data.

use holo_learn::legendre::NormKind;
use holo_learn::operators::{generate_training_set, CoefficientField, OperatorOracle, Source};

pub fn run_example() -> holo_learn::Result<()> {
    let oracle = OperatorOracle::diffusion(CoefficientField::AffineA1 { d: 4 }, Source::default(), 33, NormKind::WeightedEuclidean)?;
    let u = oracle.eval(&[0.5, -0.2, 0.9, 0.0])?;
    println!("u at the interior nodes: {:.4} {:.4} {:.4}", u[8], u[16], u[24]);
    println!("holomorphy sequence: {:?}", oracle.holomorphy_b());

    let data = generate_training_set(&oracle, 5, 1e-3, 42)?;
    println!("{} samples, noise level {}", data.len(), data.noise_level);
    let csv = data.to_csv();
    println!("{}", csv.lines().take(2).collect::<Vec<_>>().join("\n"));

    let log_field = CoefficientField::LogA2 { d: 4 };
    println!("log-a2 coefficient at z = 0.3: {:.4}", log_field.eval(0.3, &[1.0, -1.0, 0.5, 0.0])?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> holo_learn::Result<()> {
    run_example()
}
