// Hyperbolic crosses, intrinsic weights and weighted best-k-term tails.

use holo_learn::multiindex::{hyperbolic_cross_in, stechkin_error, weighted_cardinality, WeightKind, WeightSystem};

pub fn run_example() -> holo_learn::Result<()> {
    let w = WeightSystem::new(0.0)?;
    for n in [4, 8, 16] {
        let lambda = hyperbolic_cross_in(n, 4)?;
        println!(
            "HC({n}) in d=4: {} indices, |S|_u = {}, downward closed: {}",
            lambda.len(),
            weighted_cardinality(&lambda, WeightKind::U, &w),
            lambda.is_downward_closed()
        );
    }

    let c: Vec<f64> = (1..=40).map(|i| (i as f64).powf(-1.5)).collect();
    let weights: Vec<f64> = (1..=40).map(|i| 1.0 + (i as f64).ln()).collect();
    for k in [4.0, 16.0, 64.0] {
        let est = stechkin_error(&c, &weights, k, 2.0, 0.6)?;
        println!("k = {k:>4}: tail {:.3e} <= bound {:.3e}, kept {}", est.error, est.bound, est.selected.len());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> holo_learn::Result<()> {
    run_example()
}
