// Best s-term tails of the lower-bound sequences and random-matrix probes.

use holo_learn::probes::{
    nullspace_spikiness, rate_floor, sigma_s_closed_forms, subgaussian_sigma_min, FloorNorm, LowerBoundSequence, SequenceKind,
};

pub fn run_example() -> holo_learn::Result<()> {
    let p = 0.5;
    for m in [10, 100] {
        let s = sigma_s_closed_forms(&LowerBoundSequence::flat(p, m)?, m, 2)?;
        println!("flat-2m, m = {m}: sigma_m = {:.6e}, closed form {:.6e}", s.numeric, s.closed_form.unwrap_or(f64::NAN));
    }
    let floor = rate_floor(SequenceKind::LogDamped, p, &[10, 100, 1000], FloorNorm::L2)?;
    print!("{}", floor.to_csv());

    let sm = subgaussian_sigma_min(20, 160, 50, 3)?;
    println!("sigma_min >= {:.3} in {:.0}% of trials", sm.threshold, 100.0 * sm.fraction);
    let sp = nullspace_spikiness(&[10, 20, 40], 50, 3)?;
    print!("{}", sp.summary_csv());
    Ok(())
}

#[allow(dead_code)]
fn main() -> holo_learn::Result<()> {
    run_example()
}
