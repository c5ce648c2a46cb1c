// A small convergence experiment with a theory overlay.

use holo_learn::harness::{run_convergence, theory_overlay, ExperimentSpec};

pub fn run_example() -> holo_learn::Result<()> {
    let spec = ExperimentSpec::from_config(
        "family = affine-a1\nK = 33\nmethod = polyfit-ls\nhc = 4\nm_values = 10,20,40,80\ntrials = 3\ntest_level = 3\nwindow = 20,80\n",
    )?;
    let table = run_convergence(&spec)?;
    print!("{}", table.to_csv());
    let oracle = spec.oracle.build()?;
    let overlay = theory_overlay(&table, oracle.holomorphy_b(), 2.0 / 3.0, true)?;
    print!("{}", overlay.to_csv(&table.manifest));
    Ok(())
}

#[allow(dead_code)]
fn main() -> holo_learn::Result<()> {
    run_example()
}
