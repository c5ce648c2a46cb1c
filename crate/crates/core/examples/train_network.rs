// Full-batch Adam training of a tanh network on operator samples.

use holo_learn::neural::{train, Activation, Mlp, TrainConfig};
use holo_learn::operators::{generate_training_set, EncoderDecoder, OracleSpec};

pub fn run_example() -> holo_learn::Result<()> {
    let oracle = OracleSpec { k: 17, ..OracleSpec::default() }.build()?;
    let data = generate_training_set(&oracle, 40, 0.0, 1)?;
    let net = Mlp::with_architecture(4, 17, 2, 20, Activation::Tanh, 1)?;
    let cfg = TrainConfig { epochs: 500, lr_init: 1e-2, lr_final: 1e-3, seed: 1, ..TrainConfig::default() };
    let out = train(&net, &data, &EncoderDecoder::exact(&oracle), oracle.output_norm(), &cfg)?;
    println!(
        "{} parameters, loss {:.3e} -> {:.3e} after {} epochs (checkpoint restored: {})",
        net.num_parameters(),
        out.loss_trace[0],
        out.final_loss,
        out.epochs_run,
        out.restored
    );
    let text = out.net.to_text();
    let back = Mlp::from_text(&text)?;
    println!("text round trip exact: {}", back == out.net);
    Ok(())
}

#[allow(dead_code)]
fn main() -> holo_learn::Result<()> {
    run_example()
}
