use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use holo_learn::harness::{relative_test_error, run_convergence, theory_overlay, ExperimentSpec, Manifest};
use holo_learn::multiindex::{hyperbolic_cross_in, MultiIndex};
use holo_learn::neural::{build_interpolating_minimizer, build_legendre_emulator, MinimizerOptions};
use holo_learn::operators::{generate_training_set, OracleSpec};
use holo_learn::polyfit::{assemble_design, least_squares_fit, predicted_rates};
use holo_learn::probes::{
    nullspace_spikiness, rate_floor, sigma_s_closed_forms, subgaussian_sigma_min, FloorNorm, LowerBoundSequence, SequenceKind,
};
use holo_learn::quadrature::{smolyak, RuleFamily};
use holo_learn::sampling::{stream_rng, uniform_point};
use holo_learn::{Error, Result};

#[derive(Parser)]
#[command(name = "holo-learn", version, about = "Learn holomorphic operators from few samples")]
struct Cli {
    /// Upper bound on worker threads (0: all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence experiment described by a key = value config file.
    Run(RunArgs),
    /// Build and certify a tanh emulator of one Legendre polynomial.
    Emulate(EmulateArgs),
    /// Interpolating minimizers built around a polynomial fit.
    Minimizer(MinimizerArgs),
    /// Lower-bound sequences and random-matrix probes.
    Probe(ProbeArgs),
    /// Predicted error-decay curves.
    Rates(RatesArgs),
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Reduced profile: 10⁴ epochs and 3 trials.
    #[arg(long)]
    fast: bool,
    /// Directory for table.csv, trials.csv and overlay.csv (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Append the predicted rate for this p, anchored at the smallest m.
    #[arg(long)]
    overlay_p: Option<f64>,
}

#[derive(Args)]
struct EmulateArgs {
    /// Multi-index as `dim:exp` pairs, e.g. "1:2 3:1".
    #[arg(long)]
    nu: String,
    #[arg(long, default_value_t = 1e-3)]
    delta: f64,
    /// Fresh uniform points for the independent error check.
    #[arg(long, default_value_t = 100_000)]
    check_points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the network in text form to this file.
    #[arg(long)]
    save: Option<PathBuf>,
}

#[derive(Args)]
struct MinimizerArgs {
    #[arg(long, default_value_t = 20)]
    m: usize,
    /// Number of first-order emulators (default 2m + 2); also the padded input dimension.
    #[arg(long)]
    r: Option<usize>,
    /// Output nodes of the diffusion oracle.
    #[arg(long, default_value_t = 65)]
    k: usize,
    /// Hyperbolic cross order of the polynomial fit.
    #[arg(long, default_value_t = 4)]
    hc: usize,
    /// Null-space lengths to try.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 5.9604644775390625e-8, 9.5367431640625e-7])]
    z: Vec<f64>,
    #[arg(long, default_value_t = 1e-5)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProbeKind {
    /// σ_s tails of the lower-bound sequences.
    Tails,
    /// Delocalization of null vectors of m × (m+1) uniform matrices.
    Spikiness,
    /// Smallest singular values of scaled r × m uniform matrices.
    SigmaMin,
}

#[derive(Args)]
struct ProbeArgs {
    #[arg(value_enum)]
    kind: ProbeKind,
    #[arg(long, value_delimiter = ',', default_values_t = [10usize, 20, 40, 80])]
    m_values: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Row multiplier for sigma-min (`r = ratio · m`).
    #[arg(long, default_value_t = 8)]
    ratio: usize,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the per-trial CSV here and print the summary.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RatesArgs {
    #[arg(long, default_value_t = 2.0 / 3.0)]
    p: f64,
    /// Banach-valued outputs (adds 1/2 to the exponent).
    #[arg(long)]
    banach: bool,
    #[arg(long, value_delimiter = ',', default_values_t = [10usize, 20, 50, 100, 200, 500, 1000])]
    m_values: Vec<usize>,
    /// Also print the lower-bound floors for this sequence kind (flat-2m or log-damped).
    #[arg(long)]
    floor: Option<String>,
}

fn emit(out: Option<&Path>, name: &str, text: &str) -> Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(name), text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut spec = ExperimentSpec::from_config(&text)?;
    if args.fast {
        spec = spec.fast();
    }
    let table = run_convergence(&spec)?;
    let out = args.out.as_deref();
    emit(out, "table.csv", &table.to_csv())?;
    if out.is_some() {
        emit(out, "trials.csv", &table.trials_csv())?;
        emit(out, "manifest.txt", &table.manifest.config)?;
    }
    if let Some(p) = args.overlay_p {
        let oracle = spec.oracle.build()?;
        let overlay = theory_overlay(&table, oracle.holomorphy_b(), p, oracle.output_norm().is_hilbert())?;
        emit(out, "overlay.csv", &overlay.to_csv(&table.manifest))?;
    }
    if table.flagged() {
        eprintln!("warning: more than 20% of the trials failed for some m");
    }
    Ok(())
}

fn emulate(args: EmulateArgs) -> Result<()> {
    let nu: MultiIndex = args.nu.replace(',', " ").parse()?;
    let manifest = Manifest::new(&format!("command = emulate\nnu = {nu}\ndelta = {}\nseed = {}\n", args.delta, args.seed));
    let e = build_legendre_emulator(&nu, args.delta)?;
    let d = nu.max_dim().max(1);
    let pts: Vec<Vec<f64>> = (0..args.check_points).map(|i| uniform_point(&mut stream_rng(args.seed, i as u64), d)).collect();
    let fresh = e.sup_error(&pts)?;
    let s = &e.spec;
    let mut out = manifest.header();
    out.push_str("nu,delta,h_square,h_identity,stage_delta,width,depth,certified_error,fresh_error\n");
    let _ = writeln!(
        out,
        "{},{:e},{:.16e},{:.16e},{:.16e},{},{},{:.16e},{:.16e}",
        nu, s.delta, s.h_square, s.h_identity, s.stage_delta, s.width, s.depth, s.measured_error, fresh
    );
    print!("{out}");
    if let Some(path) = args.save {
        std::fs::write(path, e.net.to_text())?;
    }
    Ok(())
}

fn minimizer(args: MinimizerArgs) -> Result<()> {
    let r = args.r.unwrap_or(2 * args.m + 2);
    let manifest = Manifest::new(&format!(
        "command = minimizer\nm = {}\nr = {r}\nK = {}\nhc = {}\nz = {:?}\ndelta = {}\nseed = {}\n",
        args.m, args.k, args.hc, args.z, args.delta, args.seed
    ));
    let oracle_spec = OracleSpec {
        k: args.k,
        ..OracleSpec::default()
    };
    let oracle = oracle_spec.build()?.with_input_dim(r)?;
    let norm = oracle.output_norm().clone();
    let data = generate_training_set(&oracle, args.m, 0.0, args.seed)?;
    let lambda = hyperbolic_cross_in(args.hc, oracle.d())?;
    let fit = least_squares_fit(&assemble_design(&lambda, &data.x)?, &data.y, &norm)?;
    let rule = smolyak(r, 2, RuleFamily::ClenshawCurtis)?;
    let fit_error = relative_test_error(|x| fit.expansion.eval(x), &oracle, &rule, &norm)?;
    let mut out = manifest.header();
    out.push_str("z_scale,training_residual,sigma_min,test_error,fit_test_error,parameter_norm\n");
    for &z in &args.z {
        let opts = MinimizerOptions {
            r,
            z_scale: z,
            seed: args.seed,
            delta: args.delta,
            ..MinimizerOptions::default()
        };
        let mn = build_interpolating_minimizer(&fit, &data, &norm, &opts)?;
        let err = relative_test_error(|x| mn.net.forward(x), &oracle, &rule, &norm)?;
        let pnorm = mn.net.parameters().iter().map(|v| v * v).sum::<f64>().sqrt();
        let _ = writeln!(
            out,
            "{z:e},{:.6e},{:.6e},{err:.6e},{fit_error:.6e},{pnorm:.16e}",
            mn.training_residual, mn.sigma_min
        );
    }
    print!("{out}");
    Ok(())
}

fn probe(args: ProbeArgs) -> Result<()> {
    let manifest = Manifest::new(&format!(
        "command = probe\nm_values = {:?}\ntrials = {}\nratio = {}\np = {}\nseed = {}\n",
        args.m_values, args.trials, args.ratio, args.p, args.seed
    ));
    let mut summary = manifest.header();
    let mut detail = manifest.header();
    match args.kind {
        ProbeKind::Tails => {
            let damped = LowerBoundSequence::log_damped(args.p)?;
            summary.push_str("m,flat_sigma2,flat_closed_form,log_damped_sigma2,log_damped_lower_estimate\n");
            for &m in &args.m_values {
                let flat = sigma_s_closed_forms(&LowerBoundSequence::flat(args.p, m)?, m, 2)?;
                let d = sigma_s_closed_forms(&damped, m, 2)?;
                let est = holo_learn::probes::log_damped_lower_estimate(damped.c_p(), args.p, m);
                let _ = writeln!(
                    summary,
                    "{m},{:.16e},{:.16e},{:.16e},{est:.16e}",
                    flat.numeric,
                    flat.closed_form.unwrap_or(f64::NAN),
                    d.numeric
                );
            }
        }
        ProbeKind::Spikiness => {
            let report = nullspace_spikiness(&args.m_values, args.trials, args.seed)?;
            summary.push_str(&report.summary_csv());
            detail.push_str(&report.to_csv());
        }
        ProbeKind::SigmaMin => {
            let mut header_done = false;
            detail.push_str("m,trial,statistic\n");
            for &m in &args.m_values {
                let report = subgaussian_sigma_min(m, args.ratio * m, args.trials, args.seed)?;
                let s = report.summary_csv();
                let mut lines = s.lines();
                let header = lines.next().unwrap_or_default();
                if !header_done {
                    summary.push_str(header);
                    summary.push('\n');
                    header_done = true;
                }
                for l in lines {
                    summary.push_str(l);
                    summary.push('\n');
                }
                for l in report.to_csv().lines().skip(1) {
                    detail.push_str(l);
                    detail.push('\n');
                }
            }
        }
    }
    print!("{summary}");
    if let Some(path) = args.out {
        std::fs::write(path, detail)?;
    }
    Ok(())
}

fn rates(args: RatesArgs) -> Result<()> {
    let manifest = Manifest::new(&format!(
        "command = rates\np = {}\nbanach = {}\nm_values = {:?}\nfloor = {:?}\n",
        args.p, args.banach, args.m_values, args.floor
    ));
    let ms: Vec<f64> = args.m_values.iter().map(|&m| m as f64).collect();
    let curve = predicted_rates(&[1.0], args.p, &ms, !args.banach)?;
    let mut out = manifest.header();
    let _ = writeln!(out, "# exponent_q2={:.16e},exponent_qinf={:.16e}", curve.exponent_q2, curve.exponent_qinf);
    out.push_str("m,q2,qinf,q2_log,qinf_log\n");
    for i in 0..ms.len() {
        let _ = writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e}",
            args.m_values[i], curve.q2[i], curve.qinf[i], curve.q2_log[i], curve.qinf_log[i]
        );
    }
    if let Some(kind) = args.floor {
        let kind = SequenceKind::parse(&kind)?;
        for norm in [FloorNorm::L2, FloorNorm::Sup] {
            let floor = rate_floor(kind, args.p, &args.m_values, norm)?;
            let _ = writeln!(out, "# floor {} {:?} exponent={:.16e}", kind.name(), norm, floor.exponent);
            out.push_str(&floor.to_csv());
        }
    }
    print!("{out}");
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    match cli.command {
        Command::Run(a) => run(a),
        Command::Emulate(a) => emulate(a),
        Command::Minimizer(a) => minimizer(a),
        Command::Probe(a) => probe(a),
        Command::Rates(a) => rates(a),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
