//! Command-line runner for self-play and adversarial experiments, numeric
//! verification passes and log-log slope fits on trace CSVs.
//!
//! Exit codes: 0 on success, 1 on validation or I/O failure, 2 when a
//! `verify` pass finds a violated certificate.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aog::harness::{
    emit_csv, fit_loglog_points, load_config, read_csv_column, run_adversarial_config,
    run_self_play, run_self_play_on, ExperimentConfig, SelfPlaySetup, DEFAULT_WINDOW_START,
};
use aog::learners::Algorithm;
use aog::metrics::{check_certificates, sequence_from_rows, write_csv, CertificateParams, RunRecord};
use aog::verify::{check_descent_identity, check_sequence_bound, run_eag_adversary, IdentityInstance};
use aog::{games, Error, Vector};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "aog", version, about = "Learning dynamics in smooth monotone games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Trace destination; the config's `output`, then stdout, otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    stride: Option<usize>,
    /// Overrides the algorithm of every player.
    #[arg(long)]
    algo: Option<String>,
    #[arg(long = "T")]
    horizon: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Check {
    Identity,
    Sequence,
    Eag,
    Certificates,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Run a self-play config and write its trace.
    Selfplay(RunArgs),
    /// Run an adversarial config and write its trace.
    Adversarial(RunArgs),
    /// Numeric checks; exits with 2 on a violated certificate.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        check: Check,
        /// Self-play config for the certificate and sequence checks.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long = "T")]
        horizon: Option<usize>,
    },
    /// Fit a log-log slope to a column of a trace CSV.
    Slope {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value = "r_tan")]
        column: String,
        #[arg(long, default_value_t = DEFAULT_WINDOW_START)]
        t_min: usize,
        /// Defaults to the last round in the trace.
        #[arg(long)]
        t_max: Option<usize>,
    },
}

enum Failure {
    Validation(String),
    Certificate(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Certificate(msg) => Failure::Certificate(msg),
            other => Failure::Validation(other.to_string()),
        }
    }
}

fn load_with_overrides(args: &RunArgs) -> Result<ExperimentConfig, Failure> {
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.set_seed(seed);
    }
    if let Some(stride) = args.stride {
        cfg.set_stride(stride);
    }
    if let Some(horizon) = args.horizon {
        cfg.set_horizon(horizon);
    }
    if let Some(tag) = &args.algo {
        cfg.set_algorithm(tag.parse::<Algorithm>()?);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_trace(records: &[RunRecord], players: usize, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => emit_csv(records, players, path)?,
        None => write_csv(records, players, io::stdout().lock())?,
    }
    Ok(())
}

fn selfplay(args: &RunArgs) -> Result<(), Failure> {
    let ExperimentConfig::Selfplay(cfg) = load_with_overrides(args)? else {
        return Err(Failure::Validation("mode: expected \"selfplay\"".into()));
    };
    let trace = run_self_play(&cfg)?;
    let out = args.out.as_deref().or(cfg.output.as_deref());
    write_trace(&trace.records, trace.num_players, out)?;
    let last = trace.last();
    eprintln!(
        "selfplay {}: T = {}, final r_tan = {:?}",
        cfg.game.id(),
        last.t,
        last.r_tan.unwrap_or(f64::NAN)
    );
    Ok(())
}

fn adversarial(args: &RunArgs) -> Result<(), Failure> {
    let ExperimentConfig::Adversarial(cfg) = load_with_overrides(args)? else {
        return Err(Failure::Validation("mode: expected \"adversarial\"".into()));
    };
    let trace = run_adversarial_config(&cfg)?;
    let out = args.out.as_deref().or(cfg.output.as_deref());
    write_trace(&trace.records, 1, out)?;
    eprintln!(
        "adversarial {}: T = {}, external regret = {:?}",
        cfg.algorithm,
        cfg.horizon,
        trace.final_regret.unwrap_or(f64::NAN)
    );
    Ok(())
}

fn report(ok: bool, line: String, violations: &mut Vec<String>) {
    println!("{} {line}", if ok { "ok  " } else { "FAIL" });
    if !ok {
        violations.push(line);
    }
}

fn verify_identity(seed: u64, violations: &mut Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut flagged = 0;
    let combos: Vec<(usize, f64, f64)> = [1, 2, 5, 20]
        .into_iter()
        .flat_map(|d| [1.0, 2.0, 10.0, 1000.0].into_iter().map(move |t| (d, t)))
        .flat_map(|(d, t)| [0.01, 0.1, 0.2].into_iter().map(move |q| (d, t, q)))
        .collect();
    for i in 0..1000 {
        let (d, t, q) = combos[i % combos.len()];
        let c = check_descent_identity(&IdentityInstance::random(&mut rng, d, t, q));
        worst = worst.max(c.relative_error);
        flagged += usize::from(c.flagged);
    }
    report(
        worst <= 1e-9,
        format!("descent identity: 1000 random instances, worst relative error {worst:e}, {flagged} flagged"),
        violations,
    );
}

fn verify_eag(violations: &mut Vec<String>) -> Result<(), Failure> {
    for rounds in [10, 1000, 100_000] {
        let out = run_eag_adversary(rounds, 0.5)?;
        report(
            out.regret >= rounds as f64 / 2.0,
            format!("EAG alternating adversary: T = {rounds}, regret {}", out.regret),
            violations,
        );
    }
    Ok(())
}

fn verify_run(config: Option<&Path>, horizon: Option<usize>, checks: Check, violations: &mut Vec<String>) -> Result<(), Failure> {
    let trace = match config {
        Some(path) => {
            let ExperimentConfig::Selfplay(mut cfg) = load_config(path)? else {
                return Err(Failure::Validation("mode: expected \"selfplay\"".into()));
            };
            if let Some(h) = horizon {
                cfg.horizon = h;
            }
            run_self_play(&cfg)?
        }
        None => {
            let game = games::make_bilinear_saddle(1.0, 1.0, (1, 1))?;
            let setup = SelfPlaySetup::uniform(
                Algorithm::Aog,
                None,
                2,
                horizon.unwrap_or(10_000),
                Vector::from_element(2, 0.5),
            );
            run_self_play_on(&game, &setup)?
        }
    };
    let (Some(eta), Some(diameter)) = (trace.common_eta, trace.diameter) else {
        return Err(Failure::Validation(
            "certificates need fixed-step aog self-play on a bounded game".into(),
        ));
    };
    if matches!(checks, Check::Certificates | Check::All) {
        let params = CertificateParams { eta, lipschitz: trace.lipschitz, diameter };
        for rep in check_certificates(&trace.certificate_rows, params) {
            let first = rep.violations.first().map(|v| format!(", first at t = {}", v.t)).unwrap_or_default();
            report(
                rep.passed(),
                format!(
                    "{}: {} rounds checked, worst ratio {:.4}{first}",
                    rep.name, rep.checked, rep.worst_ratio
                ),
                violations,
            );
        }
    }
    if matches!(checks, Check::Sequence | Check::All) {
        let seq = sequence_from_rows(&trace.certificate_rows)?;
        let r = check_sequence_bound(&seq, 10.0 * diameter * diameter, 0.25)?;
        report(r.hypothesis_holds, format!("sequence bound hypothesis (first failure {:?})", r.hypothesis_failure), violations);
        report(r.conclusion_holds, format!("sequence bound conclusion (first failure {:?})", r.conclusion_failure), violations);
    }
    Ok(())
}

fn verify(check: Check, config: Option<&Path>, seed: u64, horizon: Option<usize>) -> Result<(), Failure> {
    let mut violations = Vec::new();
    if matches!(check, Check::Identity | Check::All) {
        verify_identity(seed, &mut violations);
    }
    if matches!(check, Check::Eag | Check::All) {
        verify_eag(&mut violations)?;
    }
    if matches!(check, Check::Certificates | Check::Sequence | Check::All) {
        verify_run(config, horizon, check, &mut violations)?;
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Certificate(format!("{} check(s) failed", violations.len())))
    }
}

fn slope(csv: &Path, column: &str, t_min: usize, t_max: Option<usize>) -> Result<(), Failure> {
    let points = read_csv_column(csv, column)?;
    let t_max = t_max.unwrap_or_else(|| points.iter().map(|p| p.0 as usize).max().unwrap_or(0));
    let fit = fit_loglog_points(&points, (t_min, t_max))?;
    println!(
        "column {column}: slope {:.6}, intercept {:.6}, r^2 {:.6}, window [{}, {}], {} rows",
        fit.slope, fit.intercept, fit.r_squared, fit.window.0, fit.window.1, fit.points
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Selfplay(args) => selfplay(args),
        Command::Adversarial(args) => adversarial(args),
        Command::Verify { check, config, seed, horizon } => verify(*check, config.as_deref(), *seed, *horizon),
        Command::Slope { csv, column, t_min, t_max } => slope(csv, column, *t_min, *t_max),
    };
    let _ = io::stdout().flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Certificate(msg)) => {
            eprintln!("certificate violation: {msg}");
            ExitCode::from(2)
        }
    }
}
