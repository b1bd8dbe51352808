use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use qbc_core::adversary::{AliceStrategy, BiasPolicy, BobStrategy, ZetaPolicy};
use qbc_core::qstate::Basis;
use qbc_harness::config::parse_decoy_policy;
use qbc_harness::output::write_transcripts;
use qbc_harness::{
    classify_security, emit, run_experiment, ConfigError, ExperimentConfig, Format, Protocol, Sweep,
};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Text,
}

/// Monte Carlo estimates for the composite-evidence bit commitment protocol
/// and its attacks.
#[derive(Debug, Parser)]
#[command(name = "qbc", version)]
struct Cli {
    /// Protocol: `p` (decoys) or `pprime` (scrambled).
    #[arg(long, default_value = "p")]
    protocol: String,
    /// Alice's strategy: honest, basis-flip, decoy-sub, deferred,
    /// deferred-ancilla, zeta-prime, zeta-p.
    #[arg(long, default_value = "honest")]
    alice: String,
    /// Bob's strategy: honest, bob-bias, bob-informed-marked,
    /// bob-informed-nondecoy, bob-probe, bob-uninformed.
    #[arg(long, default_value = "honest")]
    bob: String,
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 64)]
    p: usize,
    #[arg(long, default_value_t = 64)]
    q: usize,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Mixing-test deviation multiplier.
    #[arg(long, default_value_t = 4.0)]
    threshold: f64,
    /// `bb84` or `haar`.
    #[arg(long, default_value = "bb84")]
    decoy_policy: String,
    /// One swept field, e.g. `m=2,4,6`.
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Output file; stdout if absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    single_thread: bool,
    /// Outcome policy for zeta-p: plus, cross, random, zeros.
    #[arg(long, default_value = "plus")]
    zeta_policy: String,
    /// Preparation for bob-bias: zero-plus, zero-cross, basis-dependent, honest.
    #[arg(long, default_value = "zero-plus")]
    bias_policy: String,
    /// Basis for the zeta control measurement: `+` or `x`.
    #[arg(long, default_value = "+")]
    control_basis: String,
    /// Record wall time in the `ms` column.
    #[arg(long)]
    timing: bool,
    /// Print a strong/weak classification of the sweep to stderr.
    #[arg(long)]
    classify: bool,
    /// Write per-run transcripts (honest runs only) as JSON lines.
    #[arg(long)]
    transcripts: Option<PathBuf>,
}

fn unknown(kind: &'static str, value: &str) -> ConfigError {
    ConfigError::Unknown {
        kind,
        value: value.to_owned(),
    }
}

fn build(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let mut c = ExperimentConfig {
        protocol: cli.protocol.parse::<Protocol>()?,
        alice: AliceStrategy::from_id(&cli.alice).ok_or_else(|| unknown("alice strategy", &cli.alice))?,
        bob: BobStrategy::from_id(&cli.bob).ok_or_else(|| unknown("bob strategy", &cli.bob))?,
        m: cli.m,
        n: cli.n,
        p: cli.p,
        q: cli.q,
        trials: cli.trials,
        seed: cli.seed,
        threshold: cli.threshold,
        decoy_policy: parse_decoy_policy(&cli.decoy_policy)?,
        zeta_policy: ZetaPolicy::from_id(&cli.zeta_policy)
            .ok_or_else(|| unknown("zeta policy", &cli.zeta_policy))?,
        bias_policy: BiasPolicy::from_id(&cli.bias_policy)
            .ok_or_else(|| unknown("bias policy", &cli.bias_policy))?,
        control_basis: cli
            .control_basis
            .chars()
            .next()
            .filter(|_| cli.control_basis.chars().count() == 1)
            .and_then(Basis::from_symbol)
            .ok_or_else(|| unknown("basis", &cli.control_basis))?,
        sweep: cli.sweep.as_deref().map(str::parse::<Sweep>).transpose()?,
        single_thread: cli.single_thread,
        timing: cli.timing,
        ..ExperimentConfig::default()
    };
    if let Some(jobs) = cli.jobs {
        c.jobs = jobs;
    }
    c.validate()?;
    Ok(c)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let config = match build(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("qbc: configuration error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(path) = &cli.transcripts {
        let file = match std::fs::File::create(path) {
            Ok(f) => f,
            Err(e) => {
                eprintln!("qbc: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        };
        if let Err(e) = write_transcripts(&config, file) {
            eprintln!("qbc: {}: {e}", path.display());
            return ExitCode::from(match e {
                qbc_harness::output::TranscriptError::Config(_) => 1,
                _ => 2,
            });
        }
    }
    let rows = match run_experiment(&config) {
        Ok(rows) => rows,
        Err(e) => {
            eprintln!("qbc: configuration error: {e}");
            return ExitCode::from(1);
        }
    };
    let format = match cli.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Text => Format::Text,
    };
    if let Err(e) = emit(&rows, format, cli.output.as_deref()) {
        eprintln!("qbc: {e}");
        return ExitCode::from(2);
    }
    if cli.classify {
        match classify_security(&rows) {
            Ok(report) => eprintln!("{report}"),
            Err(e) => {
                eprintln!("qbc: configuration error: {e}");
                return ExitCode::from(1);
            }
        }
    }
    ExitCode::SUCCESS
}
