use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gf_flush_cli::{exit, run_campaign, run_simulation, CampaignError, Format, Mode, RawConfig};

#[derive(Parser)]
#[command(
    name = "gf-flush",
    version,
    about = "Recover the LFSR seed of a dynamically obfuscated scan chain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Query the oracle with the attack protocol and print the observations.
    Simulate(Options),
    /// Attack a chain with direct scan-out access.
    Attack(Options),
    /// Attack a chain whose outputs are compacted by a MISR.
    AttackMisr(Options),
    /// Attack and compare the candidate set against exhaustive search.
    BruteCheck(Options),
    /// Timed attack sweep over several key lengths.
    Bench(Options),
}

#[derive(Args)]
struct Options {
    /// TOML experiment file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<usize>,
    #[arg(long)]
    h: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    /// Disable the shadow chain.
    #[arg(long)]
    no_shadow: bool,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    rng_seed: Option<u64>,
    /// Maximum number of candidate seeds to enumerate.
    #[arg(long)]
    cap: Option<usize>,
    /// Per-trial time limit in seconds (fractional allowed).
    #[arg(long)]
    timeout_secs: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Options {
    fn raw_config(&self, mode: Mode) -> Result<RawConfig, String> {
        let mut raw = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                RawConfig::from_toml(&text).map_err(|e| e.to_string())?
            }
            None => RawConfig::default(),
        };
        raw.mode = Some(mode);
        raw.lambda = self.lambda.or(raw.lambda);
        raw.h = self.h.or(raw.h);
        raw.b = self.b.or(raw.b);
        if self.no_shadow {
            raw.shadow = Some(false);
        }
        raw.trials = self.trials.or(raw.trials);
        raw.rng_seed = self.rng_seed.or(raw.rng_seed);
        raw.cap = self.cap.or(raw.cap);
        raw.timeout_secs = self.timeout_secs.or(raw.timeout_secs);
        raw.workers = self.workers.or(raw.workers);
        Ok(raw)
    }

    fn writer(&self) -> io::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(io::stdout().lock()),
        })
    }
}

fn run(mode: Mode, opts: &Options) -> i32 {
    let config = match opts
        .raw_config(mode)
        .and_then(|raw| raw.validate().map_err(|e| e.to_string()))
    {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit::INVALID_CONFIG;
        }
    };
    let out = match opts.writer() {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: cannot open output: {e}");
            return exit::INVALID_CONFIG;
        }
    };

    if mode == Mode::Simulate {
        return match run_simulation(&config) {
            Ok(records) => report(gf_flush_cli::emit_results(&records, opts.format, out)),
            Err(e) => campaign_failure(e),
        };
    }

    match run_campaign(&config) {
        Ok(campaign) => {
            eprint!("{}", campaign.summary);
            let code = report(gf_flush_cli::emit_results(&campaign.records, opts.format, out));
            if code == exit::SUCCESS && campaign.summary.all_timed_out() {
                eprintln!("error: every trial timed out");
                return exit::ALL_TIMED_OUT;
            }
            code
        }
        Err(e) => campaign_failure(e),
    }
}

fn report(result: Result<(), gf_flush_cli::report::ReportError>) -> i32 {
    match result {
        Ok(()) => exit::SUCCESS,
        Err(e) => {
            eprintln!("error: writing results: {e}");
            exit::INVALID_CONFIG
        }
    }
}

fn campaign_failure(e: CampaignError) -> i32 {
    eprintln!("error: {e}");
    match e {
        CampaignError::ModelMismatch { .. } => exit::MODEL_MISMATCH,
        _ => exit::INVALID_CONFIG,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, opts) = match &cli.command {
        Command::Simulate(o) => (Mode::Simulate, o),
        Command::Attack(o) => (Mode::Attack, o),
        Command::AttackMisr(o) => (Mode::AttackMisr, o),
        Command::BruteCheck(o) => (Mode::BruteCheck, o),
        Command::Bench(o) => (Mode::Bench, o),
    };
    ExitCode::from(run(mode, opts) as u8)
}
