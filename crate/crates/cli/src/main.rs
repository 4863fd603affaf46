mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Command;
use config::RunConfig;
use report::Report;

/// Simulator and verifier for transversal quantum secret sharing.
#[derive(Parser)]
#[command(name = "qsslab", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Check the encoding ladder's conjugation rules over a range of sizes.
    VerifyLadder,
    /// Deal a secret, run a script on the shares, reconstruct every branch.
    Run,
    /// Symbolic secret-independence audit of coalitions.
    Audit,
    /// Toffoli gadget checks, in plaintext and on shares.
    Gadget,
}

#[derive(Args)]
struct Flags {
    /// Config file: a JSON object or key = value lines. Flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Number of participants.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Strict mode: secret rows s = 3k.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Strict mode: ancilla rows t = 3k'.
    #[arg(long, global = true)]
    kprime: Option<usize>,
    /// Relaxed mode: secret rows.
    #[arg(long, global = true)]
    s: Option<usize>,
    /// Relaxed mode: ancilla rows, a multiple of 3.
    #[arg(long, global = true)]
    t: Option<usize>,
    /// Force strict mode.
    #[arg(long, global = true)]
    strict: bool,
    /// Ladder sizes, inclusive, e.g. 2..64.
    #[arg(long, global = true)]
    m_range: Option<String>,
    /// Largest ladder size cross-checked with dense matrices.
    #[arg(long, global = true)]
    dense_max: Option<usize>,
    /// Coalition such as "alice,1,2".
    #[arg(long, global = true)]
    coalition: Option<String>,
    /// exact or sampled.
    #[arg(long, global = true)]
    mode: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the command's main tolerance.
    #[arg(long, global = true, allow_negative_numbers = true)]
    tolerance: Option<f64>,
    /// Random inputs for the plaintext gadget check.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Secret file (JSON amplitudes or Pauli coefficients).
    #[arg(long, global = true)]
    secret: Option<PathBuf>,
    /// Script file in the circuit line format.
    #[arg(long, global = true)]
    script: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

impl Flags {
    fn into_config(self) -> (Option<PathBuf>, RunConfig) {
        let cfg = RunConfig {
            n: self.n,
            k: self.k,
            kprime: self.kprime,
            s: self.s,
            t: self.t,
            strict: self.strict.then_some(true),
            m_range: self.m_range,
            dense_max: self.dense_max,
            coalition: self.coalition,
            mode: self.mode,
            seed: self.seed,
            tolerance: self.tolerance,
            samples: self.samples,
            secret: self.secret,
            script: self.script,
            out: self.out,
        };
        (self.config, cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Sub::VerifyLadder => Command::VerifyLadder,
        Sub::Run => Command::Run,
        Sub::Audit => Command::Audit,
        Sub::Gadget => Command::Gadget,
    };
    let (file, flags) = cli.flags.into_config();
    let merged = match file {
        Some(path) => RunConfig::from_file(&path).map(|f| f.overlay(flags.clone())),
        None => Ok(flags.clone()),
    };
    let report = match merged {
        Ok(cfg) => commands::execute(command, cfg),
        Err(e) => Report::new(command.name(), flags).failed_with(&e),
    };

    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match &report.config.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &json) {
                eprintln!("qsslab: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
            println!("{}: {:?}", report.command, report.verdict);
        }
        None => print!("{json}"),
    }
    if let Some(err) = &report.error {
        eprintln!("qsslab: {} error: {}", err.kind, err.message);
    }
    ExitCode::from(report.exit_code() as u8)
}
