//! The `probstrat` command line: argument parsing, dispatch and the JSON
//! envelope on standard output.

pub mod commands;
pub mod config;
pub mod input;
pub mod interactive;
pub mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::{Config, Overrides};

#[derive(Parser, Debug)]
#[command(name = "probstrat", version, about = "Trace semantics, equivalences, normal forms and games for probabilistic I/O programs")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalArgs {
    /// Tolerance, as `a/b` or `2^-k`.
    #[arg(long, global = true)]
    pub eps: Option<String>,
    /// Number of outputs explored along plays.
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Rounds of interleaving or impersonation.
    #[arg(long, global = true)]
    pub rounds: Option<usize>,
    /// How many generator instances are spot-checked.
    #[arg(long = "g", global = true)]
    pub g: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// `key = value` config file; defaults to $PROBSTRAT_CONFIG.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Signature file; defaults to a `.sig` file next to the program.
    #[arg(long, global = true)]
    pub sig: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Bisim,
    Trace,
    Tensor,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Form {
    Shallow,
    Light,
    Ff,
    Wf,
    Steady,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Value of the trace semantics on plays.
    Trace {
        prog: PathBuf,
        #[arg(long = "play", required = true)]
        plays: Vec<String>,
    },
    /// Plays with positive value, up to `--depth` outputs.
    Support {
        prog: PathBuf,
        /// Inputs tried after ω-ary outputs.
        #[arg(long, default_value_t = 4)]
        omega_inputs: u64,
    },
    /// Compare two programs.
    Equiv {
        m: PathBuf,
        n: PathBuf,
        #[arg(long, value_enum, default_value = "trace")]
        mode: Mode,
    },
    /// Rewrite a program into a normal form.
    Normalize {
        prog: PathBuf,
        #[arg(long, value_enum)]
        form: Form,
        /// Components listed for generated forms.
        #[arg(long, default_value_t = 4)]
        show: u64,
    },
    /// Find `N` with `M ≡ L +_p N`.
    Subsplit {
        m: PathBuf,
        l: PathBuf,
        #[arg(long)]
        p: String,
    },
    /// Certify that `N` impersonates the light form of `M`.
    Impersonate { m: PathBuf, n: PathBuf },
    /// Play against a counterstrategy, in batch or at the terminal.
    Play {
        prog: PathBuf,
        /// Counterstrategy file; the adversary is used when absent.
        #[arg(long)]
        cs: Option<PathBuf>,
        #[arg(long)]
        interactive: bool,
        /// Sampled plays in batch mode.
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Rounds per play; defaults to `--depth`.
        #[arg(long)]
        max_steps: Option<usize>,
    },
    /// Continuation probabilities under a given and an adversarial
    /// counterstrategy.
    Victorious {
        prog: PathBuf,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        cs: Option<PathBuf>,
    },
    /// Sampled plays with their outcomes.
    Sample {
        prog: PathBuf,
        #[arg(long)]
        cs: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long)]
        max_steps: Option<usize>,
    },
    /// Run the acceptance suite.
    Selftest {
        /// Only these criteria (1 to 10).
        #[arg(long)]
        only: Vec<usize>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Trace { .. } => "trace",
            Command::Support { .. } => "support",
            Command::Equiv { .. } => "equiv",
            Command::Normalize { .. } => "normalize",
            Command::Subsplit { .. } => "subsplit",
            Command::Impersonate { .. } => "impersonate",
            Command::Play { .. } => "play",
            Command::Victorious { .. } => "victorious",
            Command::Sample { .. } => "sample",
            Command::Selftest { .. } => "selftest",
        }
    }
}

/// Exit codes: 0 equivalent or ok, 1 distinguished or failed, 2
/// inconclusive, usage or input error.
pub fn run(cli: Cli) -> ExitCode {
    let g = &cli.global;
    let overrides = Overrides { eps: g.eps.clone(), depth: g.depth, rounds: g.rounds, g: g.g, seed: g.seed };
    let cfg = match Config::resolve(g.config.as_deref(), &overrides) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let start = Instant::now();
    match commands::dispatch(&cli.command, &cfg, g.sig.as_deref()) {
        Ok((payload, code)) => {
            let env = output::envelope(cli.command.name(), cfg.to_json(), payload, start.elapsed().as_millis());
            let text = serde_json::to_string_pretty(&env).expect("values serialize");
            // a closed pipe downstream is not an error of ours
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::from(code)
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &crate::error::CoreError) -> ExitCode {
    eprintln!("{}", output::diagnostic(e));
    ExitCode::from(2)
}

pub fn main() -> ExitCode {
    run(Cli::parse())
}
