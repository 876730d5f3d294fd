use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mecsched::experiment::{analyze, simulate, sweep};
use mecsched::frontier::frontier;
use mecsched::output::{write_csv, CsvRow};
use mecsched::{load_config, parse_config, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "mecsched",
    version,
    about = "Cache-aware MEC task scheduling simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One run per seed; one CSV row per seed.
    Simulate(Common),
    /// Runs every value of `sweep_axis` for every seed.
    Sweep(Common),
    /// Finds the throughput meeting a delay target on an (f_local, cache) grid.
    Frontier {
        #[command(flatten)]
        common: Common,
        /// Target mean task delay in seconds.
        #[arg(long)]
        target_delay: Option<f64>,
        /// Accepted deviation from the target, seconds.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Prints the closed-form expectations, regime and gap bounds.
    Analyze(Common),
}

#[derive(Args)]
struct Common {
    /// Config file (key = value lines); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated seeds, e.g. 1,2,3.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Fraction of leading slots excluded from metrics.
    #[arg(long)]
    warmup_frac: Option<f64>,
    /// Per-key override, repeatable: --set lambda=0.3
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn load(&self, extra: Vec<String>) -> Result<ExperimentConfig, CliError> {
        let mut overrides = self.overrides.clone();
        if let Some(seeds) = &self.seeds {
            let list: Vec<String> = seeds.iter().map(u64::to_string).collect();
            overrides.push(format!("seeds=[{}]", list.join(",")));
        }
        if let Some(w) = self.warmup_frac {
            overrides.push(format!("warmup_frac={w:?}"));
        }
        overrides.extend(extra);
        match &self.config {
            Some(path) => load_config(path, &overrides),
            None => parse_config("", &overrides),
        }
    }

    fn sink(&self) -> Result<Box<dyn Write>, CliError> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(io::stdout().lock()),
        })
    }

    fn emit<R: CsvRow>(&self, rows: &[R]) -> Result<(), CliError> {
        write_csv(rows, self.sink()?)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(c) => {
            let cfg = c.load(vec![])?;
            let rows: Vec<_> = simulate(&cfg)?.into_iter().map(|r| r.row).collect();
            c.emit(&rows)
        }
        Command::Sweep(c) => {
            let cfg = c.load(vec![])?;
            c.emit(&sweep(&cfg)?)
        }
        Command::Frontier {
            common,
            target_delay,
            tolerance,
        } => {
            let mut extra = vec![];
            if let Some(t) = target_delay {
                extra.push(format!("target_delay_s={t:?}"));
            }
            if let Some(t) = tolerance {
                extra.push(format!("delay_tolerance_s={t:?}"));
            }
            let cfg = common.load(extra)?;
            common.emit(&frontier(&cfg)?)
        }
        Command::Analyze(c) => {
            let cfg = c.load(vec![])?;
            let report = analyze(&cfg)?;
            print!("{}", report.human());
            if c.out.is_none() {
                println!();
            }
            c.emit(&report.rows())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
