use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "stickslip",
    version,
    about = "Stick-slip simulation and stability certificates for third-order relay feedback"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate every initial condition and write CSV/JSON artifacts.
    Simulate(SimulateArgs),
    /// Print the stability certificate as JSON.
    Stability(SourceArgs),
    /// Classify a grid of runs and emit one CSV row per run.
    Sweep(SweepArgs),
}

/// Where the parameters and initial conditions come from.
#[derive(Debug, Clone, Default, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).multiple(false)))]
pub struct SourceArgs {
    /// JSON scenario file.
    #[arg(long, group = "source", value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Built-in scenario: sec3_1, sec3_2a, sec3_2b, sec3_3.
    #[arg(long, group = "source", value_name = "NAME")]
    pub scenario: Option<String>,
    /// Polynomial coefficients.
    #[arg(long, group = "source", value_name = "A,B,C", value_parser = parse_triple, allow_hyphen_values = true)]
    pub params: Option<[f64; 3]>,
    /// Three distinct positive decay rates.
    #[arg(long = "roots-real", group = "source", value_name = "L1,L2,L3", value_parser = parse_triple)]
    pub roots_real: Option<[f64; 3]>,
    /// Real decay rate, natural frequency and damping of the pair.
    #[arg(long = "roots-complex", group = "source", value_name = "L1,W0,DELTA", value_parser = parse_triple)]
    pub roots_complex: Option<[f64; 3]>,
    /// Relay magnitude (defaults to 1 for inline parameters).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Initial condition; repeat for several runs. Replaces scenario initials.
    #[arg(long = "init", value_name = "C1,C2,C3", value_parser = parse_triple, allow_hyphen_values = true)]
    pub init: Vec<[f64; 3]>,
    /// End time in seconds.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Output sampling step in seconds.
    #[arg(long)]
    pub step: Option<f64>,
    /// Simulate even when ab ≤ c.
    #[arg(long = "allow-non-gas")]
    pub allow_non_gas: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Run only the N-th initial condition (1-based).
    #[arg(long, value_name = "N")]
    pub con: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Trajectory file format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Vary one parameter over an inclusive linear grid, e.g. lambda1=0.2:6:30.
    /// Names: a, b, c, gamma; rate1..rate3 (real roots); lambda1, omega0, delta (complex roots).
    #[arg(long, value_name = "NAME=START:END:N")]
    pub vary: Option<String>,
    /// Refuse grids with more runs than this.
    #[arg(long = "max-runs", default_value_t = 10_000)]
    pub max_runs: usize,
    /// Write the table here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

pub fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got {s:?}"));
    }
    let mut out = [0.0; 3];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse::<f64>().map_err(|e| format!("{p:?}: {e}"))?;
        if !slot.is_finite() {
            return Err(format!("{p:?} is not finite"));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triples() {
        assert_eq!(parse_triple("0,0.5,0").unwrap(), [0.0, 0.5, 0.0]);
        assert_eq!(parse_triple("6.25, 2.5, -4.5").unwrap(), [6.25, 2.5, -4.5]);
        assert!(parse_triple("1,2").is_err());
        assert!(parse_triple("1,2,x").is_err());
        assert!(parse_triple("1,2,inf").is_err());
    }

    #[test]
    fn negative_initials_parse() {
        let cli = Cli::try_parse_from([
            "stickslip",
            "simulate",
            "--params",
            "1.5,0.66,0.08",
            "--init",
            "-1,0.5,0",
        ])
        .unwrap();
        let Command::Simulate(args) = cli.command else { panic!() };
        assert_eq!(args.source.init, vec![[-1.0, 0.5, 0.0]]);
    }

    #[test]
    fn sources_are_exclusive_and_required() {
        assert!(Cli::try_parse_from(["stickslip", "stability"]).is_err());
        assert!(Cli::try_parse_from(["stickslip", "stability", "--scenario", "sec3_1", "--params", "1,1,1"]).is_err());
    }
}
