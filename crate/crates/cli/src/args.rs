use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "rrw-qbd", version, about = "QBD approximations of reflecting random walks with certified error bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check support, normalisation and irreducibility of a model file.
    Validate(CommonArgs),
    /// Mean drift of every region.
    Drifts(CommonArgs),
    /// Stability and negative face-drift verdicts.
    Stability(CommonArgs),
    /// Drift certificate: tilts and constants.
    Theta(ThetaArgs),
    /// Solve the QBD truncated at one cap height.
    Solve(SolveArgs),
    /// Error bounds and certified intervals for one or more cap heights.
    Bound(BoundArgs),
    /// Compare bounds with a brute-force reference solve.
    Verify(VerifyArgs),
    /// Batch-means simulation of the catalog functionals.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Model file (TOML).
    #[arg(long)]
    pub model: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Include wall-clock timings (makes reports non-reproducible).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct TiltArgs {
    /// Base tilt as `theta1,theta2`; searched when omitted.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub theta: Option<(f64, f64)>,
    /// Second tilt as `theta1,theta2`; found by ray search when omitted.
    #[arg(long = "theta-tilde", value_parser = parse_pair, allow_hyphen_values = true)]
    pub theta_tilde: Option<(f64, f64)>,
    /// Fraction of the largest feasible ray step used for the second tilt.
    #[arg(long, default_value_t = 0.9, value_parser = parse_unit)]
    pub kappa: f64,
}

#[derive(Debug, Args)]
pub struct ThetaArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub tilt: TiltArgs,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Cap height of the second coordinate.
    #[arg(long = "n", value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    /// Levels included in the marginal distributions.
    #[arg(long, default_value_t = 50)]
    pub levels: usize,
}

#[derive(Debug, Args)]
pub struct LevelArgs {
    /// Single cap height.
    #[arg(long = "n", conflicts_with = "n_list", value_parser = clap::value_parser!(u64).range(1..))]
    pub n: Option<u64>,
    /// Comma-separated cap heights [default: 5,10,20,40].
    #[arg(long = "n-list", value_delimiter = ',', value_parser = clap::value_parser!(u64).range(1..))]
    pub n_list: Vec<u64>,
    /// Relative tolerance of the tail sums.
    #[arg(long = "tail-tol", default_value_t = rrw_qbd::qbd::DEFAULT_TAIL_TOL, value_parser = parse_unit)]
    pub tail_tol: f64,
}

impl LevelArgs {
    /// Requested cap heights, sorted and deduplicated.
    pub fn levels(&self) -> Vec<usize> {
        let mut v: Vec<usize> = match (self.n, self.n_list.is_empty()) {
            (Some(n), _) => vec![n as usize],
            (None, false) => self.n_list.iter().map(|&n| n as usize).collect(),
            (None, true) => vec![5, 10, 20, 40],
        };
        v.sort_unstable();
        v.dedup();
        v
    }
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub tilt: TiltArgs,
    #[command(flatten)]
    pub levels: LevelArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub tilt: TiltArgs,
    #[command(flatten)]
    pub levels: LevelArgs,
    /// Side of the square reference window `{0..M}^2`.
    #[arg(long = "oracle-window", default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    pub oracle_window: u64,
    /// Growth of the window used to estimate the reference truncation gap.
    #[arg(long = "gap-delta", default_value_t = rrw_qbd::oracle::DEFAULT_GAP_DELTA as u64)]
    pub gap_delta: u64,
    /// Memory guard for the reference solve, in MiB.
    #[arg(long = "memory-limit-mib", default_value_t = 1024)]
    pub memory_limit_mib: usize,
    /// Side of the patch on which the drift inequality is checked.
    #[arg(long = "drift-window", default_value_t = 60)]
    pub drift_window: u64,
    /// Debug: multiply the certificate constant c by this factor.
    #[arg(long = "debug-corrupt-c", hide = true)]
    pub corrupt_c: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub tilt: TiltArgs,
    #[arg(long, default_value_t = 1_000_000)]
    pub steps: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Also report the QBD value at this cap height.
    #[arg(long = "n", value_parser = clap::value_parser!(u64).range(1..))]
    pub n: Option<u64>,
    #[arg(long = "tail-tol", default_value_t = rrw_qbd::qbd::DEFAULT_TAIL_TOL, value_parser = parse_unit)]
    pub tail_tol: f64,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `x,y`, got {s:?}"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

fn parse_unit(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{s:?}: {e}"))?;
    if x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err(format!("{x} is not in (0, 1)"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn pair_parsing() {
        assert_eq!(parse_pair("0.3, 0.4"), Ok((0.3, 0.4)));
        assert!(parse_pair("0.3").is_err());
        assert!(parse_pair("a,1").is_err());
    }

    #[test]
    fn unit_interval() {
        assert!(parse_unit("0.5").is_ok());
        assert!(parse_unit("0").is_err());
        assert!(parse_unit("1").is_err());
    }

    #[test]
    fn levels_sorted_and_defaulted() {
        let cli = Cli::parse_from(["rrw-qbd", "bound", "--model", "m.toml", "--n-list", "20,5,20"]);
        let Command::Bound(b) = cli.command else { panic!() };
        assert_eq!(b.levels.levels(), vec![5, 20]);
        let cli = Cli::parse_from(["rrw-qbd", "bound", "--model", "m.toml"]);
        let Command::Bound(b) = cli.command else { panic!() };
        assert_eq!(b.levels.levels(), vec![5, 10, 20, 40]);
    }
}
