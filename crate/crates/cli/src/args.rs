use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

// Aliases keep clap from treating these as repeated single values.
pub type UsizeList = Vec<usize>;
pub type SeedList = Vec<u64>;
pub type Grid = Vec<f64>;

#[derive(Debug, Parser)]
#[command(name = "ttcomplete", version, about = "Finite and unique completability of TT-rank tensors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the constraint tensor of a pattern file.
    Constraint(ConstraintArgs),
    /// Check finite or unique completability.
    Check(CheckArgs),
    /// Evaluate the sample-complexity bounds along a rank family.
    Bounds(BoundsArgs),
    /// Jacobian rank or completion count on a pattern file.
    Oracle(OracleArgs),
    /// Verdict rates of random patterns across sampling probabilities.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Text,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PivotChoice {
    /// First observed cells of each slice.
    Lex,
    /// Seeded random cells, seed taken from `--seeds`.
    Random,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TT rank `r1,r2,...`; overrides the `rank` line of the input.
    #[arg(long, value_parser = parse_usize_list)]
    pub rank: Option<UsizeList>,
    /// Relative numerical tolerance in (0,1).
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Seeds as a list of integers and half-open ranges, e.g. `0..50,99`.
    #[arg(long, value_parser = parse_seeds, default_value = "0")]
    pub seeds: SeedList,
    /// Output directory; results go to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct ConstraintArgs {
    pub pattern: PathBuf,
    #[command(flatten)]
    pub common: Common,
    /// Skip slices with too few samples instead of failing.
    #[arg(long)]
    pub force: bool,
    /// Pivot rule when the file lists no `pivot` lines.
    #[arg(long, value_enum, default_value_t = PivotChoice::Lex)]
    pub pivots: PivotChoice,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub pattern: PathBuf,
    #[arg(long, conflicts_with = "unique", required_unless_present = "unique")]
    pub finite: bool,
    #[arg(long)]
    pub unique: bool,
    #[command(flatten)]
    pub common: Common,
    /// Search budget: selection nodes and subset-scan nodes.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub force: bool,
    #[arg(long, value_enum, default_value_t = PivotChoice::Lex)]
    pub pivots: PivotChoice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Template {
    Fig1,
    Fig2,
    Custom,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, value_enum)]
    pub template: Template,
    /// Common dimension size.
    #[arg(long, default_value_t = 1000)]
    pub n: u64,
    /// Failure probability in (0,1).
    #[arg(long, default_value_t = 0.001)]
    pub eps: f64,
    /// Values of r, e.g. `1..=80` or `3`; defaults to the template range.
    #[arg(long, value_parser = parse_r_range)]
    pub r: Option<UsizeList>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub pattern: PathBuf,
    /// Jacobian rank of the polynomial system.
    #[arg(long, conflicts_with = "count", required_unless_present = "count")]
    pub jacobian_rank: bool,
    /// Count distinct completions of the observed values.
    #[arg(long)]
    pub count: bool,
    #[command(flatten)]
    pub common: Common,
    /// 1-based constraint columns to test; all when absent.
    #[arg(long, value_parser = parse_usize_list)]
    pub columns: Option<UsizeList>,
    /// Random evaluation points per seed.
    #[arg(long, default_value_t = 3)]
    pub trials: usize,
    /// Least-squares restarts for `--count`.
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    /// Relative distance under which two completions coincide.
    #[arg(long, default_value_t = 1e-4)]
    pub cluster_tol: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Dimension sizes `n1,n2,...`.
    #[arg(long, value_parser = parse_usize_list)]
    pub shape: UsizeList,
    /// Sampling probabilities: a list or `start:stop:step`.
    #[arg(long, value_parser = parse_grid, default_value = "0.1:1.0:0.1")]
    pub p_grid: Grid,
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub budget: Option<u64>,
}

pub fn parse_usize_list(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a non-negative integer")))
        .collect()
}

pub fn parse_seeds(s: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for t in s.split(',').map(str::trim) {
        match t.split_once("..") {
            Some((a, b)) => {
                let a: u64 = a.parse().map_err(|_| format!("bad seed range `{t}`"))?;
                let b: u64 = b.parse().map_err(|_| format!("bad seed range `{t}`"))?;
                if b <= a {
                    return Err(format!("empty seed range `{t}`"));
                }
                out.extend(a..b);
            }
            None => out.push(t.parse().map_err(|_| format!("`{t}` is not a seed"))?),
        }
    }
    Ok(out)
}

pub fn parse_r_range(s: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("`{s}` is not an r value or range a..=b");
    match s.split_once("..=") {
        Some((a, b)) => {
            let (a, b): (usize, usize) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
            if a == 0 || b < a {
                return Err(bad());
            }
            Ok((a..=b).collect())
        }
        None => {
            let r: usize = s.parse().map_err(|_| bad())?;
            if r == 0 {
                return Err(bad());
            }
            Ok(vec![r])
        }
    }
}

pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
    let parts: Vec<&str> = s.split(':').collect();
    let grid = if parts.len() == 3 {
        let (a, b, h) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(h > 0.0) || b < a {
            return Err(format!("bad grid `{s}`"));
        }
        // Index-based steps avoid accumulating rounding error.
        let steps = ((b - a) / h + 1e-9).floor() as usize;
        (0..=steps).map(|k| a + k as f64 * h).map(|p| (p * 1e12).round() / 1e12).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(format!("probabilities in `{s}` must lie in [0,1]"));
    }
    Ok(grid)
}
