//! Command implementations behind the `ttcomplete` binary.
//!
//! Exit codes: 0 certified or success, 1 usage or parse error, 2 sampling
//! assumption violated, 3 falsified, 4 unknown, 5 non-generic instance.

pub mod args;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use ttcomplete::bounds::{curve, curves_csv, curves_svg, phase_sweep, sweep_csv, RankTemplate};
use ttcomplete::checker::{
    assess, check_finite_constraint, check_unique_constraint, independence_capacity, CheckKind,
    CompletabilityReport, SearchBudget, Verdict,
};
use ttcomplete::oracle::{
    count_completions, jacobian_ranks, CompletionOptions, PolynomialSystem, RankOptions,
};
use ttcomplete::pattern::{build_constraint_tensor, parse_pattern_file, PatternFile, PivotRule};
use ttcomplete::tensor::{completion_dimension, write_tensor_file, RankVector, Shape};
use ttcomplete::Error;

use args::{BoundsArgs, CheckArgs, Cli, Command, Common, ConstraintArgs, Format, OracleArgs, PivotChoice, SweepArgs, Template};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_ASSUMPTION: i32 = 2;
pub const EXIT_FALSIFIED: i32 = 3;
pub const EXIT_UNKNOWN: i32 = 4;
pub const EXIT_GENERICITY: i32 = 5;

#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_PARSE,
            message: message.into(),
        }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Assumption1Violated { .. } => EXIT_ASSUMPTION,
        Error::SingularPivotSystem { .. }
        | Error::SingularCanonicalBlock { .. }
        | Error::CanonicalFormUnavailable { .. } => EXIT_GENERICITY,
        Error::NoFitFound | Error::PreconditionNotDependent { .. } => EXIT_UNKNOWN,
        _ => EXIT_PARSE,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

/// Result of one command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(code: i32, stdout: String) -> Self {
        Outcome {
            code,
            stdout,
            stderr: String::new(),
        }
    }
}

/// Parses `argv` and runs the command. Help and version exit 0 on stdout;
/// every error goes to stderr.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    use clap::Parser;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: EXIT_PARSE,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome::ok(EXIT_OK, text)
            };
        }
    };
    let res = match cli.command {
        Command::Constraint(a) => cmd_constraint(&a),
        Command::Check(a) => cmd_check(&a),
        Command::Bounds(a) => cmd_bounds(&a),
        Command::Oracle(a) => cmd_oracle(&a),
        Command::Sweep(a) => cmd_sweep(&a),
    };
    res.unwrap_or_else(|e| Outcome {
        code: e.code,
        stdout: String::new(),
        stderr: format!("error: {e}\n"),
    })
}

fn validate(c: &Common) -> Result<(), CliError> {
    if !(c.tol > 0.0 && c.tol < 1.0) {
        return Err(CliError::usage(format!("--tol must lie in (0,1), got {}", c.tol)));
    }
    if c.seeds.is_empty() {
        return Err(CliError::usage("--seeds is empty"));
    }
    Ok(())
}

fn read_pattern(path: &Path) -> Result<PatternFile, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    parse_pattern_file(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn resolve_rank(c: &Common, file: Option<&RankVector>) -> Result<RankVector, CliError> {
    match (&c.rank, file) {
        (Some(r), _) => RankVector::new(r.clone()).map_err(|e| CliError::usage(e.to_string())),
        (None, Some(r)) => Ok(r.clone()),
        (None, None) => Err(CliError::usage("no rank given: use --rank or a `rank` line")),
    }
}

fn pivot_rule(file: &PatternFile, choice: PivotChoice, seeds: &[u64]) -> PivotRule {
    match (&file.pivots, choice) {
        (Some(p), _) => PivotRule::Explicit(p.clone()),
        (None, PivotChoice::Lex) => PivotRule::Lexicographic,
        (None, PivotChoice::Random) => PivotRule::SeededRandom(seeds[0]),
    }
}

fn budget(b: Option<u64>, seeds: &[u64]) -> Result<SearchBudget, CliError> {
    let mut out = SearchBudget {
        seed: seeds[0],
        ..SearchBudget::default()
    };
    if let Some(n) = b {
        if n == 0 {
            return Err(CliError::usage("--budget must be positive"));
        }
        out.max_nodes = n;
        out.max_subsets = n;
        out.random_trials = n.min(out.random_trials);
    }
    Ok(out)
}

/// Writes through a temporary file and a rename so readers never see a
/// partial file.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::usage(format!("cannot write {}: {e}", path.display()));
    let tmp = path.with_extension("partial");
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(contents.as_bytes()).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

/// Sends `files` to `out` when given, else concatenates them for stdout.
fn emit(out: Option<&PathBuf>, files: &[(String, String)]) -> Result<String, CliError> {
    match out {
        None => Ok(files.iter().map(|(_, body)| body.as_str()).collect()),
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::usage(format!("cannot create {}: {e}", dir.display())))?;
            let mut log = String::new();
            for (name, body) in files {
                let path = dir.join(name);
                write_atomic(&path, body)?;
                let _ = writeln!(log, "wrote {}", path.display());
            }
            Ok(log)
        }
    }
}

pub fn cmd_constraint(a: &ConstraintArgs) -> Result<Outcome, CliError> {
    validate(&a.common)?;
    let file = read_pattern(&a.pattern)?;
    let rank = resolve_rank(&a.common, file.rank.as_ref())?;
    let rule = pivot_rule(&file, a.pivots, &a.common.seeds);
    let ct = build_constraint_tensor(&file.pattern, &rank, &rule, a.force)?;
    let (name, body) = match a.common.format.unwrap_or(Format::Csv) {
        Format::Csv => ("constraint.csv", ct.to_csv()),
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "columns: {}", ct.num_columns());
            let _ = writeln!(s, "required: {}", completion_dimension(file.pattern.shape(), &rank).max(0));
            let excluded: Vec<String> = ct.excluded_slices().iter().map(|s| (s + 1).to_string()).collect();
            let _ = writeln!(s, "excluded_slices: {}", excluded.join(" "));
            let _ = writeln!(s, "support: {}", ct.support_text());
            ("constraint.txt", s)
        }
        Format::Svg => return Err(CliError::usage("constraint supports csv or text")),
    };
    Ok(Outcome::ok(EXIT_OK, emit(a.common.out.as_ref(), &[(name.into(), body)])?))
}

fn verdict_code(r: &CompletabilityReport) -> i32 {
    match r.verdict {
        Verdict::UniquelyCompletable => EXIT_OK,
        Verdict::FinitelyCompletable if r.check == CheckKind::Finite => EXIT_OK,
        Verdict::FinitelyCompletable | Verdict::Unknown => EXIT_UNKNOWN,
        Verdict::NotGuaranteed => EXIT_ASSUMPTION,
        Verdict::Falsified => EXIT_FALSIFIED,
    }
}

pub fn cmd_check(a: &CheckArgs) -> Result<Outcome, CliError> {
    validate(&a.common)?;
    let file = read_pattern(&a.pattern)?;
    let rank = resolve_rank(&a.common, file.rank.as_ref())?;
    let rule = pivot_rule(&file, a.pivots, &a.common.seeds);
    let budget = budget(a.budget, &a.common.seeds)?;
    let kind = if a.unique { CheckKind::Unique } else { CheckKind::Finite };
    let report = if a.force {
        let ct = build_constraint_tensor(&file.pattern, &rank, &rule, true)?;
        match kind {
            CheckKind::Finite => check_finite_constraint(&ct, &budget),
            CheckKind::Unique => check_unique_constraint(&ct, &budget),
        }
    } else {
        assess(&file.pattern, &rank, &rule, kind, &budget)?
    };
    let (name, body) = match a.common.format.unwrap_or(Format::Text) {
        Format::Text => ("report.txt", report.to_text()),
        Format::Csv => (
            "report.csv",
            format!("{}\n{}\n", CompletabilityReport::CSV_HEADER, report.to_csv_row()),
        ),
        Format::Svg => return Err(CliError::usage("check supports text or csv")),
    };
    Ok(Outcome::ok(verdict_code(&report), emit(a.common.out.as_ref(), &[(name.into(), body)])?))
}

pub fn cmd_bounds(a: &BoundsArgs) -> Result<Outcome, CliError> {
    validate(&a.common)?;
    if !(a.eps > 0.0 && a.eps < 1.0) {
        return Err(CliError::usage(format!("--eps must lie in (0,1), got {}", a.eps)));
    }
    let (template, default_rs, name) = match a.template {
        Template::Fig1 => (RankTemplate::fig1(), (1..=80).collect::<Vec<_>>(), "fig1"),
        Template::Fig2 => (RankTemplate::fig2(), (1..=20).collect(), "fig2"),
        Template::Custom => {
            let c = a
                .common
                .rank
                .clone()
                .ok_or_else(|| CliError::usage("--template custom needs --rank multipliers"))?;
            if c.len() < 2 || c.contains(&0) {
                return Err(CliError::usage("custom rank multipliers need d - 1 >= 2 positive entries"));
            }
            (RankTemplate::Linear(c), vec![1], "custom")
        }
    };
    let rs = a.r.clone().unwrap_or(default_rs);
    let rows = curve(&template, a.n, a.eps, rs)?;
    let (file, body) = match a.common.format.unwrap_or(Format::Csv) {
        Format::Csv => (format!("bounds_{name}.csv"), curves_csv(&rows)),
        Format::Svg => (
            format!("bounds_{name}.svg"),
            curves_svg(&rows, &format!("sample bounds, template {name}, n = {}, eps = {}", a.n, a.eps)),
        ),
        Format::Text => return Err(CliError::usage("bounds supports csv or svg")),
    };
    Ok(Outcome::ok(EXIT_OK, emit(a.common.out.as_ref(), &[(file, body)])?))
}

pub fn cmd_oracle(a: &OracleArgs) -> Result<Outcome, CliError> {
    validate(&a.common)?;
    if a.trials == 0 {
        return Err(CliError::usage("--trials must be positive"));
    }
    let file = read_pattern(&a.pattern)?;
    let rank = resolve_rank(&a.common, file.rank.as_ref())?;
    let seeds = &a.common.seeds;
    let mut files = Vec::new();
    let mut s = String::new();
    if a.jacobian_rank {
        let rule = pivot_rule(&file, PivotChoice::Lex, seeds);
        let ct = build_constraint_tensor(&file.pattern, &rank, &rule, false)?;
        let sys = PolynomialSystem::new(&ct)?;
        let cols: Vec<usize> = match &a.columns {
            None => (0..ct.num_columns()).collect(),
            Some(c) => {
                if let Some(bad) = c.iter().find(|&&k| k == 0 || k > ct.num_columns()) {
                    return Err(CliError::usage(format!("column {bad} outside 1..={}", ct.num_columns())));
                }
                c.iter().map(|k| k - 1).collect()
            }
        };
        let mut per_seed = Vec::new();
        for &seed in seeds {
            let opts = RankOptions {
                trials: a.trials,
                tolerance: a.common.tol,
                seed,
            };
            per_seed.push(jacobian_ranks(&sys, &cols, &opts)?);
        }
        let rank_max = per_seed.iter().flatten().copied().max().unwrap_or(0);
        let t = cols.len();
        let _ = writeln!(s, "polynomials: {}", sys.num_polynomials());
        let _ = writeln!(s, "variables: {}", sys.num_variables());
        let _ = writeln!(s, "selected: {t}");
        let _ = writeln!(s, "jacobian_rank: {rank_max}");
        let _ = writeln!(s, "capacity: {}", independence_capacity(&cols, &ct));
        let _ = writeln!(s, "rank_deficit: {}", t - rank_max.min(t));
        let _ = writeln!(s, "finite_rank: {}", rank_max == sys.num_variables());
        for (seed, ranks) in seeds.iter().zip(&per_seed) {
            let r: Vec<String> = ranks.iter().map(usize::to_string).collect();
            let _ = writeln!(s, "seed {seed}: {}", r.join(" "));
        }
    } else {
        let values = file
            .observed_values()
            .ok_or_else(|| CliError::usage("--count needs a `value` line for every observed entry"))?;
        let opts = CompletionOptions {
            restarts: a.restarts,
            cluster_tol: a.cluster_tol,
            seed: seeds[0],
            ..CompletionOptions::default()
        };
        let count = count_completions(&file.pattern, &values, &rank, &opts)?;
        let _ = writeln!(s, "clusters: {}", count.count());
        let _ = writeln!(s, "converged: {}/{}", count.converged, count.restarts);
        let _ = writeln!(s, "locally_rigid: {}", count.locally_rigid);
        for (k, c) in count.clusters.iter().enumerate() {
            let _ = writeln!(s, "cluster {}: members {} residual {:e}", k + 1, c.members, c.residual);
            files.push((format!("cluster_{}.tensor", k + 1), write_tensor_file(&c.representative, Some(&rank))));
        }
    }
    let mut out = vec![("oracle.txt".to_string(), s)];
    if a.common.out.is_some() {
        out.extend(files);
    }
    Ok(Outcome::ok(EXIT_OK, emit(a.common.out.as_ref(), &out)?))
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<Outcome, CliError> {
    validate(&a.common)?;
    let shape = Shape::new(a.shape.clone())?;
    let rank = resolve_rank(&a.common, None)?;
    let budget = budget(a.budget, &a.common.seeds)?;
    let rows = phase_sweep(&shape, &rank, &a.p_grid, &a.common.seeds, &budget)?;
    if !matches!(a.common.format, None | Some(Format::Csv)) {
        return Err(CliError::usage("sweep supports csv"));
    }
    Ok(Outcome::ok(EXIT_OK, emit(a.common.out.as_ref(), &[("sweep.csv".into(), sweep_csv(&rows))])?))
}
