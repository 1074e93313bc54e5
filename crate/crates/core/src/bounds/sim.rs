//! Monte Carlo companions to the bounds.

use std::fmt::Write;
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::checker::{assess, CheckKind, SearchBudget, Verdict};
use crate::error::{Error, Result};
use crate::pattern::{random_pattern, PivotRule};
use crate::tensor::{RankVector, Shape};

/// `p′ = k/n + n^{-1/4}`.
pub fn azuma_threshold(n_cells: usize, k: usize) -> f64 {
    let n = n_cells as f64;
    k as f64 / n + n.powf(-0.25)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AzumaResult {
    /// Fraction of seeds with more than `k` observed cells.
    pub fraction: f64,
    pub trials: usize,
    /// `p′` of the concentration lemma.
    pub threshold: f64,
    /// `1 − exp(−√n / 2)`, the guaranteed success rate when `p > p′`.
    pub guaranteed: f64,
}

impl AzumaResult {
    /// Binomial standard error of `fraction` around the guarantee.
    pub fn sigma(&self) -> f64 {
        let q = self.guaranteed;
        (q * (1.0 - q) / self.trials as f64).sqrt()
    }
}

fn parallel_map<T: Send, R: Send>(items: Vec<T>, f: impl Fn(T) -> R + Sync) -> Vec<R> {
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(items.len().max(1));
    let chunk = items.len().div_ceil(workers).max(1);
    let mut items = items;
    let mut chunks = Vec::new();
    while !items.is_empty() {
        let rest = items.split_off(chunk.min(items.len()));
        chunks.push(std::mem::replace(&mut items, rest));
    }
    thread::scope(|s| {
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|c| s.spawn(|| c.into_iter().map(&f).collect::<Vec<R>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

/// Draws `n_cells` Bernoulli(`p`) cells per seed and counts seeds with more
/// than `k` hits. Results depend only on the seed list.
pub fn azuma_column_check(n_cells: usize, k: usize, p: f64, seeds: &[u64]) -> Result<AzumaResult> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p must lie in [0,1], got {p}")));
    }
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("at least one seed is required".into()));
    }
    let hits = parallel_map(seeds.to_vec(), |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let observed = (0..n_cells).filter(|_| rng.random_bool(p)).count();
        observed > k
    });
    let passed = hits.iter().filter(|&&h| h).count();
    Ok(AzumaResult {
        fraction: passed as f64 / seeds.len() as f64,
        trials: seeds.len(),
        threshold: azuma_threshold(n_cells, k),
        guaranteed: 1.0 - (-(n_cells as f64).sqrt() / 2.0).exp(),
    })
}

pub const SWEEP_HEADER: &str = "p,trials,finite_rate,unique_rate,falsified_rate,unknown_rate,not_guaranteed_rate";

/// Verdict frequencies at one sampling probability.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub p: f64,
    pub trials: usize,
    /// Finite check certified.
    pub finite: usize,
    /// Unique check certified.
    pub unique: usize,
    /// Finite check falsified.
    pub falsified: usize,
    /// Finite check inconclusive.
    pub unknown: usize,
    /// Sampling assumption failed.
    pub not_guaranteed: usize,
}

impl SweepRow {
    pub fn rate(&self, count: usize) -> f64 {
        count as f64 / self.trials as f64
    }

    pub fn finite_rate(&self) -> f64 {
        self.rate(self.finite)
    }

    /// Binomial standard error of the finite rate.
    pub fn finite_sigma(&self) -> f64 {
        let q = self.finite_rate();
        (q * (1.0 - q) / self.trials as f64).sqrt()
    }
}

/// For each `p` and seed, draws a pattern and runs both checks with
/// lexicographic pivots. Patterns for one seed are nested in `p`.
pub fn phase_sweep(
    shape: &Shape,
    rank: &RankVector,
    p_grid: &[f64],
    seeds: &[u64],
    budget: &SearchBudget,
) -> Result<Vec<SweepRow>> {
    rank.validate_for(shape)?;
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("at least one seed is required".into()));
    }
    let jobs: Vec<(usize, u64)> = (0..p_grid.len()).flat_map(|i| seeds.iter().map(move |&s| (i, s))).collect();
    let outcomes = parallel_map(jobs, |(i, seed)| -> Result<(usize, Verdict, Verdict)> {
        let pattern = random_pattern(shape, p_grid[i], seed)?;
        let rule = PivotRule::Lexicographic;
        let finite = assess(&pattern, rank, &rule, CheckKind::Finite, budget)?.verdict;
        let unique = if finite == Verdict::FinitelyCompletable {
            assess(&pattern, rank, &rule, CheckKind::Unique, budget)?.verdict
        } else {
            finite
        };
        Ok((i, finite, unique))
    });
    let mut rows: Vec<SweepRow> = p_grid
        .iter()
        .map(|&p| SweepRow {
            p,
            trials: seeds.len(),
            finite: 0,
            unique: 0,
            falsified: 0,
            unknown: 0,
            not_guaranteed: 0,
        })
        .collect();
    for outcome in outcomes {
        let (i, finite, unique) = outcome?;
        let row = &mut rows[i];
        match finite {
            Verdict::FinitelyCompletable | Verdict::UniquelyCompletable => row.finite += 1,
            Verdict::Falsified => row.falsified += 1,
            Verdict::Unknown => row.unknown += 1,
            Verdict::NotGuaranteed => row.not_guaranteed += 1,
        }
        row.unique += usize::from(unique == Verdict::UniquelyCompletable);
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{:?},{},{:?},{:?},{:?},{:?},{:?}",
            r.p,
            r.trials,
            r.rate(r.finite),
            r.rate(r.unique),
            r.rate(r.falsified),
            r.rate(r.unknown),
            r.rate(r.not_guaranteed)
        );
    }
    s
}
