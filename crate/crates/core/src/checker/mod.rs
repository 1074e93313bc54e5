//! Combinatorial completability conditions on the constraint tensor.
//!
//! A selection of constraint-tensor columns passes the finiteness condition
//! when every nonempty subset of `t` columns has independence capacity
//! `Σ_i (r_{i-1} r_i m_i − r_i²)⁺ ≥ t`. Finite completability needs such a
//! selection of `M` columns; unique completability additionally needs
//! disjoint per-mode selections passing the per-mode inequality.

mod profile;
mod report;
mod search;

use crate::error::{Error, Result};
use crate::pattern::{build_constraint_tensor, ConstraintTensor, PivotRule, SamplingPattern};
use crate::tensor::{completion_dimension, RankVector};

use profile::RowProfile;
use search::{random_falsify, Capacity, Growth, Grower, ModeCondition, Scan, SubsetScan};

pub use report::{
    CheckKind, CompletabilityReport, Diagnostics, Inequality, Verdict, VerificationMode, Witness,
    REPORT_VERSION,
};

/// Selections up to this size are always checked exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 22;

/// Limits on the subset and selection searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    /// Subset-enumeration nodes per scan above [`EXHAUSTIVE_LIMIT`].
    pub max_subsets: u64,
    /// Nodes of the selection search.
    pub max_nodes: u64,
    /// Random subsets tried when enumeration runs out of budget.
    pub random_trials: u64,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_subsets: 1 << 22,
            max_nodes: 100_000,
            random_trials: 4096,
            seed: 0,
        }
    }
}

/// A nonempty set of distinct constraint-tensor columns, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubtensorSelection {
    columns: Vec<usize>,
}

impl SubtensorSelection {
    pub fn new(mut columns: Vec<usize>, ct: &ConstraintTensor) -> Result<Self> {
        columns.sort_unstable();
        columns.dedup();
        if columns.is_empty() {
            return Err(Error::InvalidArgument("selection is empty".into()));
        }
        if let Some(&k) = columns.iter().find(|&&k| k >= ct.num_columns()) {
            return Err(Error::InvalidArgument(format!(
                "column {} out of range 1..={}",
                k + 1,
                ct.num_columns()
            )));
        }
        Ok(SubtensorSelection { columns })
    }

    pub fn all(ct: &ConstraintTensor) -> Option<Self> {
        SubtensorSelection::new((0..ct.num_columns()).collect(), ct).ok()
    }

    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    /// `t`.
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

/// `m_i`: distinct mode-`i` coordinates over the marked cells of `columns`.
/// `mode` is 1-based in `1..=d-1`.
pub fn nonzero_rows(columns: &[usize], ct: &ConstraintTensor, mode: usize) -> Result<usize> {
    let d = ct.pattern_shape().order();
    if mode == 0 || mode > d - 1 {
        return Err(Error::ModeOutOfRange { mode, max: d - 1 });
    }
    Ok(RowProfile::with_columns(ct, columns).rows(mode - 1))
}

/// `Σ_{i=1}^{d-1} (r_{i-1} r_i m_i − r_i²)⁺`, an upper bound on the number
/// of algebraically independent polynomials among the selected columns.
pub fn independence_capacity(columns: &[usize], ct: &ConstraintTensor) -> i64 {
    RowProfile::with_columns(ct, columns).capacity()
}

/// `M_i = n_i − ⌊r_i / r_{i-1}⌋` for a 0-based mode `i`.
pub fn mode_target(ct: &ConstraintTensor, i: usize) -> usize {
    let n = ct.pattern_shape().dims()[i];
    let r = ct.rank();
    n.saturating_sub(r.get(i + 1) / r.get(i))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConditionStatus {
    Verified,
    Falsified,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionResult {
    pub status: ConditionStatus,
    /// Violating subset (0-based columns): the smallest one, lexicographically
    /// least among those, when found by enumeration.
    pub witness: Option<Vec<usize>>,
    pub mode: VerificationMode,
    pub subsets_checked: u64,
}

/// Checks the capacity inequality on every nonempty subset of `sel`.
///
/// Selections of at most [`EXHAUSTIVE_LIMIT`] columns are enumerated
/// completely. Larger ones are enumerated up to `budget.max_subsets` nodes,
/// then random subsets are tried; a `Verified` result always comes from a
/// complete enumeration.
pub fn check_condition_ii(
    sel: &SubtensorSelection,
    ct: &ConstraintTensor,
    budget: &SearchBudget,
) -> ConditionResult {
    let exhaustive = sel.len() <= EXHAUSTIVE_LIMIT;
    let limit = (!exhaustive).then_some(budget.max_subsets);
    let (scan, nodes) = SubsetScan::new(ct, &Capacity, &[], sel.columns(), limit).run();
    let mode = if exhaustive {
        VerificationMode::Exhaustive
    } else {
        VerificationMode::PrunedExhaustive
    };
    match scan {
        Scan::Clean => ConditionResult {
            status: ConditionStatus::Verified,
            witness: None,
            mode,
            subsets_checked: nodes,
        },
        Scan::Violation(w) => ConditionResult {
            status: ConditionStatus::Falsified,
            witness: Some(w),
            mode,
            subsets_checked: nodes,
        },
        Scan::Exhausted => {
            let w = random_falsify(ct, &Capacity, sel.columns(), budget.random_trials, budget.seed);
            ConditionResult {
                status: if w.is_some() {
                    ConditionStatus::Falsified
                } else {
                    ConditionStatus::Unknown
                },
                witness: w,
                mode: VerificationMode::Randomized,
                subsets_checked: nodes + budget.random_trials,
            }
        }
    }
}

pub(crate) fn all_subsets_hold<C: search::SubsetCondition>(
    ct: &ConstraintTensor,
    cond: &C,
    cols: &[usize],
) -> bool {
    cols.is_empty() || SubsetScan::new(ct, cond, &[], cols, None).run().0 == Scan::Clean
}

fn required_columns(ct: &ConstraintTensor) -> usize {
    completion_dimension(ct.pattern_shape(), ct.rank()).max(0) as usize
}

fn base_report(check: CheckKind, ct: &ConstraintTensor) -> CompletabilityReport {
    CompletabilityReport {
        check,
        verdict: Verdict::Unknown,
        witness: None,
        mode: VerificationMode::Exhaustive,
        diagnostics: Diagnostics {
            columns_total: ct.num_columns(),
            columns_required: required_columns(ct),
            ..Diagnostics::default()
        },
        constraint: Some(ct.clone()),
    }
}

/// Search for the finiteness selection `Ω̆′` among `candidates`.
fn find_finite(
    ct: &ConstraintTensor,
    candidates: &[usize],
    budget: &SearchBudget,
    report: &mut CompletabilityReport,
) -> Growth {
    let m = report.diagnostics.columns_required;
    let mut g = Grower::new(ct, &Capacity, m, budget.max_nodes, budget.max_subsets, EXHAUSTIVE_LIMIT);
    let out = g.run(candidates);
    report.diagnostics.search_nodes += g.effort.nodes;
    report.diagnostics.subsets_checked += g.effort.subsets;
    if m > EXHAUSTIVE_LIMIT {
        report.mode = VerificationMode::PrunedExhaustive;
    }
    out
}

fn find_mode(
    ct: &ConstraintTensor,
    mode: usize,
    candidates: &[usize],
    budget: &SearchBudget,
    report: &mut CompletabilityReport,
) -> Growth {
    let target = mode_target(ct, mode);
    let cond = ModeCondition { mode, target };
    let mut g = Grower::new(ct, &cond, target, budget.max_nodes, budget.max_subsets, EXHAUSTIVE_LIMIT);
    let out = g.run(candidates);
    report.diagnostics.search_nodes += g.effort.nodes;
    report.diagnostics.subsets_checked += g.effort.subsets;
    if target > EXHAUSTIVE_LIMIT {
        report.mode = VerificationMode::PrunedExhaustive;
    }
    out
}

/// Finite completability on a prebuilt constraint tensor.
///
/// Falsified by counting when `K < M` or when all columns together have
/// capacity below `M`; otherwise a backtracking search for `M` columns
/// whose every subset passes the capacity inequality. A search that runs
/// out of budget gives `Unknown`.
pub fn check_finite_constraint(ct: &ConstraintTensor, budget: &SearchBudget) -> CompletabilityReport {
    let mut report = base_report(CheckKind::Finite, ct);
    let m = report.diagnostics.columns_required;
    let k = ct.num_columns();
    if k < m {
        report.verdict = Verdict::Falsified;
        report.mode = VerificationMode::Counting;
        report.witness = Some(Witness::TooFewColumns {
            available: k,
            required: m,
        });
        return report;
    }
    let all: Vec<usize> = (0..k).collect();
    let capacity = independence_capacity(&all, ct);
    if capacity < m as i64 {
        report.verdict = Verdict::Falsified;
        report.mode = VerificationMode::Counting;
        report.witness = Some(Witness::CapacityShortfall {
            capacity,
            required: m,
        });
        return report;
    }
    match find_finite(ct, &all, budget, &mut report) {
        Growth::Found(sel) => {
            report.verdict = Verdict::FinitelyCompletable;
            report.witness = Some(Witness::Certificate {
                finite: sel,
                modes: Vec::new(),
            });
        }
        Growth::Infeasible => {
            report.verdict = Verdict::Falsified;
            report.witness = Some(Witness::SearchExhausted);
            report
                .diagnostics
                .notes
                .push("no column selection passes the capacity inequality".into());
        }
        Growth::Inconclusive => {
            report.verdict = Verdict::Unknown;
            report.diagnostics.notes.push("search budget exhausted".into());
        }
    }
    report
}

/// Unique completability on a prebuilt constraint tensor.
///
/// First certifies finiteness, then looks for disjoint per-mode selections
/// `Ω̆′^i` of `M_i` columns. Tries the finiteness selection first, and if
/// that leaves too little, the per-mode selections first. The condition is
/// sufficient only, so a failed search after a finite certificate is
/// `Unknown`.
pub fn check_unique_constraint(ct: &ConstraintTensor, budget: &SearchBudget) -> CompletabilityReport {
    let finite = check_finite_constraint(ct, budget);
    let mut report = CompletabilityReport {
        check: CheckKind::Unique,
        ..finite.clone()
    };
    if finite.verdict != Verdict::FinitelyCompletable {
        if finite.verdict == Verdict::Falsified {
            report
                .diagnostics
                .notes
                .push("finite completability fails, so uniqueness fails".into());
        }
        return report;
    }
    let Some(Witness::Certificate { finite: first, .. }) = finite.witness.clone() else {
        unreachable!("finite certificate carries its selection");
    };
    let d = ct.pattern_shape().order();
    let k = ct.num_columns();

    // Order A: the finite selection as found, then each mode from what is left.
    let mut used: Vec<bool> = vec![false; k];
    first.iter().for_each(|&c| used[c] = true);
    if let Some(modes) = modes_from(ct, &mut used, d, budget, &mut report) {
        report.verdict = Verdict::UniquelyCompletable;
        report.witness = Some(Witness::Certificate {
            finite: first,
            modes,
        });
        return report;
    }

    // Order B: modes first, then the finite selection from the rest.
    let mut used = vec![false; k];
    if let Some(modes) = modes_from(ct, &mut used, d, budget, &mut report) {
        let rest: Vec<usize> = (0..k).filter(|&c| !used[c]).collect();
        if let Growth::Found(sel) = find_finite(ct, &rest, budget, &mut report) {
            report.verdict = Verdict::UniquelyCompletable;
            report.witness = Some(Witness::Certificate { finite: sel, modes });
            return report;
        }
    }

    report.verdict = Verdict::Unknown;
    report.witness = finite.witness;
    let needed: usize = (0..d - 1).map(|i| mode_target(ct, i)).sum();
    report.diagnostics.notes.push(format!(
        "finite selection certified; no disjoint per-mode selections found ({} columns remain, {} needed)",
        k - required_columns(ct),
        needed
    ));
    report
}

fn modes_from(
    ct: &ConstraintTensor,
    used: &mut [bool],
    d: usize,
    budget: &SearchBudget,
    report: &mut CompletabilityReport,
) -> Option<Vec<Vec<usize>>> {
    let mut modes = Vec::with_capacity(d - 1);
    for i in 0..d - 1 {
        let avail: Vec<usize> = (0..used.len()).filter(|&c| !used[c]).collect();
        match find_mode(ct, i, &avail, budget, report) {
            Growth::Found(sel) => {
                sel.iter().for_each(|&c| used[c] = true);
                modes.push(sel);
            }
            _ => return None,
        }
    }
    Some(modes)
}

fn constraint_for(p: &SamplingPattern, rank: &RankVector, rule: &PivotRule) -> Result<ConstraintTensor> {
    build_constraint_tensor(p, rank, rule, false)
}

/// Finite completability of a pattern with lexicographic pivots.
///
/// Errors with [`Error::Assumption1Violated`] when some last-mode slice has
/// fewer than `r_{d-1}` samples; see [`assess`] for a report instead.
pub fn check_finite(p: &SamplingPattern, rank: &RankVector, budget: &SearchBudget) -> Result<CompletabilityReport> {
    check_finite_with(p, rank, &PivotRule::Lexicographic, budget)
}

pub fn check_finite_with(
    p: &SamplingPattern,
    rank: &RankVector,
    rule: &PivotRule,
    budget: &SearchBudget,
) -> Result<CompletabilityReport> {
    Ok(check_finite_constraint(&constraint_for(p, rank, rule)?, budget))
}

/// Unique completability of a pattern with lexicographic pivots.
pub fn check_unique(p: &SamplingPattern, rank: &RankVector, budget: &SearchBudget) -> Result<CompletabilityReport> {
    check_unique_with(p, rank, &PivotRule::Lexicographic, budget)
}

pub fn check_unique_with(
    p: &SamplingPattern,
    rank: &RankVector,
    rule: &PivotRule,
    budget: &SearchBudget,
) -> Result<CompletabilityReport> {
    Ok(check_unique_constraint(&constraint_for(p, rank, rule)?, budget))
}

/// Like [`check_finite_with`] / [`check_unique_with`], but a failed
/// sampling assumption becomes a `NotGuaranteed` report.
pub fn assess(
    p: &SamplingPattern,
    rank: &RankVector,
    rule: &PivotRule,
    check: CheckKind,
    budget: &SearchBudget,
) -> Result<CompletabilityReport> {
    let run = match check {
        CheckKind::Finite => check_finite_with(p, rank, rule, budget),
        CheckKind::Unique => check_unique_with(p, rank, rule, budget),
    };
    match run {
        Err(Error::Assumption1Violated { required, deficient }) => Ok(CompletabilityReport {
            check,
            verdict: Verdict::NotGuaranteed,
            witness: Some(Witness::Assumption1 {
                deficient: deficient.iter().map(|s| s - 1).collect(),
            }),
            mode: VerificationMode::Counting,
            diagnostics: Diagnostics {
                columns_required: completion_dimension(p.shape(), rank).max(0) as usize,
                notes: vec![format!(
                    "{} slice(s) hold fewer than {required} samples",
                    deficient.len()
                )],
                ..Diagnostics::default()
            },
            constraint: None,
        }),
        other => other,
    }
}

#[cfg(test)]
mod tests;
