use std::fmt::{self, Write as _};

use super::independence_capacity;
use super::profile::RowProfile;
use super::search::{Capacity, ModeCondition, SubsetCondition};
use crate::pattern::ConstraintTensor;

/// Report format version written in the `format` line.
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    UniquelyCompletable,
    FinitelyCompletable,
    /// The sampling assumption fails, so the theorems say nothing.
    NotGuaranteed,
    Falsified,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::UniquelyCompletable => "UniquelyCompletable",
            Verdict::FinitelyCompletable => "FinitelyCompletable",
            Verdict::NotGuaranteed => "NotGuaranteed",
            Verdict::Falsified => "Falsified",
            Verdict::Unknown => "Unknown",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Finite,
    Unique,
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckKind::Finite => "finite",
            CheckKind::Unique => "unique",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerificationMode {
    /// Every subset examined, no node limit.
    Exhaustive,
    /// Complete enumeration with pruning under a node limit.
    PrunedExhaustive,
    /// Random subsets only; cannot certify.
    Randomized,
    /// Decided by column or capacity counts alone.
    Counting,
}

impl fmt::Display for VerificationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerificationMode::Exhaustive => "exhaustive",
            VerificationMode::PrunedExhaustive => "pruned-exhaustive",
            VerificationMode::Randomized => "randomized",
            VerificationMode::Counting => "counting",
        })
    }
}

/// Which inequality a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inequality {
    /// The capacity inequality of the finiteness condition.
    Capacity,
    /// The uniqueness inequality for a 0-based mode with `M_i = target`.
    Mode { mode: usize, target: usize },
}

/// Column indices are 0-based positions in the constraint tensor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// `finite` is `Ω̆′`; `modes[i]` is `Ω̆′^i` (empty for a finite check).
    Certificate {
        finite: Vec<usize>,
        modes: Vec<Vec<usize>>,
    },
    Violation {
        inequality: Inequality,
        columns: Vec<usize>,
        lhs: i64,
        rhs: i64,
    },
    TooFewColumns { available: usize, required: usize },
    /// Capacity of all columns together is below `M`.
    CapacityShortfall { capacity: i64, required: usize },
    /// Search over selections finished without finding one.
    SearchExhausted,
    /// 0-based slices with fewer than `r_{d-1}` samples.
    Assumption1 { deficient: Vec<usize> },
}

impl Witness {
    fn kind(&self) -> &'static str {
        match self {
            Witness::Certificate { .. } => "certificate",
            Witness::Violation { .. } => "violation",
            Witness::TooFewColumns { .. } => "too-few-columns",
            Witness::CapacityShortfall { .. } => "capacity-shortfall",
            Witness::SearchExhausted => "search-exhausted",
            Witness::Assumption1 { .. } => "assumption1",
        }
    }

    fn columns(&self) -> Vec<usize> {
        match self {
            Witness::Certificate { finite, .. } => finite.clone(),
            Witness::Violation { columns, .. } => columns.clone(),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Diagnostics {
    /// `K`.
    pub columns_total: usize,
    /// `M`.
    pub columns_required: usize,
    pub subsets_checked: u64,
    pub search_nodes: u64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletabilityReport {
    pub check: CheckKind,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub mode: VerificationMode,
    pub diagnostics: Diagnostics,
    pub constraint: Option<ConstraintTensor>,
}

impl CompletabilityReport {
    /// The `m_i` profile of the witness columns.
    pub fn witness_profile(&self) -> Option<Vec<usize>> {
        let ct = self.constraint.as_ref()?;
        let cols = self.witness.as_ref()?.columns();
        Some(RowProfile::with_columns(ct, &cols).profile())
    }

    /// Re-evaluates the stored witness against the constraint tensor.
    ///
    /// `Some(true)` when the witness still shows what the verdict claims,
    /// `Some(false)` when it does not, `None` when nothing can be rechecked.
    pub fn reverify(&self) -> Option<bool> {
        let ct = self.constraint.as_ref()?;
        match self.witness.as_ref()? {
            Witness::Violation {
                inequality,
                columns,
                ..
            } => {
                let p = RowProfile::with_columns(ct, columns);
                Some(match *inequality {
                    Inequality::Capacity => Capacity.violated(&p, columns.len()),
                    Inequality::Mode { mode, target } => {
                        ModeCondition { mode, target }.violated(&p, columns.len())
                    }
                })
            }
            Witness::TooFewColumns { required, .. } => Some(ct.num_columns() < *required),
            Witness::CapacityShortfall { required, .. } => {
                let all: Vec<usize> = (0..ct.num_columns()).collect();
                Some(independence_capacity(&all, ct) < *required as i64)
            }
            Witness::Certificate { finite, modes } => {
                let fine = super::all_subsets_hold(ct, &Capacity, finite)
                    && finite.len() == self.diagnostics.columns_required;
                let modes_ok = modes.iter().enumerate().all(|(i, w)| {
                    let target = super::mode_target(ct, i);
                    w.len() == target
                        && super::all_subsets_hold(ct, &ModeCondition { mode: i, target }, w)
                });
                let mut used: Vec<usize> = finite.iter().chain(modes.iter().flatten()).copied().collect();
                let n = used.len();
                used.sort_unstable();
                used.dedup();
                Some(fine && modes_ok && used.len() == n)
            }
            Witness::SearchExhausted | Witness::Assumption1 { .. } => None,
        }
    }

    /// `key: value` lines; column indices are 1-based.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "format: ttcomplete-report v{REPORT_VERSION}");
        let _ = writeln!(out, "check: {}", self.check);
        let _ = writeln!(out, "verdict: {}", self.verdict);
        if let Some(ct) = &self.constraint {
            let _ = writeln!(out, "shape: {}", join(ct.pattern_shape().dims(), 0));
            let _ = writeln!(out, "rank: {}", join(ct.rank().ranks(), 0));
        }
        let _ = writeln!(out, "columns_total: {}", self.diagnostics.columns_total);
        let _ = writeln!(out, "columns_required: {}", self.diagnostics.columns_required);
        let _ = writeln!(out, "verification: {}", self.mode);
        if let Some(w) = &self.witness {
            let _ = writeln!(out, "witness_kind: {}", w.kind());
            match w {
                Witness::Certificate { finite, modes } => {
                    let _ = writeln!(out, "witness_columns: {}", join(finite, 1));
                    for (i, m) in modes.iter().enumerate() {
                        let _ = writeln!(out, "witness_mode{}: {}", i + 1, join(m, 1));
                    }
                }
                Witness::Violation {
                    inequality,
                    columns,
                    lhs,
                    rhs,
                } => {
                    let which = match inequality {
                        Inequality::Capacity => "capacity".to_string(),
                        Inequality::Mode { mode, .. } => format!("mode{}", mode + 1),
                    };
                    let _ = writeln!(out, "witness_inequality: {which}");
                    let _ = writeln!(out, "witness_columns: {}", join(columns, 1));
                    let _ = writeln!(out, "witness_lhs: {lhs}");
                    let _ = writeln!(out, "witness_rhs: {rhs}");
                }
                Witness::TooFewColumns {
                    available,
                    required,
                } => {
                    let _ = writeln!(out, "witness_available: {available}");
                    let _ = writeln!(out, "witness_required: {required}");
                }
                Witness::CapacityShortfall { capacity, required } => {
                    let _ = writeln!(out, "witness_capacity: {capacity}");
                    let _ = writeln!(out, "witness_required: {required}");
                }
                Witness::Assumption1 { deficient } => {
                    let _ = writeln!(out, "witness_deficient_slices: {}", join(deficient, 1));
                }
                Witness::SearchExhausted => {}
            }
            if let Some(p) = self.witness_profile() {
                if !w.columns().is_empty() {
                    let _ = writeln!(out, "witness_profile: {}", join(&p, 0));
                }
            }
        }
        let _ = writeln!(out, "subsets_checked: {}", self.diagnostics.subsets_checked);
        let _ = writeln!(out, "search_nodes: {}", self.diagnostics.search_nodes);
        for note in &self.diagnostics.notes {
            let _ = writeln!(out, "note: {note}");
        }
        out
    }

    pub const CSV_HEADER: &'static str =
        "check,verdict,columns_total,columns_required,verification,witness_kind,witness_columns,subsets_checked,search_nodes";

    pub fn to_csv_row(&self) -> String {
        let (kind, cols) = match &self.witness {
            Some(w) => (w.kind(), join(&w.columns(), 1)),
            None => ("none", String::new()),
        };
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.check,
            self.verdict,
            self.diagnostics.columns_total,
            self.diagnostics.columns_required,
            self.mode,
            kind,
            cols,
            self.diagnostics.subsets_checked,
            self.diagnostics.search_nodes
        )
    }
}

fn join(v: &[usize], offset: usize) -> String {
    let parts: Vec<String> = v.iter().map(|x| (x + offset).to_string()).collect();
    parts.join(" ")
}
