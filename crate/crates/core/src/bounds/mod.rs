//! Closed-form sample-complexity bounds for an `n × ⋯ × n` tensor.
//!
//! All logarithms are natural. Every formula is evaluated even when its
//! hypotheses fail; the failure is reported through a validity flag.

mod curves;
mod sim;

use crate::error::{Error, Result};

pub use curves::{curve, curves_csv, curves_svg, CurveRow, RankTemplate, CURVE_HEADER};
pub use sim::{azuma_column_check, azuma_threshold, phase_sweep, sweep_csv, AzumaResult, SweepRow, SWEEP_HEADER};

/// Inputs shared by the bound formulas.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsInputs {
    n: f64,
    d: usize,
    rank: Vec<usize>,
    epsilon: f64,
}

impl BoundsInputs {
    /// `rank` is `(r_1, …, r_{d-1})`. Needs `n >= 2`, `d >= 3` and
    /// `0 < ε < 1`.
    pub fn new(n: u64, d: usize, rank: Vec<usize>, epsilon: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("n must be at least 2, got {n}")));
        }
        if d < 3 {
            return Err(Error::InvalidArgument(format!("order must be at least 3, got {d}")));
        }
        if rank.len() != d - 1 || rank.contains(&0) {
            return Err(Error::InvalidRank(format!(
                "expected {} positive ranks, got {rank:?}",
                d - 1
            )));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!("ε must lie in (0,1), got {epsilon}")));
        }
        Ok(BoundsInputs {
            n: n as f64,
            d,
            rank,
            epsilon,
        })
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn order(&self) -> usize {
        self.d
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `r_i` for `0 <= i <= d` with `r_0 = r_d = 1`.
    pub fn r(&self, i: usize) -> f64 {
        if i == 0 || i >= self.d {
            1.0
        } else {
            self.rank[i - 1] as f64
        }
    }

    /// `m = Σ_{k=1}^{d-2} r_{k-1} r_k`.
    pub fn m(&self) -> f64 {
        (1..=self.d - 2).map(|k| self.r(k - 1) * self.r(k)).sum()
    }

    /// `M = n m − Σ_{k=1}^{d-2} r_k²`.
    pub fn big_m(&self) -> f64 {
        self.n * self.m() - (1..=self.d - 2).map(|k| self.r(k) * self.r(k)).sum::<f64>()
    }

    /// `r′ = max_{k=1}^{d-2} r_k / r_{k-1}`.
    pub fn r_prime(&self) -> f64 {
        (1..=self.d - 2)
            .map(|k| self.r(k) / self.r(k - 1))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A bound value with its hypothesis check.
#[derive(Debug, Clone, PartialEq)]
pub struct Bound {
    /// Total number of samples.
    pub value: f64,
    /// Per-column sample threshold `l` inside the `max`.
    pub threshold: f64,
    pub valid: bool,
    /// Failed hypotheses, human readable.
    pub violations: Vec<String>,
}

impl Bound {
    /// Smallest integer sample count at or above the bound.
    pub fn ceiling(&self) -> f64 {
        self.value.ceil()
    }

    fn new(value: f64, threshold: f64, violations: Vec<String>) -> Self {
        Bound {
            value,
            threshold,
            valid: violations.is_empty(),
            violations,
        }
    }
}

/// Per-unfolding threshold from the matrix theorem.
#[derive(Debug, Clone, PartialEq)]
pub struct UnfoldingTerm {
    /// 1-based unfolding index.
    pub mode: usize,
    /// `None` for `i = d/2`, where the matrix theorem does not apply.
    pub threshold: Option<f64>,
    pub samples: Option<f64>,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnfoldingBound {
    /// `n^{⌈(d+1)/2⌉} max{12 log(n^{⌊(d-1)/2⌋}/ε) + 12, 2 r_{⌊(d-1)/2⌋}}`.
    pub total: Bound,
    pub terms: Vec<UnfoldingTerm>,
}

fn matrix_threshold(rows: f64, r: f64, epsilon: f64) -> f64 {
    (12.0 * (rows / epsilon).ln() + 12.0).max(2.0 * r)
}

/// Sample count of the unfolding approach.
///
/// Valid when `1 < r_i <= n^i / 6` for `i <= (d-1)/2` and
/// `1 < r_i <= n^{d-i} / 6` for `i >= (d+1)/2`.
pub fn unfolding_bound(inp: &BoundsInputs) -> UnfoldingBound {
    let (n, d, eps) = (inp.n, inp.d, inp.epsilon);
    let mut violations = Vec::new();
    let mut terms = Vec::new();
    for i in 1..d {
        let r = inp.r(i);
        let (rows, cols) = if 2 * i < d {
            (n.powi(i as i32), n.powi((d - i) as i32))
        } else if 2 * i > d {
            (n.powi((d - i) as i32), n.powi(i as i32))
        } else {
            terms.push(UnfoldingTerm {
                mode: i,
                threshold: None,
                samples: None,
                valid: false,
            });
            continue;
        };
        let ok = r > 1.0 && r <= rows / 6.0;
        if !ok {
            violations.push(format!("r_{i} = {r} outside (1, {}]", rows / 6.0));
        }
        let l = matrix_threshold(rows, r, eps);
        terms.push(UnfoldingTerm {
            mode: i,
            threshold: Some(l),
            samples: Some(cols * l),
            valid: ok,
        });
    }
    let i = (d - 1) / 2;
    let l = matrix_threshold(n.powi(i as i32), inp.r(i), eps);
    UnfoldingBound {
        // ⌈(d+1)/2⌉ = ⌊d/2⌋ + 1
        total: Bound::new(n.powi((d / 2 + 1) as i32) * l, l, violations),
        terms,
    }
}

fn log_term(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}

fn tt_hypotheses(inp: &BoundsInputs, floor_n: f64, extra: f64, violations: &mut Vec<String>) {
    let (n, m) = (inp.n, inp.m());
    if n <= (m + extra).max(floor_n) {
        violations.push(format!("n = {n} not above max{{{}, {floor_n}}}", m + extra));
    }
    let rp = inp.r_prime();
    let cap = (n / 6.0).min(inp.r(inp.d - 2));
    if rp > cap {
        violations.push(format!("r′ = {rp} above min{{n/6, r_{{d-2}}}} = {cap}"));
    }
    if inp.big_m() <= 0.0 {
        violations.push(format!("M = {} is not positive", inp.big_m()));
    }
}

/// Per-column threshold for finite completability,
/// `max{27 log(n/ε) + 9 log(2M/ε) + 18, 6 r_{d-2}}`.
pub fn tt_finite_threshold(inp: &BoundsInputs) -> f64 {
    let (n, eps) = (inp.n, inp.epsilon);
    (27.0 * (n / eps).ln() + 9.0 * log_term(2.0 * inp.big_m() / eps) + 18.0).max(6.0 * inp.r(inp.d - 2))
}

/// Per-column threshold for unique completability,
/// `max{63 log(4n/ε) + 9 log(8M/ε) + 18, 6 r_{d-2}}`.
pub fn tt_unique_threshold(inp: &BoundsInputs) -> f64 {
    let (n, eps) = (inp.n, inp.epsilon);
    (63.0 * (4.0 * n / eps).ln() + 9.0 * log_term(8.0 * inp.big_m() / eps) + 18.0).max(6.0 * inp.r(inp.d - 2))
}

/// `n² · tt_finite_threshold`. Valid when `n > max{m, 200}` and
/// `r′ <= min{n/6, r_{d-2}}`.
pub fn tt_finite_bound(inp: &BoundsInputs) -> Bound {
    let mut v = Vec::new();
    tt_hypotheses(inp, 200.0, 0.0, &mut v);
    let l = tt_finite_threshold(inp);
    Bound::new(inp.n * inp.n * l, l, v)
}

/// `n² · tt_unique_threshold`. Valid when `n > max{m + d, 400}` and
/// `r′ <= min{n/6, r_{d-2}}`.
pub fn tt_unique_bound(inp: &BoundsInputs) -> Bound {
    let mut v = Vec::new();
    tt_hypotheses(inp, 400.0, inp.d as f64, &mut v);
    let l = tt_unique_threshold(inp);
    Bound::new(inp.n * inp.n * l, l, v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityBounds {
    /// `l_finite / n^{d-2} + (n^{d-2})^{-1/4}`.
    pub p_finite: f64,
    pub p_unique: f64,
    /// `(1 − ε)(1 − exp(−√(n^{d-2}) / 2))^{n²}`, shared by both lemmas.
    pub success_probability: f64,
    pub valid_finite: bool,
    pub valid_unique: bool,
}

pub fn sampling_probability_bounds(inp: &BoundsInputs) -> ProbabilityBounds {
    let cells = inp.n.powi(inp.d as i32 - 2);
    let slack = cells.powf(-0.25);
    let miss = (-(cells.sqrt()) / 2.0).exp();
    // (1 − miss)^{n²} through log1p to keep tiny `miss` from rounding away.
    let columns = (inp.n * inp.n * (-miss).ln_1p()).exp();
    ProbabilityBounds {
        p_finite: tt_finite_threshold(inp) / cells + slack,
        p_unique: tt_unique_threshold(inp) / cells + slack,
        success_probability: (1.0 - inp.epsilon) * columns,
        valid_finite: tt_finite_bound(inp).valid,
        valid_unique: tt_unique_bound(inp).valid,
    }
}
