use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_assumption1, one_based, SamplingPattern};
use crate::error::{Error, Result};
use crate::tensor::{RankVector, Shape};

/// How the `r_{d-1}` pivot entries of each last-mode slice are chosen.
///
/// Pivots are the observed entries used to solve for the last core.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum PivotRule {
    /// First `r_{d-1}` observed cells of each slice in lexicographic order.
    #[default]
    Lexicographic,
    /// Full 0-based indices; each included slice needs exactly `r_{d-1}`.
    Explicit(Vec<Vec<usize>>),
    /// Uniformly random `r_{d-1}` cells per slice from a seeded generator.
    SeededRandom(u64),
}

/// One column of the constraint tensor: the pivots of its source slice plus
/// one non-pivot observed cell. Cells range over the first `d - 1` modes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintColumn {
    pub slice: usize,
    pub pivots: Vec<Vec<usize>>,
    pub extra: Vec<usize>,
}

impl ConstraintColumn {
    /// The `r_{d-1} + 1` marked cells: pivots first, then the extra cell.
    pub fn cells(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.pivots.iter().chain(std::iter::once(&self.extra))
    }

    /// The observed entry this column adds, as a full 0-based index.
    pub fn entry(&self) -> Vec<usize> {
        let mut x = self.extra.clone();
        x.push(self.slice);
        x
    }
}

/// The binary constraint tensor `Ω̆ ∈ R^{n_1 × ⋯ × n_{d-1} × K}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintTensor {
    pattern_shape: Shape,
    rank: RankVector,
    columns: Vec<ConstraintColumn>,
    pivots: Vec<Vec<Vec<usize>>>,
    excluded: Vec<usize>,
}

impl ConstraintTensor {
    /// Shape of the sampled tensor the columns refer to.
    pub fn pattern_shape(&self) -> &Shape {
        &self.pattern_shape
    }

    pub fn rank(&self) -> &RankVector {
        &self.rank
    }

    /// `K`.
    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[ConstraintColumn] {
        &self.columns
    }

    pub fn column(&self, k: usize) -> &ConstraintColumn {
        &self.columns[k]
    }

    /// Pivot cells of slice `s`; empty for excluded slices.
    pub fn pivots(&self, s: usize) -> &[Vec<usize>] {
        &self.pivots[s]
    }

    /// 0-based slices left out because they fail the sampling assumption.
    pub fn excluded_slices(&self) -> &[usize] {
        &self.excluded
    }

    /// `(n_1, …, n_{d-1}, K)`; `None` when `K = 0`.
    pub fn shape(&self) -> Option<Shape> {
        let d = self.pattern_shape.order();
        let mut dims = self.pattern_shape.dims()[..d - 1].to_vec();
        dims.push(self.columns.len());
        Shape::new(dims).ok()
    }

    /// Nonzero entries of `Ω̆`: `(cell, column)` as 0-based `d`-tuples.
    pub fn support(&self) -> BTreeSet<Vec<usize>> {
        let mut out = BTreeSet::new();
        for (k, col) in self.columns.iter().enumerate() {
            for cell in col.cells() {
                let mut x = cell.clone();
                x.push(k);
                out.insert(x);
            }
        }
        out
    }

    /// One row per column: `column,slice,extra,pivot1,…`, all 1-based, with
    /// coordinates of a cell separated by spaces.
    pub fn to_csv(&self) -> String {
        let r = self.rank.last();
        let mut out = String::from("column,slice,extra");
        for j in 1..=r {
            let _ = write!(out, ",pivot{j}");
        }
        out.push('\n');
        for (k, col) in self.columns.iter().enumerate() {
            let _ = write!(out, "{},{},{}", k + 1, col.slice + 1, spaced(&col.extra));
            for p in &col.pivots {
                let _ = write!(out, ",{}", spaced(p));
            }
            out.push('\n');
        }
        out
    }

    /// The support as a 1-based set literal, `{(1,1,1),(1,2,2),…}`.
    pub fn support_text(&self) -> String {
        let mut entries: Vec<(usize, Vec<usize>)> = self
            .support()
            .into_iter()
            .map(|x| (x[x.len() - 1], x))
            .collect();
        // Column-major reading order: by column, then by cell.
        entries.sort();
        let parts: Vec<String> = entries.iter().map(|(_, x)| one_based(x)).collect();
        format!("{{{}}}", parts.join(","))
    }
}

fn spaced(x: &[usize]) -> String {
    let parts: Vec<String> = x.iter().map(|v| (v + 1).to_string()).collect();
    parts.join(" ")
}

/// Builds `Ω̆` from a sampling pattern.
///
/// With `force = false` every last-mode slice must hold at least `r_{d-1}`
/// observed entries. With `force = true` deficient slices are skipped and
/// recorded in [`ConstraintTensor::excluded_slices`].
///
/// Columns are ordered by their extra cell in lexicographic order, ties
/// broken by slice.
pub fn build_constraint_tensor(
    p: &SamplingPattern,
    rank: &RankVector,
    rule: &PivotRule,
    force: bool,
) -> Result<ConstraintTensor> {
    let shape = p.shape();
    rank.validate_for(shape)?;
    let d = shape.order();
    let n_d = shape.dims()[d - 1];
    let r = rank.last();
    let report = check_assumption1(p, rank);
    if !force && !report.holds() {
        return Err(report.to_error());
    }
    let excluded: BTreeSet<usize> = report.deficient.iter().copied().collect();

    let explicit = match rule {
        PivotRule::Explicit(list) => Some(group_explicit(p, list)?),
        _ => None,
    };

    let mut pivots = vec![Vec::new(); n_d];
    let mut columns = Vec::new();
    for s in 0..n_d {
        if excluded.contains(&s) {
            continue;
        }
        let cells = p.slice_cells(s);
        let chosen: Vec<Vec<usize>> = match rule {
            PivotRule::Lexicographic => cells[..r].to_vec(),
            PivotRule::Explicit(_) => {
                let mut got = explicit
                    .as_ref()
                    .and_then(|m| m.get(&s).cloned())
                    .unwrap_or_default();
                if got.len() != r {
                    return Err(Error::PivotCount {
                        slice: s + 1,
                        expected: r,
                        got: got.len(),
                    });
                }
                got.sort();
                got
            }
            PivotRule::SeededRandom(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(s as u64));
                let mut picked: Vec<Vec<usize>> = sample(&mut rng, cells.len(), r)
                    .into_iter()
                    .map(|k| cells[k].clone())
                    .collect();
                picked.sort();
                picked
            }
        };
        let pivot_set: BTreeSet<&Vec<usize>> = chosen.iter().collect();
        for cell in &cells {
            if !pivot_set.contains(cell) {
                columns.push(ConstraintColumn {
                    slice: s,
                    pivots: chosen.clone(),
                    extra: cell.clone(),
                });
            }
        }
        pivots[s] = chosen;
    }
    columns.sort_by(|a, b| (&a.extra, a.slice).cmp(&(&b.extra, b.slice)));

    Ok(ConstraintTensor {
        pattern_shape: shape.clone(),
        rank: rank.clone(),
        columns,
        pivots,
        excluded: excluded.into_iter().collect(),
    })
}

fn group_explicit(
    p: &SamplingPattern,
    list: &[Vec<usize>],
) -> Result<BTreeMap<usize, Vec<Vec<usize>>>> {
    let d = p.shape().order();
    let mut by_slice: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
    for x in list {
        if !p.contains(x) {
            return Err(Error::ExplicitPivotNotObserved(
                x.iter().map(|v| v + 1).collect(),
            ));
        }
        let cells = by_slice.entry(x[d - 1]).or_default();
        let cell = x[..d - 1].to_vec();
        if cells.contains(&cell) {
            return Err(Error::InvalidArgument(format!(
                "pivot {} listed twice",
                one_based(x)
            )));
        }
        cells.push(cell);
    }
    Ok(by_slice)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(d: &[usize]) -> Shape {
        Shape::new(d.to_vec()).unwrap()
    }

    fn rank(r: &[usize]) -> RankVector {
        RankVector::new(r.to_vec()).unwrap()
    }

    fn zero(v: &[[usize; 3]]) -> Vec<Vec<usize>> {
        v.iter().map(|x| x.iter().map(|c| c - 1).collect()).collect()
    }

    fn example_one() -> (SamplingPattern, PivotRule) {
        let s = zero(&[
            [1, 1, 1],
            [1, 2, 1],
            [2, 3, 1],
            [3, 3, 1],
            [1, 1, 2],
            [2, 1, 2],
            [3, 2, 2],
            [1, 3, 3],
            [3, 2, 3],
        ]);
        let pivots = zero(&[[2, 3, 1], [3, 3, 1], [1, 1, 2], [2, 1, 2], [1, 3, 3], [3, 2, 3]]);
        (
            SamplingPattern::new(shape(&[3, 3, 3]), s).unwrap(),
            PivotRule::Explicit(pivots),
        )
    }

    #[test]
    fn example_one_support() {
        let (p, rule) = example_one();
        let ct = build_constraint_tensor(&p, &rank(&[1, 2]), &rule, false).unwrap();
        assert_eq!(ct.num_columns(), 3);
        let expected: BTreeSet<Vec<usize>> = zero(&[
            [1, 1, 1],
            [1, 2, 2],
            [2, 3, 1],
            [2, 3, 2],
            [3, 3, 1],
            [3, 3, 2],
            [1, 1, 3],
            [2, 1, 3],
            [3, 2, 3],
        ])
        .into_iter()
        .collect();
        assert_eq!(ct.support(), expected);
        assert_eq!(ct.shape().unwrap().dims(), &[3, 3, 3]);
    }

    #[test]
    fn columns_have_r_plus_one_cells() {
        let (p, rule) = example_one();
        let ct = build_constraint_tensor(&p, &rank(&[1, 2]), &rule, false).unwrap();
        for col in ct.columns() {
            let cells: BTreeSet<_> = col.cells().collect();
            assert_eq!(cells.len(), 3);
            assert!(col.cells().all(|c| {
                let mut x = c.clone();
                x.push(col.slice);
                p.contains(&x)
            }));
        }
    }

    #[test]
    fn explicit_pivot_must_be_observed() {
        let (p, _) = example_one();
        let bad = PivotRule::Explicit(zero(&[[2, 2, 1], [3, 3, 1]]));
        assert!(matches!(
            build_constraint_tensor(&p, &rank(&[1, 2]), &bad, false),
            Err(Error::ExplicitPivotNotObserved(x)) if x == vec![2, 2, 1]
        ));
    }

    #[test]
    fn explicit_pivots_must_cover_each_slice() {
        let (p, _) = example_one();
        let short = PivotRule::Explicit(zero(&[[2, 3, 1], [3, 3, 1]]));
        assert!(matches!(
            build_constraint_tensor(&p, &rank(&[1, 2]), &short, false),
            Err(Error::PivotCount { slice: 2, expected: 2, got: 0 })
        ));
    }

    #[test]
    fn exactly_r_per_slice_gives_no_columns() {
        let p = SamplingPattern::new(shape(&[2, 2, 2]), zero(&[[1, 1, 1], [2, 2, 2]])).unwrap();
        let ct = build_constraint_tensor(&p, &rank(&[1, 1]), &PivotRule::Lexicographic, false).unwrap();
        assert_eq!(ct.num_columns(), 0);
        assert!(ct.shape().is_none());
    }

    #[test]
    fn motivating_example_lexicographic() {
        let p = SamplingPattern::new(
            shape(&[2, 2, 2]),
            zero(&[[1, 1, 1], [2, 1, 1], [1, 2, 1], [1, 1, 2]]),
        )
        .unwrap();
        let ct = build_constraint_tensor(&p, &rank(&[1, 1]), &PivotRule::Lexicographic, false).unwrap();
        assert_eq!(ct.num_columns(), 2);
        // Pivot (1,1) of slice 1; extras (1,2) then (2,1).
        assert_eq!(ct.pivots(0), &[vec![0, 0]]);
        assert_eq!(ct.column(0).extra, vec![0, 1]);
        assert_eq!(ct.column(1).extra, vec![1, 0]);
        assert_eq!(
            ct.to_csv(),
            "column,slice,extra,pivot1\n1,1,1 2,1 1\n2,1,2 1,1 1\n"
        );
    }

    #[test]
    fn deficient_slices_error_or_are_excluded() {
        let p = SamplingPattern::new(shape(&[2, 2, 3]), zero(&[[1, 1, 1], [2, 1, 1], [1, 1, 3]])).unwrap();
        let err = build_constraint_tensor(&p, &rank(&[1, 1]), &PivotRule::Lexicographic, false);
        assert_eq!(
            err,
            Err(Error::Assumption1Violated {
                required: 1,
                deficient: vec![2]
            })
        );
        let ct = build_constraint_tensor(&p, &rank(&[1, 1]), &PivotRule::Lexicographic, true).unwrap();
        assert_eq!(ct.excluded_slices(), &[1]);
        assert_eq!(ct.num_columns(), 1);
    }

    #[test]
    fn seeded_pivots_are_deterministic() {
        let p = SamplingPattern::full(shape(&[3, 3, 2]));
        let rule = PivotRule::SeededRandom(4);
        let a = build_constraint_tensor(&p, &rank(&[2, 2]), &rule, false).unwrap();
        let b = build_constraint_tensor(&p, &rank(&[2, 2]), &rule, false).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.num_columns(), 18 - 4);
    }

    #[test]
    fn support_text_lists_columns_in_order() {
        let (p, rule) = example_one();
        let ct = build_constraint_tensor(&p, &rank(&[1, 2]), &rule, false).unwrap();
        assert_eq!(
            ct.support_text(),
            "{(1,1,1),(2,3,1),(3,3,1),(1,2,2),(2,3,2),(3,3,2),(1,1,3),(2,1,3),(3,2,3)}"
        );
    }
}
