//! Sampling patterns, the per-slice sampling assumption, and the
//! constraint tensor built from a pattern.

mod constraint;
mod format;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::{RankVector, Shape};

pub use constraint::{build_constraint_tensor, ConstraintColumn, ConstraintTensor, PivotRule};
pub use format::{parse_pattern_file, write_pattern_file, PatternFile};

/// The set Ω of observed entries over a [`Shape`].
///
/// Indices are 0-based in memory and kept in lexicographic order (first
/// coordinate most significant). Text formats use 1-based indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingPattern {
    shape: Shape,
    observed: BTreeSet<Vec<usize>>,
}

impl SamplingPattern {
    /// Rejects out-of-bounds and repeated indices.
    pub fn new(shape: Shape, indices: impl IntoIterator<Item = Vec<usize>>) -> Result<Self> {
        let mut observed = BTreeSet::new();
        for x in indices {
            if !shape.contains(&x) {
                return Err(Error::IndexOutOfBounds {
                    index: x,
                    dims: shape.dims().to_vec(),
                });
            }
            if !observed.insert(x.clone()) {
                return Err(Error::InvalidArgument(format!(
                    "index {} observed twice",
                    one_based(&x)
                )));
            }
        }
        Ok(SamplingPattern { shape, observed })
    }

    /// Same as [`SamplingPattern::new`] with 1-based input.
    pub fn from_one_based(shape: Shape, indices: impl IntoIterator<Item = Vec<usize>>) -> Result<Self> {
        let mut zero = Vec::new();
        for x in indices {
            if x.contains(&0) {
                return Err(Error::InvalidArgument(format!(
                    "1-based index {x:?} contains 0"
                )));
            }
            zero.push(x.iter().map(|v| v - 1).collect());
        }
        SamplingPattern::new(shape, zero)
    }

    pub fn empty(shape: Shape) -> Self {
        SamplingPattern {
            shape,
            observed: BTreeSet::new(),
        }
    }

    pub fn full(shape: Shape) -> Self {
        let observed = shape.indices().collect();
        SamplingPattern { shape, observed }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// `N_Ω(U)`.
    pub fn len(&self) -> usize {
        self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }

    pub fn contains(&self, index: &[usize]) -> bool {
        self.observed.contains(index)
    }

    /// Observed indices in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.observed.iter()
    }

    /// `N_Ω(Y)` for the axis-aligned box `lo[k] <= x_k < hi[k]`.
    pub fn count_in_box(&self, lo: &[usize], hi: &[usize]) -> usize {
        self.observed
            .iter()
            .filter(|x| x.iter().zip(lo.iter().zip(hi)).all(|(v, (a, b))| a <= v && v < b))
            .count()
    }

    /// `N_Ω(Y_s)` for every slice `Y_s` of the last mode.
    pub fn slice_counts(&self) -> Vec<usize> {
        let d = self.shape.order();
        let mut counts = vec![0; self.shape.dims()[d - 1]];
        for x in &self.observed {
            counts[x[d - 1]] += 1;
        }
        counts
    }

    /// Observed cells of last-mode slice `s`, as `(d-1)`-tuples in
    /// lexicographic order.
    pub fn slice_cells(&self, s: usize) -> Vec<Vec<usize>> {
        let d = self.shape.order();
        let mut cells: Vec<Vec<usize>> = self
            .observed
            .iter()
            .filter(|x| x[d - 1] == s)
            .map(|x| x[..d - 1].to_vec())
            .collect();
        cells.sort();
        cells
    }
}

/// Outcome of checking that every last-mode slice holds at least `r_{d-1}`
/// observed entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assumption1Report {
    pub required: usize,
    pub slice_counts: Vec<usize>,
    /// 0-based slices with fewer than `required` entries.
    pub deficient: Vec<usize>,
}

impl Assumption1Report {
    pub fn holds(&self) -> bool {
        self.deficient.is_empty()
    }

    /// Per-slice shortfall `required − count` for the deficient slices.
    pub fn deficits(&self) -> Vec<(usize, usize)> {
        self.deficient
            .iter()
            .map(|&s| (s, self.required - self.slice_counts[s]))
            .collect()
    }

    pub(crate) fn to_error(&self) -> Error {
        Error::Assumption1Violated {
            required: self.required,
            deficient: self.deficient.iter().map(|s| s + 1).collect(),
        }
    }
}

/// Columns of the `(d-1)`-th unfolding of Ω are the vectorized last-mode
/// slices, so the check counts observed entries per slice.
pub fn check_assumption1(p: &SamplingPattern, rank: &RankVector) -> Assumption1Report {
    let required = rank.last();
    let slice_counts = p.slice_counts();
    let deficient = slice_counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c < required)
        .map(|(s, _)| s)
        .collect();
    Assumption1Report {
        required,
        slice_counts,
        deficient,
    }
}

/// Includes each cell independently with probability `p`.
///
/// One uniform draw per cell in linearization order, so for a fixed seed
/// the patterns are nested in `p`.
pub fn random_pattern(shape: &Shape, p: f64, seed: u64) -> Result<SamplingPattern> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let observed = shape
        .indices()
        .filter(|_| rng.random::<f64>() < p)
        .collect();
    Ok(SamplingPattern {
        shape: shape.clone(),
        observed,
    })
}

/// `(x1,x2,…)` with 1-based coordinates.
pub(crate) fn one_based(x: &[usize]) -> String {
    let parts: Vec<String> = x.iter().map(|v| (v + 1).to_string()).collect();
    format!("({})", parts.join(","))
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

    fn motivating() -> SamplingPattern {
        SamplingPattern::from_one_based(
            shape(&[2, 2, 2]),
            vec![vec![1, 1, 1], vec![2, 1, 1], vec![1, 2, 1], vec![1, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn motivating_example_meets_assumption() {
        let report = check_assumption1(&motivating(), &rank(&[1, 1]));
        assert_eq!(report.slice_counts, vec![3, 1]);
        assert!(report.holds());
    }

    #[test]
    fn empty_pattern_fails_everywhere() {
        let report = check_assumption1(&SamplingPattern::empty(shape(&[3, 3, 4])), &rank(&[1, 2]));
        assert!(!report.holds());
        assert_eq!(report.deficient, vec![0, 1, 2, 3]);
        assert_eq!(report.deficits()[0], (0, 2));
    }

    #[test]
    fn invalid_indices_are_rejected() {
        let s = shape(&[2, 2]);
        assert!(SamplingPattern::new(s.clone(), vec![vec![2, 0]]).is_err());
        assert!(SamplingPattern::new(s.clone(), vec![vec![1, 0], vec![1, 0]]).is_err());
        assert!(SamplingPattern::from_one_based(s, vec![vec![0, 1]]).is_err());
    }

    #[test]
    fn box_counts() {
        let p = motivating();
        assert_eq!(p.count_in_box(&[0, 0, 0], &[2, 2, 2]), 4);
        assert_eq!(p.count_in_box(&[0, 0, 0], &[2, 2, 1]), 3);
        assert_eq!(p.count_in_box(&[1, 0, 0], &[2, 2, 2]), 1);
    }

    #[test]
    fn random_pattern_extremes() {
        let s = shape(&[3, 4, 2]);
        assert!(random_pattern(&s, 0.0, 1).unwrap().is_empty());
        assert_eq!(random_pattern(&s, 1.0, 1).unwrap().len(), 24);
        assert!(random_pattern(&s, 1.5, 1).is_err());
    }

    #[test]
    fn random_pattern_is_reproducible_and_nested() {
        let s = shape(&[4, 4, 4]);
        assert_eq!(random_pattern(&s, 0.3, 9).unwrap(), random_pattern(&s, 0.3, 9).unwrap());
        let small = random_pattern(&s, 0.3, 9).unwrap();
        let large = random_pattern(&s, 0.6, 9).unwrap();
        assert!(small.iter().all(|x| large.contains(x)));
    }

    #[test]
    fn random_pattern_count_is_binomial() {
        // Binomial(64, 1/2): mean 32, sd 4. Every seed within 4 sd.
        let s = shape(&[4, 4, 4]);
        let counts: Vec<usize> = (0..100).map(|seed| random_pattern(&s, 0.5, seed).unwrap().len()).collect();
        assert!(counts.iter().all(|&c| (16..=48).contains(&c)));
        let mean = counts.iter().sum::<usize>() as f64 / 100.0;
        // Mean of 100 draws has sd 0.4.
        assert!((mean - 32.0).abs() < 1.6, "mean {mean}");
    }
}
