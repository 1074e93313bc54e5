use crate::pattern::ConstraintTensor;

/// Row-occupancy counts of a column selection, updated one column at a time.
///
/// `m_i` is the number of distinct mode-`i` coordinates among the marked
/// cells of the selected columns. Counts keep multiplicities so columns can
/// be removed again.
#[derive(Debug, Clone)]
pub(crate) struct RowProfile<'a> {
    ct: &'a ConstraintTensor,
    counts: Vec<Vec<u32>>,
    distinct: Vec<usize>,
    ranks: Vec<i64>,
    size: usize,
}

impl<'a> RowProfile<'a> {
    pub(crate) fn new(ct: &'a ConstraintTensor) -> Self {
        let shape = ct.pattern_shape();
        let d = shape.order();
        let counts = shape.dims()[..d - 1].iter().map(|&n| vec![0; n]).collect();
        let ranks = (0..d).map(|i| ct.rank().get(i) as i64).collect();
        RowProfile {
            ct,
            counts,
            distinct: vec![0; d - 1],
            ranks,
            size: 0,
        }
    }

    pub(crate) fn with_columns(ct: &'a ConstraintTensor, cols: &[usize]) -> Self {
        let mut p = RowProfile::new(ct);
        for &k in cols {
            p.add(k);
        }
        p
    }

    pub(crate) fn add(&mut self, k: usize) {
        self.size += 1;
        for cell in self.ct.column(k).cells() {
            for (i, &x) in cell.iter().enumerate() {
                let c = &mut self.counts[i][x];
                if *c == 0 {
                    self.distinct[i] += 1;
                }
                *c += 1;
            }
        }
    }

    pub(crate) fn remove(&mut self, k: usize) {
        self.size -= 1;
        for cell in self.ct.column(k).cells() {
            for (i, &x) in cell.iter().enumerate() {
                let c = &mut self.counts[i][x];
                *c -= 1;
                if *c == 0 {
                    self.distinct[i] -= 1;
                }
            }
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.size
    }

    /// `m_i` for a 0-based mode `i < d - 1`.
    pub(crate) fn rows(&self, i: usize) -> usize {
        self.distinct[i]
    }

    pub(crate) fn profile(&self) -> Vec<usize> {
        self.distinct.clone()
    }

    /// `r_i` for `0 <= i <= d` (boundaries are 1).
    pub(crate) fn rank(&self, i: usize) -> i64 {
        self.ranks.get(i).copied().unwrap_or(1)
    }

    /// `Σ_i (r_{i-1} r_i m_i − r_i²)⁺`.
    pub(crate) fn capacity(&self) -> i64 {
        self.distinct
            .iter()
            .enumerate()
            .map(|(k, &m)| {
                let (lo, hi) = (self.rank(k), self.rank(k + 1));
                (lo * hi * m as i64 - hi * hi).max(0)
            })
            .sum()
    }
}
