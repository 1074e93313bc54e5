use std::fmt;

use crate::error::{Error, Result};

/// Dimension sizes `(n_1, …, n_d)` of an order-`d` tensor, `d >= 2`.
///
/// Entries are linearized column-major: the first index varies fastest, so
/// the flat position of `(x_1, …, x_d)` (0-based) is
/// `x_1 + n_1 (x_2 + n_2 (x_3 + …))`. Every unfolding and matricization in
/// this crate is defined through this ordering.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Shape {
    dims: Vec<usize>,
}

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::InvalidShape(format!(
                "order must be at least 2, got {}",
                dims.len()
            )));
        }
        if let Some(pos) = dims.iter().position(|&n| n == 0) {
            return Err(Error::InvalidShape(format!("dimension {} is zero", pos + 1)));
        }
        Ok(Shape { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Order `d`.
    pub fn order(&self) -> usize {
        self.dims.len()
    }

    /// `N_d`, the total number of entries.
    pub fn num_entries(&self) -> usize {
        self.dims.iter().product()
    }

    /// `N_i = n_1 ⋯ n_i` for `0 <= i <= d` (`N_0 = 1`).
    pub fn leading_product(&self, i: usize) -> usize {
        self.dims[..i].iter().product()
    }

    /// `N̄_i = n_{i+1} ⋯ n_d` for `0 <= i <= d` (`N̄_d = 1`).
    pub fn trailing_product(&self, i: usize) -> usize {
        self.dims[i..].iter().product()
    }

    pub fn contains(&self, index: &[usize]) -> bool {
        index.len() == self.dims.len() && index.iter().zip(&self.dims).all(|(x, n)| x < n)
    }

    /// Column-major flat position of a 0-based multi-index.
    pub fn linear_index(&self, index: &[usize]) -> Result<usize> {
        if !self.contains(index) {
            return Err(Error::IndexOutOfBounds {
                index: index.to_vec(),
                dims: self.dims.clone(),
            });
        }
        Ok(self.linear_index_unchecked(index))
    }

    pub(crate) fn linear_index_unchecked(&self, index: &[usize]) -> usize {
        index
            .iter()
            .zip(&self.dims)
            .rev()
            .fold(0, |acc, (&x, &n)| acc * n + x)
    }

    /// Inverse of [`Shape::linear_index`].
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        self.dims
            .iter()
            .map(|&n| {
                let x = flat % n;
                flat /= n;
                x
            })
            .collect()
    }

    /// All multi-indices in linearization order.
    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.num_entries()).map(move |k| self.multi_index(k))
    }

    pub(crate) fn check_mode(&self, mode: usize, max: usize) -> Result<()> {
        if mode == 0 || mode > max {
            Err(Error::ModeOutOfRange { mode, max })
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|n| n.to_string()).collect();
        write!(f, "{}", parts.join("×"))
    }
}

/// TT rank `(r_1, …, r_{d-1})`; the boundary ranks `r_0 = r_d = 1` are implicit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RankVector {
    ranks: Vec<usize>,
}

impl RankVector {
    pub fn new(ranks: Vec<usize>) -> Result<Self> {
        if ranks.is_empty() {
            return Err(Error::InvalidRank("rank vector is empty".into()));
        }
        if let Some(pos) = ranks.iter().position(|&r| r == 0) {
            return Err(Error::InvalidRank(format!("r_{} is zero", pos + 1)));
        }
        Ok(RankVector { ranks })
    }

    /// Measured ranks may contain zeros (a zero tensor); such a vector is
    /// reported as degenerate rather than rejected.
    pub(crate) fn from_measured(ranks: Vec<usize>) -> Self {
        RankVector { ranks }
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// True when some `r_i` is zero.
    pub fn is_degenerate(&self) -> bool {
        self.ranks.contains(&0)
    }

    /// `r_i` for `0 <= i <= d`, including the unit boundary ranks.
    pub fn get(&self, i: usize) -> usize {
        if i == 0 || i > self.ranks.len() {
            1
        } else {
            self.ranks[i - 1]
        }
    }

    /// `r_{d-1}`, the number of pivots per last-mode slice.
    pub fn last(&self) -> usize {
        *self.ranks.last().expect("rank vector is never empty")
    }

    /// Checks `len = d - 1` and `1 <= r_i <= min(N_i, N̄_i)`.
    pub fn validate_for(&self, shape: &Shape) -> Result<()> {
        let d = shape.order();
        if self.ranks.len() != d - 1 {
            return Err(Error::InvalidRank(format!(
                "expected {} ranks for an order-{d} tensor, got {}",
                d - 1,
                self.ranks.len()
            )));
        }
        for (k, &r) in self.ranks.iter().enumerate() {
            let i = k + 1;
            let cap = shape.leading_product(i).min(shape.trailing_product(i));
            if r == 0 || r > cap {
                return Err(Error::InvalidRank(format!(
                    "r_{i} = {r} outside 1..={cap} for shape {shape}"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for RankVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.ranks.iter().map(|r| r.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Dimension of the manifold of tensors with the given TT rank,
/// `Σ_{i=1}^{d} r_{i-1} n_i r_i − Σ_{i=1}^{d-1} r_i²`.
pub fn manifold_dimension(shape: &Shape, rank: &RankVector) -> i64 {
    let d = shape.order();
    let cores: i64 = (1..=d)
        .map(|i| (rank.get(i - 1) * shape.dims()[i - 1] * rank.get(i)) as i64)
        .sum();
    cores - gauge_dimension(rank, d)
}

/// Number of free parameters of the first `d − 1` cores once the canonical
/// blocks are fixed, `Σ_{i=1}^{d-1} r_{i-1} n_i r_i − Σ_{i=1}^{d-1} r_i²`.
///
/// This is the number `M` of algebraically independent constraints needed
/// for finite completability.
pub fn completion_dimension(shape: &Shape, rank: &RankVector) -> i64 {
    let d = shape.order();
    let cores: i64 = (1..d)
        .map(|i| (rank.get(i - 1) * shape.dims()[i - 1] * rank.get(i)) as i64)
        .sum();
    cores - gauge_dimension(rank, d)
}

fn gauge_dimension(rank: &RankVector, d: usize) -> i64 {
    (1..d).map(|i| (rank.get(i) * rank.get(i)) as i64).sum()
}
