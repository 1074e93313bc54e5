use nalgebra::{DMatrix, DVector, RowDVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{DenseTensor, RankVector, Shape};
use crate::error::{Error, Result};
use crate::linalg;

/// One TT core `U^(i)` of shape `(r_{i-1}, n_i, r_i)`.
///
/// Stored slice by slice: for each `x` the `r_{i-1} × r_i` matrix
/// `U^(i)(:, x, :)` is kept contiguous in column-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Core {
    left: usize,
    size: usize,
    right: usize,
    data: Vec<f64>,
}

impl Core {
    pub fn zeros(left: usize, size: usize, right: usize) -> Self {
        Core {
            left,
            size,
            right,
            data: vec![0.0; left * size * right],
        }
    }

    /// `f(a, x, b)` gives `U(a, x, b)`, all 0-based.
    pub fn from_fn(
        left: usize,
        size: usize,
        right: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut core = Core::zeros(left, size, right);
        for x in 0..size {
            for b in 0..right {
                for a in 0..left {
                    core.set(a, x, b, f(a, x, b));
                }
            }
        }
        core
    }

    pub fn random<R: Rng + ?Sized>(left: usize, size: usize, right: usize, rng: &mut R) -> Self {
        Core::from_fn(left, size, right, |_, _, _| rng.sample(StandardNormal))
    }

    pub fn left_rank(&self) -> usize {
        self.left
    }

    pub fn mode_size(&self) -> usize {
        self.size
    }

    pub fn right_rank(&self) -> usize {
        self.right
    }

    #[inline]
    fn offset(&self, a: usize, x: usize, b: usize) -> usize {
        x * self.left * self.right + a + self.left * b
    }

    pub fn get(&self, a: usize, x: usize, b: usize) -> f64 {
        self.data[self.offset(a, x, b)]
    }

    pub fn set(&mut self, a: usize, x: usize, b: usize, v: f64) {
        let k = self.offset(a, x, b);
        self.data[k] = v;
    }

    /// `U(:, x, :)` as an `r_{i-1} × r_i` matrix.
    pub fn slice(&self, x: usize) -> DMatrix<f64> {
        let n = self.left * self.right;
        DMatrix::from_column_slice(self.left, self.right, &self.data[x * n..(x + 1) * n])
    }

    pub fn set_slice(&mut self, x: usize, m: &DMatrix<f64>) {
        let n = self.left * self.right;
        self.data[x * n..(x + 1) * n].copy_from_slice(m.as_slice());
    }

    /// The core as an order-3 [`DenseTensor`] with shape `(r_{i-1}, n_i, r_i)`.
    pub fn to_tensor(&self) -> DenseTensor {
        let shape = Shape::new(vec![self.left, self.size, self.right])
            .expect("core dimensions are positive");
        DenseTensor::from_fn(shape, |x| self.get(x[0], x[1], x[2]))
    }

    fn transform(&mut self, f: impl Fn(&DMatrix<f64>) -> DMatrix<f64>) {
        let mut out = None;
        for x in 0..self.size {
            let s = f(&self.slice(x));
            let core = out.get_or_insert_with(|| Core::zeros(s.nrows(), self.size, s.ncols()));
            core.set_slice(x, &s);
        }
        if let Some(core) = out {
            *self = core;
        }
    }
}

/// A tensor-train decomposition `U = U^(1) U^(2) ⋯ U^(d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TTDecomposition {
    shape: Shape,
    rank: RankVector,
    cores: Vec<Core>,
}

impl TTDecomposition {
    /// Validates the boundary ranks and the rank chain between neighbours.
    pub fn new(cores: Vec<Core>) -> Result<Self> {
        if cores.len() < 2 {
            return Err(Error::InvalidShape(format!(
                "a TT decomposition needs at least 2 cores, got {}",
                cores.len()
            )));
        }
        if cores[0].left != 1 {
            return Err(Error::ChainMismatch {
                core: 1,
                detail: format!("r_0 must be 1, got {}", cores[0].left),
            });
        }
        let d = cores.len();
        if cores[d - 1].right != 1 {
            return Err(Error::ChainMismatch {
                core: d,
                detail: format!("r_d must be 1, got {}", cores[d - 1].right),
            });
        }
        for i in 0..d - 1 {
            if cores[i].right != cores[i + 1].left {
                return Err(Error::ChainMismatch {
                    core: i + 1,
                    detail: format!(
                        "right rank {} differs from left rank {} of core {}",
                        cores[i].right,
                        cores[i + 1].left,
                        i + 2
                    ),
                });
            }
        }
        let shape = Shape::new(cores.iter().map(|c| c.size).collect())?;
        let rank = RankVector::new(cores[..d - 1].iter().map(|c| c.right).collect())?;
        Ok(TTDecomposition { shape, rank, cores })
    }

    /// Cores with independent standard normal entries.
    pub fn random<R: Rng + ?Sized>(shape: &Shape, rank: &RankVector, rng: &mut R) -> Result<Self> {
        if rank.len() + 1 != shape.order() {
            return Err(Error::InvalidRank(format!(
                "rank vector of length {} for an order-{} shape",
                rank.len(),
                shape.order()
            )));
        }
        let cores = shape
            .dims()
            .iter()
            .enumerate()
            .map(|(c, &n)| Core::random(rank.get(c), n, rank.get(c + 1), rng))
            .collect();
        TTDecomposition::new(cores)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn rank(&self) -> &RankVector {
        &self.rank
    }

    pub fn cores(&self) -> &[Core] {
        &self.cores
    }

    pub fn core(&self, i: usize) -> &Core {
        &self.cores[i]
    }

    pub fn core_mut(&mut self, i: usize) -> &mut Core {
        &mut self.cores[i]
    }

    pub fn into_cores(self) -> Vec<Core> {
        self.cores
    }

    /// A single entry via the chain product of core slices.
    pub fn entry(&self, index: &[usize]) -> f64 {
        let mut row = RowDVector::from_element(1, 1.0);
        for (core, &x) in self.cores.iter().zip(index) {
            row *= core.slice(x);
        }
        row[0]
    }

    /// Contracts all cores into the full tensor.
    pub fn contract(&self) -> DenseTensor {
        // Rows of `acc` are the column-major indices of (x_1, …, x_k).
        let first = &self.cores[0];
        let mut acc = DMatrix::from_fn(first.size, first.right, |x, b| first.get(0, x, b));
        for core in &self.cores[1..] {
            let rows = acc.nrows();
            let mut next = DMatrix::zeros(rows * core.size, core.right);
            for x in 0..core.size {
                let block = &acc * core.slice(x);
                next.rows_mut(x * rows, rows).copy_from(&block);
            }
            acc = next;
        }
        DenseTensor::new(self.shape.clone(), acc.as_slice().to_vec())
            .expect("contraction has the decomposition's shape")
    }

    /// Regauges the decomposition so that every canonical block is the
    /// identity: `U^(1)(1:r_1, 1:r_1) = I` and `U^(i)(1, 1:r_i, 1:r_i) = I`
    /// for `i = 2, …, d-1`.
    ///
    /// Proceeds core pair by core pair: the block `P` of core `i` is moved
    /// into core `i+1` (`U^(i) ← U^(i) P^{-1}`, `U^(i+1) ← P U^(i+1)`), which
    /// leaves the contraction unchanged. A block with σ_min/σ_max below
    /// `tolerance` is reported as [`Error::SingularCanonicalBlock`].
    pub fn canonicalize(&self, tolerance: f64) -> Result<TTDecomposition> {
        check_canonical_sizes(&self.shape, &self.rank)?;
        let mut out = self.clone();
        let d = self.shape.order();
        for c in 0..d - 1 {
            let block = out.canonical_block(c);
            let ratio = linalg::inverse_condition(&block);
            if ratio < tolerance {
                return Err(Error::SingularCanonicalBlock { mode: c + 1, ratio });
            }
            let inverse = block
                .clone()
                .try_inverse()
                .ok_or(Error::SingularCanonicalBlock { mode: c + 1, ratio })?;
            out.cores[c].transform(|s| s * &inverse);
            out.cores[c + 1].transform(|s| &block * s);
        }
        Ok(out)
    }

    /// `P_i^can` for the 0-based core `c < d - 1`: rows `x < r_i` of
    /// `U^(c)(0, x, :)`.
    pub fn canonical_block(&self, c: usize) -> DMatrix<f64> {
        let core = &self.cores[c];
        let r = core.right;
        DMatrix::from_fn(r, r, |x, b| core.get(0, x, b))
    }

    /// Largest deviation of any canonical block from the identity.
    pub fn canonical_defect(&self) -> f64 {
        (0..self.shape.order() - 1)
            .map(|c| {
                let p = self.canonical_block(c);
                let n = p.nrows();
                (&p - DMatrix::identity(n, n)).amax()
            })
            .fold(0.0, f64::max)
    }
}

/// The canonical blocks need `r_i <= n_i` for `i = 1, …, d-1`.
pub(crate) fn check_canonical_sizes(shape: &Shape, rank: &RankVector) -> Result<()> {
    for (k, &r) in rank.ranks().iter().enumerate() {
        let n = shape.dims()[k];
        if r > n {
            return Err(Error::CanonicalFormUnavailable {
                mode: k + 1,
                size: n,
                rank: r,
            });
        }
    }
    Ok(())
}

/// Numerical TT rank: `r_i` counts singular values of the `i`-th unfolding
/// above `tolerance · σ_1`.
///
/// A zero tensor yields a degenerate (all-zero) rank vector.
pub fn tt_rank(t: &DenseTensor, tolerance: f64) -> RankVector {
    let d = t.shape().order();
    let ranks = (1..d)
        .map(|i| linalg::numerical_rank(&t.unfold(i).expect("mode in range"), tolerance))
        .collect();
    RankVector::from_measured(ranks)
}

/// Left-to-right sequential SVD.
///
/// Each step keeps the singular values above `tolerance · σ_1` of the
/// current reshaped remainder, so the resulting ranks are the minimal TT
/// ranks of `t`. Fails when a measured rank exceeds the requested bound.
pub fn tt_svd(t: &DenseTensor, rank: &RankVector, tolerance: f64) -> Result<TTDecomposition> {
    let shape = t.shape();
    let d = shape.order();
    if rank.len() != d - 1 {
        return Err(Error::InvalidRank(format!(
            "expected {} ranks, got {}",
            d - 1,
            rank.len()
        )));
    }
    let mut cores = Vec::with_capacity(d);
    let mut measured = Vec::with_capacity(d - 1);
    let mut data = t.values().to_vec();
    let mut left = 1;
    for i in 0..d - 1 {
        let n = shape.dims()[i];
        let rows = left * n;
        let cols = data.len() / rows;
        let m = DMatrix::from_column_slice(rows, cols, &data);
        let (u, s, v_t) = linalg::thin_svd(&m).ok_or_else(|| {
            Error::InvalidArgument(format!("SVD of unfolding {} did not converge", i + 1))
        })?;
        let r = linalg::rank_from_singular_values(&s, tolerance);
        measured.push(r);
        if r == 0 || r > rank.ranks()[i] {
            let mut shown = measured.clone();
            shown.resize(d - 1, 0);
            return Err(Error::RankInfeasible {
                requested: rank.ranks().to_vec(),
                measured: shown,
            });
        }
        cores.push(Core::from_fn(left, n, r, |a, x, b| u[(a + left * x, b)]));
        let mut rest = v_t.rows(0, r).into_owned();
        for (k, mut row) in rest.row_iter_mut().enumerate() {
            row *= s[k];
        }
        data = rest.as_slice().to_vec();
        left = r;
    }
    let n = shape.dims()[d - 1];
    cores.push(Core::from_fn(left, n, 1, |a, x, _| data[a + left * x]));
    TTDecomposition::new(cores)
}

/// `L(x) = U^(1)(x_1, :) U^(2)(:, x_2, :) ⋯ U^(k)(:, x_k, :)` over the first
/// `k = index.len()` cores.
pub(crate) fn left_chain(cores: &[Core], index: &[usize]) -> RowDVector<f64> {
    let mut row = RowDVector::from_element(1, 1.0);
    for (core, &x) in cores.iter().zip(index) {
        row *= core.slice(x);
    }
    row
}

/// Partial products needed for gradients of `L(x) w`: element `c` of the
/// first vector is the product of slices before core `c`, element `c` of the
/// second is the product of slices after core `c` applied to `w`.
pub(crate) fn chain_partials(
    cores: &[Core],
    index: &[usize],
    w: &DVector<f64>,
) -> (Vec<RowDVector<f64>>, Vec<DVector<f64>>) {
    let k = cores.len();
    let mut lefts = Vec::with_capacity(k);
    let mut row = RowDVector::from_element(1, 1.0);
    for c in 0..k {
        lefts.push(row.clone());
        row *= cores[c].slice(index[c]);
    }
    let mut rights = vec![DVector::zeros(0); k];
    let mut col = w.clone();
    for c in (0..k).rev() {
        rights[c] = col.clone();
        col = cores[c].slice(index[c]) * col;
    }
    (lefts, rights)
}
