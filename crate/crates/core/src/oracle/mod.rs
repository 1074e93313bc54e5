//! Numeric ground truth for the combinatorial conditions.
//!
//! The polynomial system has one equation per constraint-tensor column. Its
//! variables are the entries of the first `d - 1` cores that the canonical
//! gauge leaves free; the last core is eliminated slice by slice through
//! the pivot equations. Algebraic independence of a set of polynomials is
//! measured as the rank of their Jacobian at random points, which is
//! correct with probability one.

mod completion;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;
use crate::pattern::ConstraintTensor;
use crate::tensor::{chain_partials, check_canonical_sizes, left_chain, Core, DenseTensor, RankVector, Shape, TTDecomposition};

pub use completion::{count_completions, Cluster, CompletionCount, CompletionOptions};

/// A free entry `U^(core)(a, x, b)`, all 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Variable {
    pub core: usize,
    pub a: usize,
    pub x: usize,
    pub b: usize,
}

/// Free entries of the first `d - 1` cores under the canonical gauge.
///
/// For 0-based core `c < d - 1` with right rank `r`, the entries
/// `U^(c)(0, x, b)` with `x < r` are fixed to `δ(x, b)`; everything else is
/// a variable, enumerated by core, then slice, then column-major.
#[derive(Debug, Clone)]
pub(crate) struct Gauge {
    shape: Shape,
    rank: RankVector,
    variables: Vec<Variable>,
    index: Vec<Vec<Option<usize>>>,
}

impl Gauge {
    pub(crate) fn new(shape: &Shape, rank: &RankVector) -> Result<Self> {
        rank.validate_for(shape)?;
        check_canonical_sizes(shape, rank)?;
        let d = shape.order();
        let mut variables = Vec::new();
        let mut index = Vec::with_capacity(d - 1);
        for c in 0..d - 1 {
            let (left, n, right) = (rank.get(c), shape.dims()[c], rank.get(c + 1));
            let mut slots = vec![None; left * n * right];
            for x in 0..n {
                for b in 0..right {
                    for a in 0..left {
                        if !(a == 0 && x < right) {
                            slots[x * left * right + a + left * b] = Some(variables.len());
                            variables.push(Variable { core: c, a, x, b });
                        }
                    }
                }
            }
            index.push(slots);
        }
        Ok(Gauge {
            shape: shape.clone(),
            rank: rank.clone(),
            variables,
            index,
        })
    }

    pub(crate) fn len(&self) -> usize {
        self.variables.len()
    }

    fn slot(&self, c: usize, a: usize, x: usize, b: usize) -> Option<usize> {
        let (left, right) = (self.rank.get(c), self.rank.get(c + 1));
        self.index[c][x * left * right + a + left * b]
    }

    pub(crate) fn cores(&self, theta: &[f64]) -> Vec<Core> {
        (0..self.shape.order() - 1)
            .map(|c| {
                Core::from_fn(self.rank.get(c), self.shape.dims()[c], self.rank.get(c + 1), |a, x, b| {
                    match self.slot(c, a, x, b) {
                        Some(k) => theta[k],
                        None => f64::from(u8::from(x == b)),
                    }
                })
            })
            .collect()
    }

    /// Adds `scale · ∂(L(z) w)/∂θ` to `out`, `z` a cell over the first `d-1` modes.
    pub(crate) fn add_gradient(&self, cores: &[Core], z: &[usize], w: &DVector<f64>, scale: f64, out: &mut [f64]) {
        let (lefts, rights) = chain_partials(cores, z, w);
        for (c, (l, r)) in lefts.iter().zip(&rights).enumerate() {
            for a in 0..l.len() {
                for b in 0..r.len() {
                    if let Some(k) = self.slot(c, a, z[c], b) {
                        out[k] += scale * l[a] * r[b];
                    }
                }
            }
        }
    }
}

/// `P(Ω)` for a constraint tensor.
#[derive(Debug, Clone)]
pub struct PolynomialSystem {
    ct: ConstraintTensor,
    gauge: Gauge,
}

/// A random point: canonical cores `U^(1..d-1)` and the last core as an
/// `r_{d-1} × n_d` matrix.
#[derive(Debug, Clone)]
pub struct GenericPoint {
    pub cores: Vec<Core>,
    pub last: DMatrix<f64>,
}

impl GenericPoint {
    pub fn decomposition(&self) -> TTDecomposition {
        let r = self.last.nrows();
        let n = self.last.ncols();
        let mut cores = self.cores.clone();
        cores.push(Core::from_fn(r, n, 1, |a, x, _| self.last[(a, x)]));
        TTDecomposition::new(cores).expect("point cores chain")
    }

    pub fn tensor(&self) -> DenseTensor {
        self.decomposition().contract()
    }
}

impl PolynomialSystem {
    /// Needs `r_i <= n_i` for `i < d` so that the canonical blocks exist.
    pub fn new(ct: &ConstraintTensor) -> Result<Self> {
        Ok(PolynomialSystem {
            ct: ct.clone(),
            gauge: Gauge::new(ct.pattern_shape(), ct.rank())?,
        })
    }

    pub fn constraint(&self) -> &ConstraintTensor {
        &self.ct
    }

    pub fn variables(&self) -> &[Variable] {
        &self.gauge.variables
    }

    /// Size of the variable map, `Σ_{i<d} r_{i-1} n_i r_i − Σ r_i²`.
    pub fn num_variables(&self) -> usize {
        self.gauge.len()
    }

    /// One polynomial per constraint-tensor column.
    pub fn num_polynomials(&self) -> usize {
        self.ct.num_columns()
    }

    /// Canonical cores filled from a variable vector.
    pub fn cores_from(&self, theta: &[f64]) -> Vec<Core> {
        self.gauge.cores(theta)
    }

    /// Standard normal free variables and last core.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> GenericPoint {
        let theta: Vec<f64> = (0..self.num_variables()).map(|_| rng.sample(StandardNormal)).collect();
        let shape = self.ct.pattern_shape();
        let d = shape.order();
        let last = DMatrix::from_fn(self.ct.rank().last(), shape.dims()[d - 1], |_, _| {
            rng.sample(StandardNormal)
        });
        GenericPoint {
            cores: self.cores_from(&theta),
            last,
        }
    }

    /// Pivot matrix of slice `s`: row `k` is `L(π_k)`.
    fn pivot_matrix(&self, point: &GenericPoint, s: usize) -> DMatrix<f64> {
        let pivots = self.ct.pivots(s);
        let r = self.ct.rank().last();
        let mut a = DMatrix::zeros(pivots.len(), r);
        for (k, cell) in pivots.iter().enumerate() {
            a.row_mut(k).copy_from(&left_chain(&point.cores, cell));
        }
        a
    }

    /// Solves the pivot equations for `U^(d)` given the first cores and a
    /// tensor holding the pivot values. Returns the `r_{d-1} × n_d` last core
    /// with zero columns for excluded slices.
    pub fn last_core_from_pivots(&self, point: &GenericPoint, values: &DenseTensor) -> Result<DMatrix<f64>> {
        let shape = self.ct.pattern_shape();
        let d = shape.order();
        let r = self.ct.rank().last();
        let mut w = DMatrix::zeros(r, shape.dims()[d - 1]);
        for s in 0..shape.dims()[d - 1] {
            let pivots = self.ct.pivots(s);
            if pivots.is_empty() {
                continue;
            }
            let a = self.pivot_matrix(point, s);
            let v = DVector::from_iterator(
                pivots.len(),
                pivots.iter().map(|cell| {
                    let mut x = cell.clone();
                    x.push(s);
                    values[x.as_slice()]
                }),
            );
            let sol = linalg::solve(&a, &v, linalg::DEFAULT_TOLERANCE)
                .ok_or(Error::SingularPivotSystem { slice: s + 1 })?;
            w.set_column(s, &sol);
        }
        Ok(w)
    }

    /// Jacobian of the selected polynomials at `point`, one row per column.
    ///
    /// For column `(s, π, y)` the polynomial is `L(y) A⁻¹ v_π − u(y, s)` with
    /// `A` the pivot matrix; at a consistent point its gradient is
    /// `∇(L(y) w) − Σ_k u_k ∇(L(π_k) w)` where `Aᵀ u = L(y)ᵀ`.
    pub fn jacobian(&self, columns: &[usize], point: &GenericPoint) -> Result<DMatrix<f64>> {
        let mut jac = DMatrix::zeros(columns.len(), self.num_variables());
        let mut row = vec![0.0; self.num_variables()];
        for (i, &k) in columns.iter().enumerate() {
            let col = self.ct.column(k);
            let s = col.slice;
            let a = self.pivot_matrix(point, s);
            let ly = left_chain(&point.cores, &col.extra).transpose();
            let u = linalg::solve(&a.transpose(), &ly, linalg::DEFAULT_TOLERANCE)
                .ok_or(Error::SingularPivotSystem { slice: s + 1 })?;
            let w = point.last.column(s).into_owned();
            row.iter_mut().for_each(|v| *v = 0.0);
            self.gauge.add_gradient(&point.cores, &col.extra, &w, 1.0, &mut row);
            for (j, cell) in col.pivots.iter().enumerate() {
                self.gauge.add_gradient(&point.cores, cell, &w, -u[j], &mut row);
            }
            for (j, v) in row.iter().enumerate() {
                jac[(i, j)] = *v;
            }
        }
        Ok(jac)
    }

    /// Values of the selected polynomials at `point` for the data `values`
    /// (zero when `values` comes from the point itself).
    pub fn evaluate(&self, columns: &[usize], point: &GenericPoint, values: &DenseTensor) -> Result<Vec<f64>> {
        let w = self.last_core_from_pivots(point, values)?;
        Ok(columns
            .iter()
            .map(|&k| {
                let col = self.ct.column(k);
                let pred = (left_chain(&point.cores, &col.extra) * w.column(col.slice))[0];
                pred - values[col.entry().as_slice()]
            })
            .collect())
    }
}

/// Settings for the Jacobian rank test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankOptions {
    pub trials: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            trials: 3,
            tolerance: linalg::DEFAULT_TOLERANCE,
            seed: 0,
        }
    }
}

/// Numerical Jacobian rank of the selected polynomials at each trial point.
pub fn jacobian_ranks(sys: &PolynomialSystem, columns: &[usize], opts: &RankOptions) -> Result<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    (0..opts.trials.max(1))
        .map(|_| {
            let point = sys.random_point(&mut rng);
            if columns.is_empty() {
                return Ok(0);
            }
            Ok(linalg::numerical_rank(&sys.jacobian(columns, &point)?, opts.tolerance))
        })
        .collect()
}

/// Maximum Jacobian rank over `opts.trials` random points: the number of
/// algebraically independent polynomials among `columns`, with probability
/// one. Empty selections have rank 0.
pub fn jacobian_rank(sys: &PolynomialSystem, columns: &[usize], opts: &RankOptions) -> Result<usize> {
    Ok(jacobian_ranks(sys, columns, opts)?.into_iter().max().unwrap_or(0))
}

/// Variables with a numerically nonzero Jacobian column at some trial point.
pub fn involved_variables(sys: &PolynomialSystem, columns: &[usize], opts: &RankOptions) -> Result<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut involved = vec![false; sys.num_variables()];
    for _ in 0..opts.trials.max(1) {
        let point = sys.random_point(&mut rng);
        let jac = sys.jacobian(columns, &point)?;
        let scale = jac.amax();
        for (j, col) in jac.column_iter().enumerate() {
            if col.amax() > opts.tolerance * scale {
                involved[j] = true;
            }
        }
    }
    Ok((0..involved.len()).filter(|&j| involved[j]).collect())
}

/// Evidence about a dependent selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependenceReport {
    pub size: usize,
    pub rank: usize,
    /// Every `(t-1)`-subset has full Jacobian rank.
    pub proper_subsets_independent: bool,
    pub involved_variables: usize,
}

impl DependenceReport {
    /// Minimal dependence with exactly `t - 1` involved variables.
    pub fn holds(&self) -> bool {
        self.proper_subsets_independent && self.involved_variables + 1 == self.size
    }
}

/// Errors with [`Error::PreconditionNotDependent`] when the selection has
/// full Jacobian rank.
pub fn dependence_report(sys: &PolynomialSystem, columns: &[usize], opts: &RankOptions) -> Result<DependenceReport> {
    let t = columns.len();
    let rank = jacobian_rank(sys, columns, opts)?;
    if rank >= t {
        return Err(Error::PreconditionNotDependent { rank, size: t });
    }
    let mut proper = true;
    for skip in 0..t {
        let sub: Vec<usize> = columns
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != skip)
            .map(|(_, &k)| k)
            .collect();
        if jacobian_rank(sys, &sub, opts)? < sub.len() {
            proper = false;
            break;
        }
    }
    Ok(DependenceReport {
        size: t,
        rank,
        proper_subsets_independent: proper,
        involved_variables: involved_variables(sys, columns, opts)?.len(),
    })
}

/// True iff the selection is minimally dependent and involves exactly
/// `t - 1` variables.
pub fn verify_minimal_dependence(sys: &PolynomialSystem, columns: &[usize], opts: &RankOptions) -> Result<bool> {
    Ok(dependence_report(sys, columns, opts)?.holds())
}
