//! Multi-restart least-squares completion in the canonical parametrization.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::Gauge;
use crate::error::{Error, Result};
use crate::linalg;
use crate::pattern::SamplingPattern;
use crate::tensor::{left_chain, Core, DenseTensor, RankVector, TTDecomposition};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompletionOptions {
    pub restarts: usize,
    /// Relative Frobenius distance below which two completions coincide.
    pub cluster_tol: f64,
    /// Relative residual a restart must reach to count as converged.
    pub residual_tol: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for CompletionOptions {
    fn default() -> Self {
        CompletionOptions {
            restarts: 20,
            cluster_tol: 1e-4,
            residual_tol: 1e-8,
            max_iters: 500,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub representative: DenseTensor,
    /// Relative residual of the representative on the observed entries.
    pub residual: f64,
    pub members: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionCount {
    pub clusters: Vec<Cluster>,
    pub restarts: usize,
    pub converged: usize,
    /// The fit Jacobian has full column rank at every representative, so
    /// each solution is isolated.
    pub locally_rigid: bool,
}

impl CompletionCount {
    /// Number of distinct completions found; a lower bound on the true count.
    pub fn count(&self) -> usize {
        self.clusters.len()
    }
}

/// Fits TT cores of rank `rank` to the observed entries from random starts
/// and clusters the converged full tensors.
///
/// `values` lists observations in the iteration order of `p`. Tensors with
/// no canonical form (a measure-zero set) are not reachable.
pub fn count_completions(
    p: &SamplingPattern,
    values: &[f64],
    rank: &RankVector,
    opts: &CompletionOptions,
) -> Result<CompletionCount> {
    if values.len() != p.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            got: values.len(),
        });
    }
    if opts.restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be positive".into()));
    }
    let fit = Fit::new(p, values, rank)?;
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut rigid = true;
    let mut converged = 0;
    for k in 0..opts.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(k as u64));
        let start: Vec<f64> = (0..fit.unknowns()).map(|_| rng.sample(StandardNormal)).collect();
        let (params, residual) = fit.levenberg_marquardt(start, opts);
        if !(residual <= opts.residual_tol) {
            continue;
        }
        converged += 1;
        let tensor = fit.tensor(&params);
        match clusters
            .iter_mut()
            .find(|c| linalg::relative_distance(c.representative.values(), tensor.values()) <= opts.cluster_tol)
        {
            Some(c) => {
                c.members += 1;
                if residual < c.residual {
                    c.representative = tensor;
                    c.residual = residual;
                }
            }
            None => {
                let j = fit.jacobian(&params);
                rigid &= linalg::numerical_rank(&j, 1e-8) == fit.unknowns();
                clusters.push(Cluster {
                    representative: tensor,
                    residual,
                    members: 1,
                });
            }
        }
    }
    if clusters.is_empty() {
        return Err(Error::NoFitFound);
    }
    Ok(CompletionCount {
        clusters,
        restarts: opts.restarts,
        converged,
        locally_rigid: rigid,
    })
}

/// Unknowns are the gauge variables followed by the last core, stored as an
/// `r_{d-1} × n_d` column-major matrix.
struct Fit {
    gauge: Gauge,
    cells: Vec<Vec<usize>>,
    values: DVector<f64>,
    last_rows: usize,
    last_cols: usize,
}

impl Fit {
    fn new(p: &SamplingPattern, values: &[f64], rank: &RankVector) -> Result<Self> {
        let shape = p.shape();
        let gauge = Gauge::new(shape, rank)?;
        Ok(Fit {
            gauge,
            cells: p.iter().cloned().collect(),
            values: DVector::from_column_slice(values),
            last_rows: rank.last(),
            last_cols: shape.dims()[shape.order() - 1],
        })
    }

    fn unknowns(&self) -> usize {
        self.gauge.len() + self.last_rows * self.last_cols
    }

    fn split(&self, params: &[f64]) -> (Vec<Core>, DMatrix<f64>) {
        let (theta, last) = params.split_at(self.gauge.len());
        (
            self.gauge.cores(theta),
            DMatrix::from_column_slice(self.last_rows, self.last_cols, last),
        )
    }

    fn residuals(&self, params: &[f64]) -> DVector<f64> {
        let (cores, w) = self.split(params);
        DVector::from_iterator(
            self.cells.len(),
            self.cells.iter().zip(self.values.iter()).map(|(x, v)| {
                let (head, s) = x.split_at(x.len() - 1);
                (left_chain(&cores, head) * w.column(s[0]))[0] - v
            }),
        )
    }

    fn jacobian(&self, params: &[f64]) -> DMatrix<f64> {
        let (cores, w) = self.split(params);
        let q = self.gauge.len();
        let mut j = DMatrix::zeros(self.cells.len(), self.unknowns());
        let mut row = vec![0.0; q];
        for (i, x) in self.cells.iter().enumerate() {
            let (head, s) = x.split_at(x.len() - 1);
            let s = s[0];
            row.iter_mut().for_each(|v| *v = 0.0);
            self.gauge.add_gradient(&cores, head, &w.column(s).into_owned(), 1.0, &mut row);
            for (k, v) in row.iter().enumerate() {
                j[(i, k)] = *v;
            }
            let l = left_chain(&cores, head);
            for a in 0..self.last_rows {
                j[(i, q + a + self.last_rows * s)] = l[a];
            }
        }
        j
    }

    fn relative(&self, r: &DVector<f64>) -> f64 {
        let scale = self.values.norm();
        if scale > 0.0 {
            r.norm() / scale
        } else {
            r.norm()
        }
    }

    fn tensor(&self, params: &[f64]) -> DenseTensor {
        let (mut cores, w) = self.split(params);
        cores.push(Core::from_fn(self.last_rows, self.last_cols, 1, |a, x, _| w[(a, x)]));
        TTDecomposition::new(cores).expect("fit cores chain").contract()
    }

    /// Returns the final parameters and their relative residual.
    fn levenberg_marquardt(&self, mut params: Vec<f64>, opts: &CompletionOptions) -> (Vec<f64>, f64) {
        let mut r = self.residuals(&params);
        let mut cost = r.norm_squared();
        let mut lambda = 1e-3;
        let target = (opts.residual_tol * 1e-2 * self.values.norm().max(f64::MIN_POSITIVE)).powi(2);
        for _ in 0..opts.max_iters {
            if cost <= target {
                break;
            }
            let j = self.jacobian(&params);
            let jt = j.transpose();
            let g = &jt * &r;
            let h = &jt * &j;
            let mut improved = false;
            while lambda < 1e12 {
                let mut a = h.clone();
                for k in 0..a.nrows() {
                    a[(k, k)] += lambda * (1.0 + h[(k, k)]);
                }
                let Some(step) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                    lambda *= 10.0;
                    continue;
                };
                let trial: Vec<f64> = params.iter().zip(step.iter()).map(|(p, s)| p + s).collect();
                let tr = self.residuals(&trial);
                let tc = tr.norm_squared();
                if tc.is_finite() && tc < cost {
                    params = trial;
                    r = tr;
                    cost = tc;
                    lambda = (lambda / 3.0).max(1e-12);
                    improved = true;
                    break;
                }
                lambda *= 4.0;
            }
            if !improved {
                break;
            }
        }
        let rel = self.relative(&r);
        (params, rel)
    }
}
