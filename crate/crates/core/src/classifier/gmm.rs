use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::kmeans::kmeans;
use crate::features::FeatureMatrix;
use crate::{Error, Result};

/// Absolute lower bound on any variance, for dimensions that are constant
/// across the whole training set.
const MIN_VARIANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GmmConfig {
    pub components: usize,
    pub seed: u64,
    /// Variance floor as a fraction of the global per-dimension variance.
    pub var_floor: f64,
    /// Stop once the per-frame log-likelihood gains less than this.
    pub tol: f64,
    pub max_iters: usize,
    pub kmeans_iters: usize,
}

impl Default for GmmConfig {
    fn default() -> Self {
        GmmConfig {
            components: 512,
            seed: 1,
            var_floor: 1e-3,
            tol: 1e-5,
            max_iters: 100,
            kmeans_iters: 10,
        }
    }
}

impl GmmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.components == 0 {
            return Err(Error::config("gmm.components", "must be at least 1"));
        }
        if !(self.var_floor > 0.0) {
            return Err(Error::config("gmm.var_floor", "must be positive"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::config("gmm.tol", "must be positive"));
        }
        Ok(())
    }
}

/// Mixture of diagonal-covariance Gaussians.
#[derive(Debug, Clone, PartialEq)]
pub struct Gmm {
    weights: Array1<f64>,
    means: Array2<f64>,
    variances: Array2<f64>,
}

impl Gmm {
    pub fn new(weights: Array1<f64>, means: Array2<f64>, variances: Array2<f64>) -> Result<Self> {
        let m = weights.len();
        if m == 0 {
            return Err(Error::invalid("GMM needs at least one component"));
        }
        if means.nrows() != m || variances.dim() != means.dim() {
            return Err(Error::invalid(format!(
                "inconsistent GMM shapes: {m} weights, means {:?}, variances {:?}",
                means.dim(),
                variances.dim()
            )));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) || (weights.sum() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("GMM weights must be a probability vector"));
        }
        if variances.iter().any(|v| !(*v > 0.0 && v.is_finite())) || means.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("GMM means must be finite and variances positive"));
        }
        Ok(Gmm {
            weights,
            means: means.as_standard_layout().into_owned(),
            variances: variances.as_standard_layout().into_owned(),
        })
    }

    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means.ncols()
    }

    pub fn weights(&self) -> &Array1<f64> {
        &self.weights
    }

    pub fn means(&self) -> &Array2<f64> {
        &self.means
    }

    pub fn variances(&self) -> &Array2<f64> {
        &self.variances
    }

    /// Mean over frames of `log sum_m w_m N(x | mu_m, diag var_m)`.
    pub fn avg_log_likelihood(&self, f: &FeatureMatrix) -> Result<f64> {
        self.avg_log_likelihood_rows(f.rows().view())
    }

    pub fn avg_log_likelihood_rows(&self, x: ArrayView2<f64>) -> Result<f64> {
        if x.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.ncols(),
            });
        }
        if x.nrows() == 0 {
            return Err(Error::invalid("no frames to score"));
        }
        let pre = Precomputed::new(self);
        let mut buf = vec![0.0; self.n_components()];
        let x = x.as_standard_layout();
        let total: f64 = x
            .rows()
            .into_iter()
            .map(|r| pre.log_density(r.as_slice().expect("standard layout"), &mut buf))
            .sum();
        Ok(total / x.nrows() as f64)
    }

    /// Log-density of a single vector.
    pub fn log_density(&self, x: &[f64]) -> f64 {
        Precomputed::new(self).log_density(x, &mut vec![0.0; self.n_components()])
    }
}

/// Per-component constants for fast evaluation.
struct Precomputed<'a> {
    gmm: &'a Gmm,
    // log w_m - 0.5 sum_d log(2 pi var_md)
    log_norm: Vec<f64>,
    inv_var: Array2<f64>,
}

impl<'a> Precomputed<'a> {
    fn new(gmm: &'a Gmm) -> Self {
        let log_norm = gmm
            .weights
            .iter()
            .zip(gmm.variances.rows())
            .map(|(w, v)| w.ln() - 0.5 * v.iter().map(|s| (2.0 * PI * s).ln()).sum::<f64>())
            .collect();
        Precomputed {
            gmm,
            log_norm,
            inv_var: gmm.variances.mapv(|v| 1.0 / v),
        }
    }

    /// Fills `buf` with per-component joint log-densities and returns their
    /// log-sum-exp.
    fn log_density(&self, x: &[f64], buf: &mut [f64]) -> f64 {
        let d = self.gmm.dim();
        let means = self.gmm.means.as_slice().expect("standard layout");
        let iv = self.inv_var.as_slice().expect("standard layout");
        let mut max = f64::NEG_INFINITY;
        for (m, b) in buf.iter_mut().enumerate() {
            let q = mahalanobis_diag(x, &means[m * d..(m + 1) * d], &iv[m * d..(m + 1) * d]);
            *b = self.log_norm[m] - 0.5 * q;
            max = max.max(*b);
        }
        if max == f64::NEG_INFINITY {
            return max;
        }
        max + buf.iter().map(|b| (b - max).exp()).sum::<f64>().ln()
    }
}

#[inline]
fn mahalanobis_diag(x: &[f64], mu: &[f64], iv: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = x.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            let i = c * 4 + l;
            let t = x[i] - mu[i];
            acc[l] += t * t * iv[i];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in chunks * 4..x.len() {
        let t = x[i] - mu[i];
        s += t * t * iv[i];
    }
    s
}

/// Per-iteration record of an EM run.
#[derive(Debug, Clone, Default)]
pub struct EmTrace {
    /// Average per-frame log-likelihood at the start of each iteration.
    pub log_likelihood: Vec<f64>,
    /// Sum of mixture weights after each M-step.
    pub weight_sums: Vec<f64>,
    /// Smallest `variance - floor` after each M-step.
    pub min_floor_margin: Vec<f64>,
    pub converged: bool,
    /// Per-dimension variance floor used.
    pub floor: Vec<f64>,
}

/// Train a GMM on the rows of `data`. See [`em_train_traced`].
pub fn em_train(data: ArrayView2<f64>, cfg: &GmmConfig) -> Result<Gmm> {
    em_train_traced(data, cfg).map(|(g, _)| g)
}

/// k-means++ initialisation, then EM on diagonal Gaussians until the
/// per-frame log-likelihood gain drops below `tol` or `max_iters` is hit.
/// The variance floor is applied in every M-step.
pub fn em_train_traced(data: ArrayView2<f64>, cfg: &GmmConfig) -> Result<(Gmm, EmTrace)> {
    cfg.validate()?;
    let (n, d) = data.dim();
    let m = cfg.components;
    if n < m {
        return Err(Error::invalid(format!("{n} rows cannot train {m} components")));
    }
    if d == 0 {
        return Err(Error::invalid("training data has zero columns"));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("GMM training data"));
    }
    let data = data.as_standard_layout();

    let global_var = data.var_axis(ndarray::Axis(0), 0.0);
    let floor: Vec<f64> = global_var.iter().map(|v| (cfg.var_floor * v).max(MIN_VARIANCE)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let km = kmeans(data.view(), m, cfg.kmeans_iters, &mut rng);
    let mut counts = vec![0usize; m];
    let mut sq = Array2::<f64>::zeros((m, d));
    for (i, &a) in km.assignment.iter().enumerate() {
        counts[a] += 1;
        for j in 0..d {
            let t = data[[i, j]] - km.centroids[[a, j]];
            sq[[a, j]] += t * t;
        }
    }
    let total: f64 = counts.iter().map(|&c| c.max(1) as f64).sum();
    let weights = Array1::from_iter(counts.iter().map(|&c| c.max(1) as f64 / total));
    let mut variances = Array2::zeros((m, d));
    for c in 0..m {
        for j in 0..d {
            let v = if counts[c] > 1 {
                sq[[c, j]] / counts[c] as f64
            } else {
                global_var[j]
            };
            variances[[c, j]] = v.max(floor[j]);
        }
    }
    let mut gmm = Gmm::new(weights, km.centroids, variances)?;

    let mut trace = EmTrace {
        floor: floor.clone(),
        ..EmTrace::default()
    };
    let mut prev: Option<f64> = None;
    for _ in 0..cfg.max_iters {
        let stats = e_step(&gmm, data.view());
        let ll = stats.log_likelihood / n as f64;
        trace.log_likelihood.push(ll);
        if let Some(p) = prev {
            if ll - p < cfg.tol {
                trace.converged = true;
                break;
            }
        }
        prev = Some(ll);
        gmm = m_step(&gmm, stats, n, &floor);
        trace.weight_sums.push(gmm.weights.sum());
        trace.min_floor_margin.push(
            gmm.variances
                .rows()
                .into_iter()
                .flat_map(|r| r.iter().zip(&floor).map(|(v, f)| v - f).collect::<Vec<_>>())
                .fold(f64::INFINITY, f64::min),
        );
    }
    Ok((gmm, trace))
}

/// Sufficient statistics, with first and second moments taken about each
/// component's current mean for numerical stability.
struct Stats {
    log_likelihood: f64,
    occupancy: Vec<f64>,
    first: Array2<f64>,
    second: Array2<f64>,
}

fn e_step(gmm: &Gmm, data: ArrayView2<f64>) -> Stats {
    let (m, d) = (gmm.n_components(), gmm.dim());
    let pre = Precomputed::new(gmm);
    let means = gmm.means.as_slice().expect("standard layout");
    let mut stats = Stats {
        log_likelihood: 0.0,
        occupancy: vec![0.0; m],
        first: Array2::zeros((m, d)),
        second: Array2::zeros((m, d)),
    };
    let first = stats.first.as_slice_mut().expect("standard layout");
    let second = stats.second.as_slice_mut().expect("standard layout");
    let mut buf = vec![0.0; m];
    for row in data.rows() {
        let x = row.as_slice().expect("standard layout");
        let lse = pre.log_density(x, &mut buf);
        stats.log_likelihood += lse;
        for c in 0..m {
            let g = (buf[c] - lse).exp();
            if g < 1e-14 {
                continue;
            }
            stats.occupancy[c] += g;
            let mu = &means[c * d..(c + 1) * d];
            let f = &mut first[c * d..(c + 1) * d];
            let s = &mut second[c * d..(c + 1) * d];
            for j in 0..d {
                let t = x[j] - mu[j];
                f[j] += g * t;
                s[j] += g * t * t;
            }
        }
    }
    stats
}

fn m_step(gmm: &Gmm, stats: Stats, n: usize, floor: &[f64]) -> Gmm {
    let (m, d) = (gmm.n_components(), gmm.dim());
    let mut weights = Array1::zeros(m);
    let mut means = gmm.means.clone();
    let mut variances = gmm.variances.clone();
    for c in 0..m {
        let occ = stats.occupancy[c];
        weights[c] = occ / n as f64;
        if occ < 1e-10 {
            continue;
        }
        for j in 0..d {
            let shift = stats.first[[c, j]] / occ;
            means[[c, j]] += shift;
            let var = stats.second[[c, j]] / occ - shift * shift;
            variances[[c, j]] = var.max(floor[j]);
        }
    }
    let total = weights.sum();
    weights /= total;
    Gmm {
        weights,
        means,
        variances,
    }
}
