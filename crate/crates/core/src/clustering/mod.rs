//! Clustering algorithms used to produce partitions for comparison.
//!
//! All algorithms use Euclidean distance, run single-threaded per restart and
//! are deterministic given the configured seed. Restart `r` draws from
//! [`rng::stream`]`(seed, r)`.

mod fcm;
mod kmeans;
mod pd;

pub use fcm::{fcm, FcmResult};
pub use kmeans::{kmeans, KMeansResult};
pub use pd::{pd_cluster, pd_membership, true_fuzzy_partition, PdResult};

use serde::{Deserialize, Serialize};

use crate::rng::{self, Rng};
use crate::{Error, Result};

/// Numeric data matrix, `n` rows by `p` features, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    data: Vec<f64>,
    n: usize,
    p: usize,
}

impl Dataset {
    pub fn new(data: Vec<f64>, n: usize, p: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewObjects(n));
        }
        if p == 0 {
            return Err(Error::NoNumericFeatures);
        }
        if data.len() != n * p {
            return Err(Error::Shape(format!(
                "{} values do not form a {n}x{p} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / p,
                col: pos % p,
            });
        }
        Ok(Self { data, n, p })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let p = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * p);
        for (i, r) in rows.iter().enumerate() {
            if r.as_ref().len() != p {
                return Err(Error::Shape(format!(
                    "row {i} has {} features, expected {p}",
                    r.as_ref().len()
                )));
            }
            data.extend_from_slice(r.as_ref());
        }
        Self::new(data, rows.len(), p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.p)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Column-wise mean.
    pub fn mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.p];
        for r in self.rows() {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= self.n as f64);
        mean
    }

    /// Z-scored copy. Constant columns are centered but not scaled.
    pub fn standardized(&self) -> Self {
        let mean = self.mean();
        let mut sd = vec![0.0; self.p];
        for r in self.rows() {
            for ((s, v), m) in sd.iter_mut().zip(r).zip(&mean) {
                *s += (v - m).powi(2);
            }
        }
        sd.iter_mut().for_each(|s| *s = (*s / (self.n - 1) as f64).sqrt());
        let data = self
            .rows()
            .flat_map(|r| {
                r.iter()
                    .zip(&mean)
                    .zip(&sd)
                    .map(|((v, m), s)| if *s > 0.0 { (v - m) / s } else { v - m })
                    .collect::<Vec<_>>()
            })
            .collect();
        Self {
            data,
            n: self.n,
            p: self.p,
        }
    }

    /// Multiply every coordinate by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            data: self.data.iter().map(|v| v * factor).collect(),
            n: self.n,
            p: self.p,
        }
    }
}

/// Parameters shared by the clustering algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusteringConfig {
    pub k: usize,
    pub max_iter: usize,
    /// Convergence threshold on the largest center displacement.
    pub tol: f64,
    pub seed: u64,
    /// Fuzzy C-means exponent, `> 1`.
    pub fuzzifier: f64,
    pub n_init: usize,
}

impl ClusteringConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            max_iter: 300,
            tol: 1e-6,
            seed: 0,
            fuzzifier: 2.0,
            n_init: 5,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.k > n {
            return Err(Error::Config(format!("k = {} exceeds n = {n}", self.k)));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Config("tol must be positive".into()));
        }
        if self.fuzzifier.is_nan() || self.fuzzifier <= 1.0 {
            return Err(Error::Config("fuzzifier must exceed 1".into()));
        }
        if self.n_init == 0 || self.max_iter == 0 {
            return Err(Error::Config("n_init and max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Largest Euclidean displacement between matching centers.
pub(crate) fn max_shift(old: &[Vec<f64>], new: &[Vec<f64>]) -> f64 {
    old.iter()
        .zip(new)
        .map(|(a, b)| sq_dist(a, b).sqrt())
        .fold(0.0, f64::max)
}

/// k-means++ seeding: first center uniform, then proportional to squared
/// distance from the nearest chosen center. Falls back to a uniform pick among
/// unchosen rows when all remaining distances are zero.
pub(crate) fn kmeans_pp(x: &Dataset, k: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let n = x.n();
    let mut chosen = vec![false; n];
    let first = rng::below(rng, n as u64) as usize;
    chosen[first] = true;
    let mut centers = vec![x.row(first).to_vec()];
    let mut nearest: Vec<f64> = x.rows().map(|r| sq_dist(r, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng::unit(rng) * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in nearest.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding can leave target above the final partial sum
            pick.unwrap_or_else(|| nearest.iter().rposition(|&d| d > 0.0).unwrap_or(0))
        } else {
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng::below(rng, free.len() as u64) as usize]
        };
        chosen[pick] = true;
        let c = x.row(pick).to_vec();
        for (d, r) in nearest.iter_mut().zip(x.rows()) {
            *d = d.min(sq_dist(r, &c));
        }
        centers.push(c);
    }
    centers
}

/// Pick the restart with the lowest objective; earlier restarts win ties.
pub(crate) fn best_of<T>(runs: Vec<T>, objective: impl Fn(&T) -> f64) -> T {
    let mut best: Option<(f64, T)> = None;
    for run in runs {
        let obj = objective(&run);
        match &best {
            Some((b, _)) if obj.partial_cmp(b) != Some(std::cmp::Ordering::Less) => {}
            _ => best = Some((obj, run)),
        }
    }
    best.expect("at least one restart").1
}
