use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{best_of, max_shift, sq_dist, ClusteringConfig, Dataset};
use crate::partition::FuzzyPartition;
use crate::rng::{self, Rng};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcmResult {
    pub partition: FuzzyPartition,
    pub centers: Vec<Vec<f64>>,
    /// `sum_i sum_k u_ik^m ||x_i - v_k||^2` at the returned solution.
    pub objective: f64,
    /// Objective after each iteration of the selected restart.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Fuzzy C-means.
///
/// Memberships start from a seeded Dirichlet(1, ..., 1) draw. Each iteration
/// recomputes centers as `u^m`-weighted means, then memberships
/// `u_ik = 1 / sum_t (d_ik / d_it)^(2/(m-1))`. A point sitting on one or more
/// centers splits its membership evenly among them. Stops when no center moves
/// more than `tol`; the best of `n_init` restarts by objective is returned.
pub fn fcm(x: &Dataset, cfg: &ClusteringConfig) -> Result<FcmResult> {
    cfg.validate(x.n())?;
    let runs: Vec<FcmResult> = (0..cfg.n_init)
        .into_par_iter()
        .map(|r| fcm_once(x, cfg, &mut rng::stream(cfg.seed, r as u64)))
        .collect::<Result<_>>()?;
    Ok(best_of(runs, |r| r.objective))
}

fn fcm_once(x: &Dataset, cfg: &ClusteringConfig, rng: &mut Rng) -> Result<FcmResult> {
    let (n, k) = (x.n(), cfg.k);
    let m = cfg.fuzzifier;
    let mut u: Vec<f64> = (0..n * k).map(|_| -(1.0 - rng::unit(rng)).ln()).collect();
    for row in u.chunks_exact_mut(k) {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= s);
    }
    let mut d2 = vec![0.0; n * k];
    let mut centers: Vec<Vec<f64>> = Vec::new();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..cfg.max_iter {
        iterations = it + 1;
        let new_centers = weighted_centers(x, &u, k, m);
        for (i, row) in x.rows().enumerate() {
            for (c, v) in new_centers.iter().enumerate() {
                d2[i * k + c] = sq_dist(row, v);
            }
        }
        update_memberships(&d2, &mut u, k, m);
        trace.push(objective(&u, &d2, m));
        let shift = if centers.is_empty() {
            f64::INFINITY
        } else {
            max_shift(&centers, &new_centers)
        };
        centers = new_centers;
        if shift < cfg.tol {
            converged = true;
            break;
        }
    }
    let objective = *trace.last().expect("max_iter >= 1");
    Ok(FcmResult {
        partition: FuzzyPartition::new(u, n, k)?,
        centers,
        objective,
        objective_trace: trace,
        iterations,
        converged,
    })
}

fn weighted_centers(x: &Dataset, u: &[f64], k: usize, m: f64) -> Vec<Vec<f64>> {
    let mut num = vec![vec![0.0; x.p()]; k];
    let mut den = vec![0.0; k];
    for (i, row) in x.rows().enumerate() {
        for c in 0..k {
            let w = u[i * k + c].powf(m);
            den[c] += w;
            for (acc, v) in num[c].iter_mut().zip(row) {
                *acc += w * v;
            }
        }
    }
    for (c, center) in num.iter_mut().enumerate() {
        if den[c] > 0.0 {
            center.iter_mut().for_each(|v| *v /= den[c]);
        }
    }
    num
}

/// Memberships from squared distances. Written as normalized
/// `(d2_min / d2_k)^(1/(m-1))` to stay finite for large distances.
fn update_memberships(d2: &[f64], u: &mut [f64], k: usize, m: f64) {
    let expo = 1.0 / (m - 1.0);
    for (drow, urow) in d2.chunks_exact(k).zip(u.chunks_exact_mut(k)) {
        let zeros = drow.iter().filter(|&&d| d == 0.0).count();
        if zeros > 0 {
            for (uv, &d) in urow.iter_mut().zip(drow) {
                *uv = if d == 0.0 { 1.0 / zeros as f64 } else { 0.0 };
            }
            continue;
        }
        let dmin = drow.iter().copied().fold(f64::INFINITY, f64::min);
        let mut sum = 0.0;
        for (uv, &d) in urow.iter_mut().zip(drow) {
            *uv = (dmin / d).powf(expo);
            sum += *uv;
        }
        urow.iter_mut().for_each(|v| *v /= sum);
    }
}

fn objective(u: &[f64], d2: &[f64], m: f64) -> f64 {
    u.iter().zip(d2).map(|(w, d)| w.powf(m) * d).sum()
}
