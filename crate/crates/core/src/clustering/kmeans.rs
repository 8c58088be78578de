use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{best_of, kmeans_pp, sq_dist, ClusteringConfig, Dataset};
use crate::partition::CrispPartition;
use crate::rng::{self, Rng};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub labels: CrispPartition,
    pub centers: Vec<Vec<f64>>,
    /// Within-cluster sum of squares.
    pub inertia: f64,
    /// Inertia after each center update of the selected restart.
    pub inertia_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Lloyd's k-means with k-means++ seeding.
///
/// A cluster left empty after assignment takes over the point farthest from
/// its current center (among clusters with more than one point).
pub fn kmeans(x: &Dataset, cfg: &ClusteringConfig) -> Result<KMeansResult> {
    cfg.validate(x.n())?;
    let runs: Vec<KMeansResult> = (0..cfg.n_init)
        .into_par_iter()
        .map(|r| lloyd(x, cfg, &mut rng::stream(cfg.seed, r as u64)))
        .collect::<Result<_>>()?;
    Ok(best_of(runs, |r| r.inertia))
}

fn lloyd(x: &Dataset, cfg: &ClusteringConfig, rng: &mut Rng) -> Result<KMeansResult> {
    let (n, k) = (x.n(), cfg.k);
    let mut centers = kmeans_pp(x, k, rng);
    let mut labels = vec![usize::MAX; n];
    let mut cost = vec![0.0; n];
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..cfg.max_iter {
        iterations = it + 1;
        let mut changed = false;
        for (i, row) in x.rows().enumerate() {
            let (best, d) = centers
                .iter()
                .enumerate()
                .map(|(c, v)| (c, sq_dist(row, v)))
                .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
            cost[i] = d;
        }
        changed |= fill_empty(&mut labels, &mut cost, k);
        if !changed && it > 0 {
            converged = true;
            break;
        }
        centers = means(x, &labels, k, &centers);
        let inertia = x.rows().zip(&labels).map(|(r, &l)| sq_dist(r, &centers[l])).sum();
        trace.push(inertia);
    }
    let inertia = x.rows().zip(&labels).map(|(r, &l)| sq_dist(r, &centers[l])).sum();
    Ok(KMeansResult {
        labels: CrispPartition::with_k(labels, k)?,
        centers,
        inertia,
        inertia_trace: trace,
        iterations,
        converged,
    })
}

fn fill_empty(labels: &mut [usize], cost: &mut [f64], k: usize) -> bool {
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    let mut changed = false;
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let donor =
            (0..labels.len())
                .filter(|&i| sizes[labels[i]] > 1)
                .fold(None, |best: Option<usize>, i| match best {
                    Some(b) if cost[b] >= cost[i] => Some(b),
                    _ => Some(i),
                });
        if let Some(i) = donor {
            sizes[labels[i]] -= 1;
            labels[i] = empty;
            sizes[empty] = 1;
            cost[i] = 0.0;
            changed = true;
        }
    }
    changed
}

fn means(x: &Dataset, labels: &[usize], k: usize, previous: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; x.p()]; k];
    let mut counts = vec![0usize; k];
    for (row, &l) in x.rows().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(row) {
            *s += v;
        }
    }
    sums.iter_mut()
        .zip(&counts)
        .zip(previous)
        .map(|((s, &c), prev)| {
            if c == 0 {
                prev.clone()
            } else {
                s.iter().map(|v| v / c as f64).collect()
            }
        })
        .collect()
}
