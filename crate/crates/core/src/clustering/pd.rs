//! Probabilistic-distance clustering.
//!
//! Membership probability and distance to a center are inversely related:
//! `p_k(x) d_k(x)` is the same for every `k`. Normalizing gives
//! `p_k(x) = prod_{j != k} d_j(x) / sum_t prod_{j != t} d_j(x)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{best_of, kmeans_pp, max_shift, sq_dist, ClusteringConfig, Dataset};
use crate::partition::{CrispPartition, FuzzyPartition};
use crate::rng::{self, Rng};
use crate::{Error, Result};

/// Points closer than this to a center are left out of that center's update.
/// With `w = p^2 / d` such a point would pin the center to itself.
const WEIGHT_DIST_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdResult {
    pub partition: FuzzyPartition,
    pub centers: Vec<Vec<f64>>,
    /// Sum over points of the joint distance `p_k(x) d_k(x)`.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn check_centers(x: &Dataset, centers: &[Vec<f64>]) -> Result<()> {
    if centers.is_empty() {
        return Err(Error::Config("at least one center is required".into()));
    }
    if let Some(c) = centers.iter().find(|c| c.len() != x.p()) {
        return Err(Error::Shape(format!(
            "center of dimension {} for {} features",
            c.len(),
            x.p()
        )));
    }
    if centers.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Config("non-finite center coordinate".into()));
    }
    Ok(())
}

/// Membership row for one point given its distances to every center.
///
/// Evaluated as `(d_min / d_k) / sum_t (d_min / d_t)`, which equals the
/// product form and cannot overflow. Points on a center split their mass
/// evenly among the coincident centers.
fn membership_row(dist: &[f64], out: &mut [f64]) {
    let zeros = dist.iter().filter(|&&d| d == 0.0).count();
    if zeros > 0 {
        for (o, &d) in out.iter_mut().zip(dist) {
            *o = if d == 0.0 { 1.0 / zeros as f64 } else { 0.0 };
        }
        return;
    }
    let dmin = dist.iter().copied().fold(f64::INFINITY, f64::min);
    let mut sum = 0.0;
    for (o, &d) in out.iter_mut().zip(dist) {
        *o = dmin / d;
        sum += *o;
    }
    out.iter_mut().for_each(|o| *o /= sum);
}

fn distances(x: &Dataset, centers: &[Vec<f64>]) -> Vec<f64> {
    x.rows()
        .flat_map(|r| centers.iter().map(move |c| sq_dist(r, c).sqrt()))
        .collect()
}

/// Membership probabilities of every point for fixed centers.
pub fn pd_membership(x: &Dataset, centers: &[Vec<f64>]) -> Result<FuzzyPartition> {
    check_centers(x, centers)?;
    let k = centers.len();
    let dist = distances(x, centers);
    let mut data = vec![0.0; x.n() * k];
    for (d, out) in dist.chunks_exact(k).zip(data.chunks_exact_mut(k)) {
        membership_row(d, out);
    }
    FuzzyPartition::new(data, x.n(), k)
}

/// Reference fuzzy partition of labeled data: PD memberships at the class
/// means.
pub fn true_fuzzy_partition(x: &Dataset, labels: &CrispPartition) -> Result<FuzzyPartition> {
    if labels.n() != x.n() {
        return Err(Error::SizeMismatch {
            left: x.n(),
            right: labels.n(),
        });
    }
    let sizes = labels.sizes();
    if let Some(empty) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::EmptyClass(empty));
    }
    let mut centers = vec![vec![0.0; x.p()]; labels.k()];
    for (row, &l) in x.rows().zip(labels.labels()) {
        for (c, v) in centers[l].iter_mut().zip(row) {
            *c += v;
        }
    }
    for (center, &size) in centers.iter_mut().zip(&sizes) {
        center.iter_mut().for_each(|v| *v /= size as f64);
    }
    pd_membership(x, &centers)
}

/// PD-clustering.
///
/// Centers start from k-means++ seeding and are updated as
/// `u_k = sum_x w_k(x) x / sum_x w_k(x)` with `w_k(x) = p_k(x)^2 / d_k(x)`
/// until no center moves more than `tol`. With `k = 1` the single center is
/// the grand mean. The best of `n_init` restarts by joint-distance objective
/// is returned; `converged` is false if `max_iter` ran out first.
pub fn pd_cluster(x: &Dataset, cfg: &ClusteringConfig) -> Result<PdResult> {
    cfg.validate(x.n())?;
    if cfg.k == 1 {
        let centers = vec![x.mean()];
        let partition = pd_membership(x, &centers)?;
        let objective = distances(x, &centers).iter().sum();
        return Ok(PdResult {
            partition,
            centers,
            objective,
            iterations: 0,
            converged: true,
        });
    }
    let runs: Vec<PdResult> = (0..cfg.n_init)
        .into_par_iter()
        .map(|r| pd_once(x, cfg, &mut rng::stream(cfg.seed, r as u64)))
        .collect::<Result<_>>()?;
    Ok(best_of(runs, |r| r.objective))
}

fn pd_once(x: &Dataset, cfg: &ClusteringConfig, rng: &mut Rng) -> Result<PdResult> {
    let k = cfg.k;
    let mut centers = kmeans_pp(x, k, rng);
    let mut probs = vec![0.0; k];
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..cfg.max_iter {
        iterations = it + 1;
        let dist = distances(x, &centers);
        let mut num = vec![vec![0.0; x.p()]; k];
        let mut den = vec![0.0; k];
        for (row, d) in x.rows().zip(dist.chunks_exact(k)) {
            membership_row(d, &mut probs);
            for c in 0..k {
                if d[c] < WEIGHT_DIST_FLOOR {
                    continue;
                }
                let w = probs[c] * probs[c] / d[c];
                den[c] += w;
                for (acc, v) in num[c].iter_mut().zip(row) {
                    *acc += w * v;
                }
            }
        }
        for (c, center) in num.iter_mut().enumerate() {
            if den[c] > 0.0 {
                center.iter_mut().for_each(|v| *v /= den[c]);
            } else {
                center.clone_from(&centers[c]);
            }
        }
        let shift = max_shift(&centers, &num);
        centers = num;
        if shift < cfg.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("PD-clustering did not converge in {} iterations", cfg.max_iter);
    }
    let dist = distances(x, &centers);
    let objective = dist
        .chunks_exact(k)
        .map(|d| {
            if d.contains(&0.0) {
                0.0
            } else {
                1.0 / d.iter().map(|v| 1.0 / v).sum::<f64>()
            }
        })
        .sum();
    Ok(PdResult {
        partition: pd_membership(x, &centers)?,
        centers,
        objective,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::testutil::two_blobs;
    use crate::{equivalence_matrix, ndc};
    use proptest::prelude::*;

    /// Literal product form of the membership formula.
    fn product_form(dist: &[f64]) -> Vec<f64> {
        let k = dist.len();
        let prods: Vec<f64> = (0..k)
            .map(|t| (0..k).filter(|&j| j != t).map(|j| dist[j]).product())
            .collect();
        let total: f64 = prods.iter().sum();
        prods.iter().map(|p| p / total).collect()
    }

    fn one_d(points: &[f64]) -> Dataset {
        Dataset::from_rows(&points.iter().map(|&v| [v]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn equidistant_point() {
        let x = one_d(&[0.0, 7.0]);
        let p = pd_membership(&x, &[vec![-2.0], vec![2.0]]).unwrap();
        assert_eq!(p.row(0), &[0.5, 0.5]);
    }

    #[test]
    fn point_on_center() {
        let x = one_d(&[1.0, 3.0]);
        let p = pd_membership(&x, &[vec![1.0], vec![2.0], vec![5.0]]).unwrap();
        assert_eq!(p.row(0), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn hand_evaluated_1d() {
        // d = (1, 3): p = (3, 1) / 4
        let x = one_d(&[0.0, 1.0]);
        let p = pd_membership(&x, &[vec![-1.0], vec![3.0]]).unwrap();
        assert!((p.get(0, 0) - 0.75).abs() < 1e-15);
        assert!((p.get(0, 1) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn true_partition_of_singletons_is_identity() {
        let x = Dataset::from_rows(&[[0.0, 0.0], [3.0, 4.0]]).unwrap();
        let labels = CrispPartition::new(vec![0, 1]).unwrap();
        let t = true_fuzzy_partition(&x, &labels).unwrap();
        assert_eq!(t.as_slice(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn true_partition_with_coincident_centers() {
        let x = Dataset::from_rows(&[[1.0, 1.0]; 6]).unwrap();
        let labels = CrispPartition::new(vec![0, 1, 0, 1, 0, 1]).unwrap();
        let t = true_fuzzy_partition(&x, &labels).unwrap();
        assert!(t.as_slice().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn true_partition_empty_class() {
        let x = one_d(&[0.0, 1.0, 2.0]);
        let labels = CrispPartition::with_k(vec![0, 0, 2], 3).unwrap();
        assert!(matches!(true_fuzzy_partition(&x, &labels), Err(Error::EmptyClass(1))));
    }

    #[test]
    fn mirrored_classes_give_mirrored_memberships() {
        let half = [[1.0, 0.5], [2.0, -0.3], [1.5, 1.2], [0.4, 0.1]];
        let mut rows: Vec<[f64; 2]> = half.to_vec();
        rows.extend(half.iter().map(|r| [-r[0], r[1]]));
        let x = Dataset::from_rows(&rows).unwrap();
        let labels = CrispPartition::new(vec![0, 0, 0, 0, 1, 1, 1, 1]).unwrap();
        let t = true_fuzzy_partition(&x, &labels).unwrap();
        for i in 0..4 {
            assert!((t.get(i, 0) - t.get(i + 4, 1)).abs() < 1e-9);
            assert!((t.get(i, 1) - t.get(i + 4, 0)).abs() < 1e-9);
        }
    }

    #[test]
    fn single_cluster_center_is_grand_mean() {
        let x = two_blobs(7, 1.0, 3);
        let res = pd_cluster(&x, &ClusteringConfig::new(1)).unwrap();
        assert_eq!(res.centers[0], x.mean());
        assert!(res.partition.as_slice().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn separated_blobs_recover_means() {
        let x = two_blobs(25, 0.05, 6);
        let res = pd_cluster(&x, &ClusteringConfig::new(2).with_seed(1)).unwrap();
        assert!(res.converged);
        let mut got: Vec<f64> = res.centers.iter().map(|c| c[0]).collect();
        got.sort_by(f64::total_cmp);
        assert!(
            (got[0] + 5.0).abs() < 0.1 && (got[1] - 5.0).abs() < 0.1,
            "{:?}",
            res.centers
        );
        let labels = CrispPartition::new((0..50).map(|i| i / 25).collect()).unwrap();
        let truth = true_fuzzy_partition(&x, &labels).unwrap();
        let v = ndc(&equivalence_matrix(&truth), &equivalence_matrix(&res.partition)).unwrap();
        assert!(v >= 0.99, "{v}");
    }

    #[test]
    fn centers_leave_their_seed_points() {
        let x = two_blobs(25, 1.0, 6);
        let res = pd_cluster(&x, &ClusteringConfig::new(2)).unwrap();
        assert!(res.iterations > 2);
        for c in &res.centers {
            assert!(
                x.rows().all(|r| sq_dist(r, c) > 1e-6),
                "center {c:?} sits on a data point"
            );
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let x = two_blobs(20, 2.0, 2);
        let cfg = ClusteringConfig::new(3).with_seed(5);
        assert_eq!(pd_cluster(&x, &cfg).unwrap(), pd_cluster(&x, &cfg).unwrap());
    }

    #[test]
    fn non_convergence_is_flagged() {
        let x = two_blobs(20, 2.0, 2);
        let mut cfg = ClusteringConfig::new(3);
        cfg.max_iter = 1;
        cfg.tol = 1e-300;
        let res = pd_cluster(&x, &cfg).unwrap();
        assert!(!res.converged);
        assert_eq!(res.iterations, 1);
    }

    proptest! {
        #[test]
        fn matches_product_form_and_inverse_relation(
            pts in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 3), 2..10),
            ctr in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 3), 1..6),
        ) {
            let x = Dataset::from_rows(&pts).unwrap();
            let p = pd_membership(&x, &ctr).unwrap();
            for (i, row) in x.rows().enumerate() {
                let d: Vec<f64> = ctr.iter().map(|c| sq_dist(row, c).sqrt()).collect();
                if d.contains(&0.0) { continue; }
                let oracle = product_form(&d);
                let constant = p.get(i, 0) * d[0];
                for k in 0..ctr.len() {
                    prop_assert!((p.get(i, k) - oracle[k]).abs() < 1e-12);
                    prop_assert!((p.get(i, k) * d[k] - constant).abs() <= 1e-9 * constant);
                }
            }
        }

        #[test]
        fn scale_equivariant(
            pts in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 2), 2..10),
            ctr in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 2), 1..5),
            lambda in 0.01f64..100.0,
        ) {
            let x = Dataset::from_rows(&pts).unwrap();
            let scaled: Vec<Vec<f64>> = ctr.iter().map(|c| c.iter().map(|v| v * lambda).collect()).collect();
            let a = pd_membership(&x, &ctr).unwrap();
            let b = pd_membership(&x.scaled(lambda), &scaled).unwrap();
            for (u, v) in a.as_slice().iter().zip(b.as_slice()) {
                prop_assert!((u - v).abs() < 1e-12);
            }
        }
    }
}
