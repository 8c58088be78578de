//! Synthetic designs and the experiment drivers built on them.
//!
//! Every random quantity is drawn from a stream derived from the study seed
//! and the coordinates of the cell that uses it, so results do not depend on
//! thread count or evaluation order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::clustering::{fcm, kmeans, pd_cluster, true_fuzzy_partition, ClusteringConfig, Dataset};
use crate::partition::{CrispPartition, FuzzyPartition};
use crate::rng::{self, derive_seed};
use crate::{aci, ari_cardinals, pair_counts, Error, ExpectationConfig, ExpectationMode, Result};

/// Component means used by the two Gaussian studies, in the order they are
/// added to the designs.
pub const DESIGN_MEANS: [[f64; 2]; 8] = [
    [-2.0, -2.0],
    [2.0, 2.0],
    [0.0, 0.0],
    [-2.0, 2.0],
    [2.0, -2.0],
    [-4.0, 4.0],
    [4.0, -4.0],
    [9.0, 9.0],
];

/// Isotropic variances of the three study-1 spread levels.
pub const STUDY1_VARIANCES: [f64; 3] = [0.01, 0.25, 1.0];
/// Variance of the single Gaussian behind the random (structureless) datasets.
pub const RANDOM_VARIANCE: f64 = 0.8;
pub const STUDY1_N: usize = 100;
pub const STUDY2_N: usize = 120;

const SPLIT_RULE: &str = "total n split evenly across components; the first n mod C components get one extra point";

/// Gaussian mixture with diagonal covariances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixtureSpec {
    pub means: Vec<Vec<f64>>,
    /// Per-component diagonal of the covariance matrix.
    pub variances: Vec<Vec<f64>>,
    /// Total number of points over all components.
    pub n: usize,
    pub seed: u64,
}

impl GaussianMixtureSpec {
    /// Every component gets covariance `alpha * I`.
    pub fn isotropic(means: Vec<Vec<f64>>, alpha: f64, n: usize, seed: u64) -> Self {
        let variances = means.iter().map(|m| vec![alpha; m.len()]).collect();
        Self {
            means,
            variances,
            n,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.means.is_empty() {
            return Err(Error::Config("mixture needs at least one component".into()));
        }
        let p = self.means[0].len();
        if p == 0 || self.means.iter().any(|m| m.len() != p) {
            return Err(Error::Config("component means must share a positive dimension".into()));
        }
        if self.variances.len() != self.means.len() || self.variances.iter().any(|v| v.len() != p) {
            return Err(Error::Config(
                "one variance vector per component, matching the mean dimension".into(),
            ));
        }
        if self.variances.iter().flatten().any(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::Config("variances must be positive and finite".into()));
        }
        if self.means.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Config("non-finite mean".into()));
        }
        if self.n < self.means.len().max(2) {
            return Err(Error::Config(format!(
                "n = {} is too small for {} components",
                self.n,
                self.means.len()
            )));
        }
        Ok(())
    }

    /// Points per component under the even-split rule.
    pub fn counts(&self) -> Vec<usize> {
        split_evenly(self.n, self.means.len())
    }
}

fn split_evenly(n: usize, c: usize) -> Vec<usize> {
    (0..c).map(|i| n / c + usize::from(i < n % c)).collect()
}

/// Draw a dataset with labels in component order.
pub fn gen_mixture(spec: &GaussianMixtureSpec) -> Result<(Dataset, CrispPartition)> {
    spec.validate()?;
    let p = spec.means[0].len();
    let mut r = rng::stream(spec.seed, 0);
    let mut data = Vec::with_capacity(spec.n * p);
    let mut labels = Vec::with_capacity(spec.n);
    for (c, count) in spec.counts().into_iter().enumerate() {
        let sd: Vec<f64> = spec.variances[c].iter().map(|v| v.sqrt()).collect();
        for _ in 0..count {
            for (mu, s) in spec.means[c].iter().zip(&sd) {
                let z: f64 = StandardNormal.sample(&mut r);
                data.push(mu + s * z);
            }
            labels.push(c);
        }
    }
    Ok((
        Dataset::new(data, spec.n, p)?,
        CrispPartition::with_k(labels, spec.means.len())?,
    ))
}

/// One Gaussian `N(0, alpha I)` with labels assigned in turn, `i mod c`.
pub fn gen_at_turns(n: usize, c: usize, dims: usize, alpha: f64, seed: u64) -> Result<(Dataset, CrispPartition)> {
    if c == 0 || c > n {
        return Err(Error::Config(format!("cannot assign {n} points to {c} classes")));
    }
    let spec = GaussianMixtureSpec::isotropic(vec![vec![0.0; dims]], alpha, n, seed);
    let (x, _) = gen_mixture(&spec)?;
    Ok((x, CrispPartition::with_k((0..n).map(|i| i % c).collect(), c)?))
}

/// A dataset with known class labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub name: String,
    pub data: Dataset,
    pub labels: CrispPartition,
}

/// One cell of a results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub design: String,
    pub column: Option<String>,
    pub index: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub study: String,
    pub rows: Vec<StudyRow>,
    pub metadata: BTreeMap<String, Value>,
}

/// Dense view of one index from a result with row and column labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl StudyResult {
    fn new(study: &str) -> Self {
        let mut metadata = BTreeMap::new();
        metadata.insert("version".into(), json!(crate::VERSION));
        Self {
            study: study.into(),
            rows: Vec::new(),
            metadata,
        }
    }

    fn push(&mut self, design: &str, column: Option<&str>, index: &str, value: f64) {
        self.rows.push(StudyRow {
            design: design.into(),
            column: column.map(Into::into),
            index: index.into(),
            value,
        });
    }

    pub fn value(&self, design: &str, column: Option<&str>, index: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.design == design && r.column.as_deref() == column && r.index == index)
            .map(|r| r.value)
    }

    /// Values of `index` as a design-by-column grid, in first-seen order.
    /// Rows without a column are keyed by the index name.
    pub fn matrix(&self, index: &str) -> Matrix {
        let mut row_labels: Vec<String> = Vec::new();
        let mut col_labels: Vec<String> = Vec::new();
        let mut cells = Vec::new();
        for r in self.rows.iter().filter(|r| r.index == index) {
            let col = r.column.clone().unwrap_or_else(|| r.index.clone());
            let i = position_or_push(&mut row_labels, &r.design);
            let j = position_or_push(&mut col_labels, &col);
            cells.push((i, j, r.value));
        }
        let mut values = vec![vec![f64::NAN; col_labels.len()]; row_labels.len()];
        for (i, j, v) in cells {
            values[i][j] = v;
        }
        Matrix {
            row_labels,
            col_labels,
            values,
        }
    }

    /// Long-format CSV: `design,column,index,value`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["design", "column", "index", "value"])?;
        for r in &self.rows {
            out.write_record([
                r.design.as_str(),
                r.column.as_deref().unwrap_or(""),
                r.index.as_str(),
                &r.value.to_string(),
            ])?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Human-readable table, one block per index, 4 decimals.
    pub fn to_table(&self) -> String {
        let mut indices: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !indices.contains(&r.index.as_str()) {
                indices.push(&r.index);
            }
        }
        let mut s = String::new();
        for index in indices {
            let m = self.matrix(index);
            let w0 = m.row_labels.iter().map(String::len).max().unwrap_or(0).max(index.len());
            let widths: Vec<usize> = m.col_labels.iter().map(|c| c.len().max(7)).collect();
            let _ = write!(s, "{index:<w0$}");
            for (c, w) in m.col_labels.iter().zip(&widths) {
                let _ = write!(s, "  {c:>w$}");
            }
            s.push('\n');
            for (label, row) in m.row_labels.iter().zip(&m.values) {
                let _ = write!(s, "{label:<w0$}");
                for (v, w) in row.iter().zip(&widths) {
                    let _ = write!(s, "  {v:>w$.4}");
                }
                s.push('\n');
            }
            s.push('\n');
        }
        s
    }
}

impl Matrix {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec![String::new()];
        header.extend(self.col_labels.iter().cloned());
        out.write_record(&header)?;
        for (label, row) in self.row_labels.iter().zip(&self.values) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(f64::to_string));
            out.write_record(&rec)?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

fn position_or_push(v: &mut Vec<String>, s: &str) -> usize {
    v.iter().position(|x| x == s).unwrap_or_else(|| {
        v.push(s.to_string());
        v.len() - 1
    })
}

/// Settings shared by the study drivers. `clustering.k` and the seeds are
/// replaced per cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub expectation: ExpectationConfig,
    pub clustering: ClusteringConfig,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            expectation: ExpectationConfig::default(),
            clustering: ClusteringConfig::new(2),
        }
    }
}

impl StudyConfig {
    fn clustering_for(&self, k: usize, seed: u64) -> ClusteringConfig {
        ClusteringConfig {
            k,
            seed,
            ..self.clustering
        }
    }

    fn expectation_for(&self, seed: u64) -> ExpectationConfig {
        ExpectationConfig {
            seed,
            ..self.expectation
        }
    }

    fn metadata(&self, seed: u64, out: &mut BTreeMap<String, Value>) {
        out.insert("seed".into(), json!(seed));
        out.insert("expectation".into(), json!(self.expectation));
        out.insert("clustering".into(), json!(self.clustering));
        out.insert(
            "seed_derivation".into(),
            json!("cell seeds = derive_seed(seed, [stage, cell coordinates...])"),
        );
    }
}

const STAGE_DATA: u64 = 1;
const STAGE_CLUSTER: u64 = 2;
const STAGE_EXPECT: u64 = 3;

fn study1_name(c: usize, level: usize) -> String {
    if level < STUDY1_VARIANCES.len() {
        format!("{c} centers, sigma{}", level + 1)
    } else {
        format!("random {c} centers")
    }
}

/// The twelve study-1 datasets: C = 2, 3, 4 first means at each spread level,
/// then one structureless dataset per C with labels assigned in turn.
pub fn study1_datasets(seed: u64) -> Result<Vec<LabeledDataset>> {
    let mut out = Vec::new();
    for level in 0..=STUDY1_VARIANCES.len() {
        for c in 2..=4usize {
            let data_seed = derive_seed(seed, &[STAGE_DATA, c as u64, level as u64]);
            let (data, labels) = match STUDY1_VARIANCES.get(level) {
                Some(&alpha) => {
                    let means = DESIGN_MEANS[..c].iter().map(|m| m.to_vec()).collect();
                    gen_mixture(&GaussianMixtureSpec::isotropic(means, alpha, STUDY1_N, data_seed))?
                }
                None => gen_at_turns(STUDY1_N, c, 2, RANDOM_VARIANCE, data_seed)?,
            };
            out.push(LabeledDataset {
                name: study1_name(c, level),
                data,
                labels,
            });
        }
    }
    Ok(out)
}

/// Fuzzy C-means against the known crisp labels on the study-1 designs.
/// Emits `ndc` and `aci` (raw) per design.
pub fn study1(seed: u64, cfg: &StudyConfig) -> Result<StudyResult> {
    let datasets = study1_datasets(seed)?;
    let cells: Vec<(f64, f64)> = datasets
        .par_iter()
        .enumerate()
        .map(|(i, ds)| {
            let k = ds.labels.k();
            let cl = fcm(
                &ds.data,
                &cfg.clustering_for(k, derive_seed(seed, &[STAGE_CLUSTER, i as u64])),
            )?;
            let r = aci(
                &cl.partition,
                &ds.labels.to_fuzzy(),
                &cfg.expectation_for(derive_seed(seed, &[STAGE_EXPECT, i as u64])),
            )?;
            Ok((r.ndc, r.aci))
        })
        .collect::<Result<_>>()?;
    let mut res = StudyResult::new("study1");
    for (ds, (ndc, aci)) in datasets.iter().zip(cells) {
        res.push(&ds.name, None, "ndc", ndc);
        res.push(&ds.name, None, "aci", aci);
    }
    cfg.metadata(seed, &mut res.metadata);
    res.metadata.insert("n".into(), json!(STUDY1_N));
    res.metadata.insert("sample_split".into(), json!(SPLIT_RULE));
    res.metadata.insert("variances".into(), json!(STUDY1_VARIANCES));
    res.metadata.insert("random_variance".into(), json!(RANDOM_VARIANCE));
    Ok(res)
}

/// What each study-2 fuzzy C-means solution is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study2Reference {
    /// The fuzzy C-means solution at the dataset's true number of centers.
    #[default]
    TrueC,
    /// The dataset's crisp labels.
    CrispTruth,
}

/// Study-2 datasets: dataset `d` (1-based) uses the first `d + 1` means with
/// covariance `diag(alpha_1, alpha_2)`, `alpha_j ~ U(0.1, 1)` drawn once per
/// dataset.
pub fn study2_datasets(seed: u64) -> Result<Vec<(LabeledDataset, [f64; 2])>> {
    (1..=7usize)
        .map(|d| {
            let c = d + 1;
            let mut r = rng::stream(derive_seed(seed, &[STAGE_DATA, d as u64]), 1);
            let alpha = [0.1 + 0.9 * rng::unit(&mut r), 0.1 + 0.9 * rng::unit(&mut r)];
            let spec = GaussianMixtureSpec {
                means: DESIGN_MEANS[..c].iter().map(|m| m.to_vec()).collect(),
                variances: vec![alpha.to_vec(); c],
                n: STUDY2_N,
                seed: derive_seed(seed, &[STAGE_DATA, d as u64]),
            };
            let (data, labels) = gen_mixture(&spec)?;
            Ok((
                LabeledDataset {
                    name: format!("dataset {d}"),
                    data,
                    labels,
                },
                alpha,
            ))
        })
        .collect()
}

/// Fuzzy C-means at C = 2..8 on each study-2 dataset, compared with the
/// reference solution. Emits 7x7 `ndc` and `aci` grids.
pub fn study2(seed: u64, cfg: &StudyConfig, reference: Study2Reference) -> Result<StudyResult> {
    let datasets = study2_datasets(seed)?;
    let ks: Vec<usize> = (2..=8).collect();
    let cells: Vec<(usize, usize)> = (0..datasets.len())
        .flat_map(|d| ks.iter().map(move |&k| (d, k)))
        .collect();
    let solutions: Vec<FuzzyPartition> = cells
        .par_iter()
        .map(|&(d, k)| {
            let seed = derive_seed(seed, &[STAGE_CLUSTER, d as u64 + 1, k as u64]);
            Ok(fcm(&datasets[d].0.data, &cfg.clustering_for(k, seed))?.partition)
        })
        .collect::<Result<_>>()?;
    let compared: Vec<(f64, f64)> = cells
        .par_iter()
        .enumerate()
        .map(|(idx, &(d, k))| {
            let truth = &datasets[d].0.labels;
            let own = &solutions[idx];
            let ecfg = cfg.expectation_for(derive_seed(seed, &[STAGE_EXPECT, d as u64 + 1, k as u64]));
            let r = match reference {
                Study2Reference::TrueC => {
                    let ref_idx = d * ks.len() + (truth.k() - ks[0]);
                    aci(own, &solutions[ref_idx], &ecfg)?
                }
                Study2Reference::CrispTruth => aci(own, &truth.to_fuzzy(), &ecfg)?,
            };
            Ok((r.ndc, r.aci))
        })
        .collect::<Result<_>>()?;
    let mut res = StudyResult::new("study2");
    for (&(d, k), (ndc, aci)) in cells.iter().zip(compared) {
        let col = format!("C={k}");
        res.push(&datasets[d].0.name, Some(&col), "ndc", ndc);
        res.push(&datasets[d].0.name, Some(&col), "aci", aci);
    }
    cfg.metadata(seed, &mut res.metadata);
    res.metadata.insert("n".into(), json!(STUDY2_N));
    res.metadata.insert("sample_split".into(), json!(SPLIT_RULE));
    res.metadata.insert("reference".into(), json!(reference));
    res.metadata.insert(
        "alpha".into(),
        json!(datasets
            .iter()
            .map(|(ds, a)| (ds.name.clone(), a.to_vec()))
            .collect::<BTreeMap<_, _>>()),
    );
    Ok(res)
}

/// True fuzzy partitions (PD memberships at the class means) compared with
/// themselves and with PD-clustering estimates at the true number of classes.
/// Runs on the study-1 datasets followed by `extra`.
pub fn study3(seed: u64, cfg: &StudyConfig, extra: &[LabeledDataset]) -> Result<StudyResult> {
    let mut datasets = study1_datasets(seed)?;
    datasets.extend_from_slice(extra);
    let cells: Vec<[(f64, f64); 2]> = datasets
        .par_iter()
        .enumerate()
        .map(|(i, ds)| {
            let truth = true_fuzzy_partition(&ds.data, &ds.labels)?;
            let est = pd_cluster(
                &ds.data,
                &cfg.clustering_for(ds.labels.k(), derive_seed(seed, &[STAGE_CLUSTER, i as u64])),
            )?;
            if !est.converged {
                log::warn!("{}: PD-clustering stopped at max_iter", ds.name);
            }
            let ecfg = cfg.expectation_for(derive_seed(seed, &[STAGE_EXPECT, i as u64]));
            let same = aci(&truth, &truth, &ecfg)?;
            let vs = aci(&truth, &est.partition, &ecfg)?;
            Ok([(same.ndc, same.aci), (vs.ndc, vs.aci)])
        })
        .collect::<Result<_>>()?;
    let mut res = StudyResult::new("study3");
    for (ds, cell) in datasets.iter().zip(cells) {
        for (col, (ndc, aci)) in ["true_vs_true", "true_vs_estimated"].iter().zip(cell) {
            res.push(&ds.name, Some(col), "ndc", ndc);
            res.push(&ds.name, Some(col), "aci", aci);
        }
    }
    cfg.metadata(seed, &mut res.metadata);
    res.metadata.insert(
        "datasets".into(),
        json!(datasets.iter().map(|d| &d.name).collect::<Vec<_>>()),
    );
    Ok(res)
}

/// Ranges for the random datasets of the bias experiment (inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasConfig {
    pub n_range: (usize, usize),
    pub c_range: (usize, usize),
    pub dim_range: (usize, usize),
    pub alpha_range: (f64, f64),
    /// Component means are drawn uniformly from `[-mean_box, mean_box]` per coordinate.
    pub mean_box: f64,
    pub expectation: ExpectationConfig,
    pub kmeans_n_init: usize,
}

impl Default for BiasConfig {
    fn default() -> Self {
        Self {
            n_range: (100, 1200),
            c_range: (2, 10),
            dim_range: (2, 10),
            alpha_range: (0.1, 3.0),
            mean_box: 5.0,
            expectation: ExpectationConfig::default(),
            kmeans_n_init: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasRow {
    pub dataset: usize,
    pub n: usize,
    pub c: usize,
    pub dims: usize,
    pub alpha: f64,
    pub ari: f64,
    pub aci: f64,
    pub mc_std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasResult {
    /// Mean of `aci - ari` over datasets.
    pub mean_diff: f64,
    pub max_abs_diff: f64,
    pub rows: Vec<BiasRow>,
    pub metadata: BTreeMap<String, Value>,
}

impl BiasResult {
    pub fn to_study_result(&self) -> StudyResult {
        let mut res = StudyResult::new("bias");
        for r in &self.rows {
            let name = format!("dataset {}", r.dataset);
            res.push(&name, None, "ari", r.ari);
            res.push(&name, None, "aci", r.aci);
            res.push(&name, None, "diff", r.aci - r.ari);
        }
        res.metadata.extend(self.metadata.clone());
        res.metadata.insert("mean_diff".into(), json!(self.mean_diff));
        res.metadata.insert("max_abs_diff".into(), json!(self.max_abs_diff));
        res
    }
}

fn uniform_int(r: &mut rng::Rng, (lo, hi): (usize, usize)) -> usize {
    lo + rng::below(r, (hi - lo + 1) as u64) as usize
}

/// Random Gaussian mixtures clustered with k-means at the true C; compares the
/// adjusted Rand index with the ACI of the same crisp solutions.
pub fn bias_experiment(n_datasets: usize, seed: u64, cfg: &BiasConfig) -> Result<BiasResult> {
    if n_datasets == 0 {
        return Err(Error::Config("n_datasets must be at least 1".into()));
    }
    cfg.expectation.validate()?;
    let (n_lo, n_hi) = cfg.n_range;
    if n_lo > n_hi || cfg.c_range.0 > cfg.c_range.1 || cfg.dim_range.0 > cfg.dim_range.1 || cfg.c_range.0 == 0 {
        return Err(Error::Config("empty range in bias configuration".into()));
    }
    if cfg.c_range.1 > n_lo
        || cfg.dim_range.0 == 0
        || cfg.alpha_range.0.is_nan()
        || cfg.alpha_range.0 <= 0.0
        || cfg.alpha_range.0 > cfg.alpha_range.1
    {
        return Err(Error::Config("bias configuration out of bounds".into()));
    }
    let rows: Vec<BiasRow> = (0..n_datasets)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(derive_seed(seed, &[STAGE_DATA, i as u64]), 1);
            let n = uniform_int(&mut r, cfg.n_range);
            let c = uniform_int(&mut r, cfg.c_range);
            let dims = uniform_int(&mut r, cfg.dim_range);
            let alpha = cfg.alpha_range.0 + (cfg.alpha_range.1 - cfg.alpha_range.0) * rng::unit(&mut r);
            let means = (0..c)
                .map(|_| {
                    (0..dims)
                        .map(|_| cfg.mean_box * (2.0 * rng::unit(&mut r) - 1.0))
                        .collect()
                })
                .collect();
            let spec = GaussianMixtureSpec::isotropic(means, alpha, n, derive_seed(seed, &[STAGE_DATA, i as u64]));
            let (x, truth) = gen_mixture(&spec)?;
            let kcfg = ClusteringConfig {
                n_init: cfg.kmeans_n_init,
                ..ClusteringConfig::new(c).with_seed(derive_seed(seed, &[STAGE_CLUSTER, i as u64]))
            };
            let found = kmeans(&x, &kcfg)?.labels;
            let ari = ari_cardinals(&pair_counts(&found, &truth)?)?;
            let ecfg = ExpectationConfig {
                seed: derive_seed(seed, &[STAGE_EXPECT, i as u64]),
                ..cfg.expectation
            };
            let cmp = aci(&found.to_fuzzy(), &truth.to_fuzzy(), &ecfg)?;
            Ok(BiasRow {
                dataset: i,
                n,
                c,
                dims,
                alpha,
                ari,
                aci: cmp.aci,
                mc_std_error: cmp.mc_std_error,
            })
        })
        .collect::<Result<_>>()?;
    let diffs: Vec<f64> = rows.iter().map(|r| r.aci - r.ari).collect();
    let mean_diff = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let max_abs_diff = diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let mut metadata = BTreeMap::new();
    metadata.insert("version".into(), json!(crate::VERSION));
    metadata.insert("seed".into(), json!(seed));
    metadata.insert("n_datasets".into(), json!(n_datasets));
    metadata.insert("config".into(), json!(cfg));
    metadata.insert("sample_split".into(), json!(SPLIT_RULE));
    if cfg.expectation.mode == ExpectationMode::MonteCarlo {
        metadata.insert(
            "expectation_seed_derivation".into(),
            json!("derive_seed(seed, [3, dataset])"),
        );
    }
    Ok(BiasResult {
        mean_diff,
        max_abs_diff,
        rows,
        metadata,
    })
}
