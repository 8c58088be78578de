//! Crisp and fuzzy partitions and their pairwise fuzzy equivalence.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Allowed deviation of a membership row sum from 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Hard assignment of `n` objects to `k` clusters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrispPartition {
    labels: Vec<usize>,
    k: usize,
}

impl CrispPartition {
    /// Build from labels, inferring `k = max(label) + 1`.
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        let k = labels.iter().copied().max().map_or(0, |m| m + 1);
        Self::with_k(labels, k)
    }

    /// Build with an explicit cluster count; clusters may be empty.
    pub fn with_k(labels: Vec<usize>, k: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Empty);
        }
        if labels.len() < 2 {
            return Err(Error::TooFewObjects(labels.len()));
        }
        if let Some((index, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= k) {
            return Err(Error::LabelOutOfRange { index, label, k });
        }
        Ok(Self { labels, k })
    }

    /// Build from signed ids, rejecting negatives.
    pub fn from_signed(ids: &[i64]) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::Empty);
        }
        let labels = ids
            .iter()
            .enumerate()
            .map(|(index, &id)| usize::try_from(id).map_err(|_| Error::NegativeLabel { index, id }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Number of objects in each cluster.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// One-hot membership matrix.
    pub fn to_fuzzy(&self) -> FuzzyPartition {
        let mut data = vec![0.0; self.n() * self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            data[i * self.k + l] = 1.0;
        }
        FuzzyPartition {
            data,
            n: self.n(),
            k: self.k,
        }
    }
}

/// Row-stochastic membership matrix, `n` objects by `k` clusters.
///
/// Stored row-major. Every entry lies in `[0, 1]` and every row sums to 1
/// within [`ROW_SUM_TOLERANCE`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyPartition {
    data: Vec<f64>,
    n: usize,
    k: usize,
}

impl FuzzyPartition {
    /// Validate a row-major membership matrix. Rows that do not sum to 1 are
    /// rejected.
    pub fn new(data: Vec<f64>, n: usize, k: usize) -> Result<Self> {
        Self::build(data, n, k, false)
    }

    /// Like [`FuzzyPartition::new`] but rescales each row to sum to 1.
    /// Rows that sum to zero are still rejected.
    pub fn renormalized(data: Vec<f64>, n: usize, k: usize) -> Result<Self> {
        Self::build(data, n, k, true)
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], renormalize: bool) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        let k = rows[0].as_ref().len();
        let mut data = Vec::with_capacity(n * k);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != k {
                return Err(Error::Shape(format!("row {i} has {} columns, expected {k}", r.len())));
            }
            data.extend_from_slice(r);
        }
        Self::build(data, n, k, renormalize)
    }

    /// One-hot encoding of integer labels with `k = max(label) + 1`.
    pub fn from_labels(labels: &[i64]) -> Result<Self> {
        Ok(CrispPartition::from_signed(labels)?.to_fuzzy())
    }

    fn build(mut data: Vec<f64>, n: usize, k: usize, renormalize: bool) -> Result<Self> {
        if n == 0 || data.is_empty() {
            return Err(Error::Empty);
        }
        if n < 2 {
            return Err(Error::TooFewObjects(n));
        }
        if k == 0 {
            return Err(Error::Shape("membership matrix needs at least one column".into()));
        }
        if data.len() != n * k {
            return Err(Error::Shape(format!(
                "{} values do not form a {n}x{k} matrix",
                data.len()
            )));
        }
        for (row, chunk) in data.chunks_exact_mut(k).enumerate() {
            for (col, &v) in chunk.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { row, col });
                }
                if v < 0.0 || (!renormalize && v > 1.0) {
                    return Err(Error::MembershipOutOfRange { row, col, value: v });
                }
            }
            let sum: f64 = chunk.iter().sum();
            if renormalize {
                if sum <= 0.0 {
                    return Err(Error::RowSum {
                        row,
                        sum,
                        tolerance: ROW_SUM_TOLERANCE,
                    });
                }
                chunk.iter_mut().for_each(|v| *v /= sum);
            } else if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::RowSum {
                    row,
                    sum,
                    tolerance: ROW_SUM_TOLERANCE,
                });
            }
        }
        Ok(Self { data, n, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Membership vector of object `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.k)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, c: usize) -> f64 {
        self.data[i * self.k + c]
    }

    /// True when every row is one-hot.
    pub fn is_crisp(&self) -> bool {
        self.rows()
            .all(|r| r.iter().all(|&v| v == 0.0 || v == 1.0) && r.iter().filter(|&&v| v == 1.0).count() == 1)
    }

    /// Hard labels if the partition is crisp.
    pub fn to_crisp(&self) -> Option<CrispPartition> {
        if !self.is_crisp() {
            return None;
        }
        let labels = self
            .rows()
            .map(|r| r.iter().position(|&v| v == 1.0).unwrap_or(0))
            .collect();
        CrispPartition::with_k(labels, self.k).ok()
    }

    /// Hard labels by maximum membership; ties go to the lowest column.
    pub fn argmax_labels(&self) -> CrispPartition {
        let labels = self
            .rows()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .fold(
                        (0, f64::NEG_INFINITY),
                        |best, (c, &v)| if v > best.1 { (c, v) } else { best },
                    )
                    .0
            })
            .collect();
        CrispPartition { labels, k: self.k }
    }

    /// Reorder columns: column `c` of the result is column `perm[c]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.k {
            return Err(Error::Shape(format!(
                "permutation of length {} for {} columns",
                perm.len(),
                self.k
            )));
        }
        let data = self.rows().flat_map(|r| perm.iter().map(move |&p| r[p])).collect();
        Ok(Self {
            data,
            n: self.n,
            k: self.k,
        })
    }
}

impl From<&CrispPartition> for FuzzyPartition {
    fn from(p: &CrispPartition) -> Self {
        p.to_fuzzy()
    }
}

/// Number of unordered pairs among `n` objects.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Row-major index of pair `(i, j)`, `i < j < n`, into the strict upper
/// triangle: `(0,1), (0,2), ..., (0,n-1), (1,2), ...`.
pub fn pair_index(i: usize, j: usize, n: usize) -> Result<usize> {
    if i >= j || j >= n {
        return Err(Error::InvalidPair { i, j, n });
    }
    Ok(row_offset(i, n) + (j - i - 1))
}

#[inline]
fn row_offset(i: usize, n: usize) -> usize {
    // pairs in rows 0..i: sum_{r<i} (n - 1 - r)
    i * (2 * n - i - 1) / 2
}

/// Inverse of [`pair_index`].
pub fn pair_from_index(idx: usize, n: usize) -> Result<(usize, usize)> {
    let m = pair_count(n);
    if idx >= m {
        return Err(Error::InvalidPair { i: idx, j: idx, n });
    }
    // Rows have lengths n-1, n-2, ...; find the last row whose offset is <= idx.
    let (mut lo, mut hi) = (0usize, n - 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if row_offset(mid, n) <= idx {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let i = lo;
    Ok((i, i + 1 + idx - row_offset(i, n)))
}

/// Pairwise fuzzy equivalence degrees of a partition.
///
/// Only the strict upper triangle is stored; the diagonal is 1 by definition
/// and the lower triangle mirrors the upper.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceMatrix {
    n: usize,
    upper_tri: Vec<f64>,
}

impl EquivalenceMatrix {
    /// Wrap an upper-triangular vector of length `n(n-1)/2`.
    pub fn from_upper_tri(n: usize, upper_tri: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewObjects(n));
        }
        if upper_tri.len() != pair_count(n) {
            return Err(Error::Shape(format!(
                "{} pair values for n = {n}, expected {}",
                upper_tri.len(),
                pair_count(n)
            )));
        }
        if let Some(&value) = upper_tri.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::OutOfUnitInterval {
                what: "equivalence matrix",
                value,
            });
        }
        Ok(Self { n, upper_tri })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of pairs `m = n(n-1)/2`.
    pub fn m(&self) -> usize {
        self.upper_tri.len()
    }

    pub fn upper_tri(&self) -> &[f64] {
        &self.upper_tri
    }

    /// Entry `(i, j)` for any `i, j < n`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.n && j < self.n, "index out of bounds");
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Less => self.upper_tri[row_offset(i, self.n) + j - i - 1],
            std::cmp::Ordering::Greater => self.upper_tri[row_offset(j, self.n) + i - j - 1],
        }
    }

    /// Full symmetric `n x n` matrix with unit diagonal.
    pub fn dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

/// Fuzzy equivalence `E(i, j) = 1 - ||P(i) - P(j)||`, where `||.||` is the
/// L1 distance halved so that it ranges over `[0, 1]` for stochastic rows.
pub fn equivalence_matrix(p: &FuzzyPartition) -> EquivalenceMatrix {
    let n = p.n();
    let mut upper_tri = vec![0.0; pair_count(n)];
    // Split the output by rows so each worker writes a disjoint slice.
    let mut rows: Vec<(usize, &mut [f64])> = Vec::with_capacity(n);
    let mut rest = upper_tri.as_mut_slice();
    for i in 0..n.saturating_sub(1) {
        let (head, tail) = rest.split_at_mut(n - 1 - i);
        rows.push((i, head));
        rest = tail;
    }
    rows.into_par_iter().for_each(|(i, out)| {
        let ri = p.row(i);
        for (slot, j) in out.iter_mut().zip(i + 1..n) {
            let l1: f64 = ri.iter().zip(p.row(j)).map(|(a, b)| (a - b).abs()).sum();
            *slot = (1.0 - 0.5 * l1).clamp(0.0, 1.0);
        }
    });
    EquivalenceMatrix { n, upper_tri }
}
