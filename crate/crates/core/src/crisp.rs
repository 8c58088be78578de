//! Pair-counting indices for crisp partitions.
//!
//! Every index here is a function of the four pair classes of two partitions
//! `P` and `Q` over the same objects:
//!
//! * `a`: pairs together in both,
//! * `b`: together in `P` only,
//! * `c`: together in `Q` only,
//! * `d`: separated in both.

use serde::{Deserialize, Serialize};

use crate::concordance::CardinalIndices;
use crate::partition::{pair_count, CrispPartition};
use crate::{Error, Result};

/// Pair class counts; `a + b + c + d == m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCounts {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl PairCounts {
    pub fn m(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }
}

/// Cross-tabulation of two crisp partitions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    counts: Vec<Vec<u64>>,
    row_marginals: Vec<u64>,
    col_marginals: Vec<u64>,
    n: u64,
}

impl ContingencyTable {
    pub fn new(p: &CrispPartition, q: &CrispPartition) -> Result<Self> {
        check_sizes(p, q)?;
        let mut counts = vec![vec![0u64; q.k()]; p.k()];
        for (&i, &j) in p.labels().iter().zip(q.labels()) {
            counts[i][j] += 1;
        }
        Self::from_counts(counts)
    }

    /// Build from a raw table; marginals are derived.
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let cols = counts.first().map_or(0, Vec::len);
        if counts.is_empty() || cols == 0 {
            return Err(Error::Empty);
        }
        if counts.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged contingency table".into()));
        }
        let row_marginals: Vec<u64> = counts.iter().map(|r| r.iter().sum()).collect();
        let col_marginals: Vec<u64> = (0..cols).map(|j| counts.iter().map(|r| r[j]).sum()).collect();
        let n = row_marginals.iter().sum();
        Ok(Self {
            counts,
            row_marginals,
            col_marginals,
            n,
        })
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row_marginals(&self) -> &[u64] {
        &self.row_marginals
    }

    pub fn col_marginals(&self) -> &[u64] {
        &self.col_marginals
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Pair counts derived from the table.
    pub fn pair_counts(&self) -> PairCounts {
        let both: u64 = self.counts.iter().flatten().map(|&x| choose2(x)).sum();
        let in_p: u64 = self.row_marginals.iter().map(|&x| choose2(x)).sum();
        let in_q: u64 = self.col_marginals.iter().map(|&x| choose2(x)).sum();
        let m = choose2(self.n);
        PairCounts {
            a: both,
            b: in_p - both,
            c: in_q - both,
            d: m + both - in_p - in_q,
        }
    }
}

fn choose2(x: u64) -> u64 {
    x * x.saturating_sub(1) / 2
}

fn check_sizes(p: &CrispPartition, q: &CrispPartition) -> Result<()> {
    if p.n() != q.n() {
        return Err(Error::SizeMismatch {
            left: p.n(),
            right: q.n(),
        });
    }
    Ok(())
}

/// Pair counts via the contingency table, `O(n + K_P K_Q)`.
pub fn pair_counts(p: &CrispPartition, q: &CrispPartition) -> Result<PairCounts> {
    Ok(ContingencyTable::new(p, q)?.pair_counts())
}

/// Pair counts by scanning all `n(n-1)/2` pairs.
pub fn pair_counts_scan(p: &CrispPartition, q: &CrispPartition) -> Result<PairCounts> {
    check_sizes(p, q)?;
    let (lp, lq) = (p.labels(), q.labels());
    let mut pc = PairCounts { a: 0, b: 0, c: 0, d: 0 };
    for i in 0..lp.len() {
        for j in i + 1..lp.len() {
            match (lp[i] == lp[j], lq[i] == lq[j]) {
                (true, true) => pc.a += 1,
                (true, false) => pc.b += 1,
                (false, true) => pc.c += 1,
                (false, false) => pc.d += 1,
            }
        }
    }
    debug_assert_eq!(pc.m() as usize, pair_count(lp.len()));
    Ok(pc)
}

/// Rand index `(a + d) / m`.
pub fn rand_index(pc: &PairCounts) -> Result<f64> {
    let m = pc.m();
    if m == 0 {
        return Err(Error::Undefined("Rand index with zero pairs"));
    }
    Ok((pc.a + pc.d) as f64 / m as f64)
}

/// Hubert-Arabie adjusted Rand index from pair counts:
/// `2(ad - bc) / (b^2 + c^2 + 2ad + (a + d)(c + b))`.
///
/// The denominator vanishes only when `b = c = 0` and one of `a`, `d` is
/// zero, i.e. both partitions are all-singletons or both are one cluster.
/// Such partitions have identical pair structure and get 1.
pub fn ari_cardinals(pc: &PairCounts) -> Result<f64> {
    let (a, b, c, d) = (pc.a as f64, pc.b as f64, pc.c as f64, pc.d as f64);
    let den = b * b + c * c + 2.0 * a * d + (a + d) * (c + b);
    if den == 0.0 {
        return if pc.b == 0 && pc.c == 0 {
            Ok(1.0)
        } else {
            Err(Error::Undefined("adjusted Rand index: zero denominator"))
        };
    }
    Ok(2.0 * (a * d - b * c) / den)
}

/// Adjusted Rand index in binomial-coefficient form over the contingency
/// table and its marginals.
pub fn ari_contingency(t: &ContingencyTable) -> Result<f64> {
    if t.n() < 2 {
        return Err(Error::TooFewObjects(t.n() as usize));
    }
    let c2 = |x: u64| choose2(x) as f64;
    let index: f64 = t.counts().iter().flatten().map(|&x| c2(x)).sum();
    let rows: f64 = t.row_marginals().iter().map(|&x| c2(x)).sum();
    let cols: f64 = t.col_marginals().iter().map(|&x| c2(x)).sum();
    let expected = rows * cols / c2(t.n());
    let max_index = 0.5 * (rows + cols);
    let den = max_index - expected;
    if den == 0.0 {
        let pc = t.pair_counts();
        return if pc.b == 0 && pc.c == 0 {
            Ok(1.0)
        } else {
            Err(Error::Undefined("adjusted Rand index: zero denominator"))
        };
    }
    Ok((index - expected) / den)
}

/// Rand, Jaccard, Fowlkes-Mallows, Mirkin and Dice from pair counts.
pub fn related_indices(pc: &PairCounts) -> CardinalIndices {
    CardinalIndices::from_cardinals(pc.a as f64, pc.b as f64, pc.c as f64, pc.d as f64)
}
