//! Expected NDC under the permutation null model.
//!
//! The null model shuffles the upper-triangular equivalence values of one
//! partition against the other. Only the relative alignment matters, so one
//! vector is permuted and the other stays fixed.
//!
//! Three estimators are provided:
//!
//! * [`expected_ndc_closed_form`]: exact. Under a uniform permutation each
//!   position pairs `p_i` with a uniformly random `q_j`, so the expectation is
//!   `1 - (1/m^2) sum_i sum_j |p_i - q_j|`, evaluated in `O(m log m)`.
//! * [`expected_ndc_enumeration`]: averages over all `m!` permutations.
//! * [`expected_ndc_monte_carlo`]: averages over `h` sampled permutations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{rng, Error, Result};

/// Largest `m` accepted by exhaustive enumeration (10! = 3,628,800).
pub const MAX_ENUMERATION_LIMIT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectationMode {
    #[default]
    ClosedForm,
    Enumeration,
    MonteCarlo,
}

impl std::fmt::Display for ExpectationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ExpectationMode::ClosedForm => "closed_form",
            ExpectationMode::Enumeration => "enumeration",
            ExpectationMode::MonteCarlo => "monte_carlo",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectationConfig {
    pub mode: ExpectationMode,
    /// Sampled permutations (Monte Carlo only).
    pub h: usize,
    pub seed: u64,
    /// Largest pair count for which enumeration is allowed.
    pub enumeration_limit: usize,
}

impl Default for ExpectationConfig {
    fn default() -> Self {
        Self {
            mode: ExpectationMode::ClosedForm,
            h: 1000,
            seed: 0,
            enumeration_limit: 8,
        }
    }
}

impl ExpectationConfig {
    pub fn closed_form() -> Self {
        Self::default()
    }

    pub fn enumeration() -> Self {
        Self {
            mode: ExpectationMode::Enumeration,
            ..Self::default()
        }
    }

    pub fn monte_carlo(h: usize, seed: u64) -> Self {
        Self {
            mode: ExpectationMode::MonteCarlo,
            h,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.h == 0 {
            return Err(Error::Config("h must be at least 1".into()));
        }
        if self.enumeration_limit > MAX_ENUMERATION_LIMIT {
            return Err(Error::Config(format!(
                "enumeration_limit {} exceeds {MAX_ENUMERATION_LIMIT}",
                self.enumeration_limit
            )));
        }
        Ok(())
    }
}

/// Monte Carlo estimate of the expected NDC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    /// Sample standard deviation over `sqrt(h)`; NaN when `h == 1`.
    pub std_error: f64,
    pub h: usize,
}

fn check_lengths(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::SizeMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    if p.is_empty() {
        return Err(Error::Empty);
    }
    Ok(())
}

/// Exact expected NDC, `1 - (1/m^2) sum_i sum_j |p_i - q_j|`.
pub fn expected_ndc_closed_form(p: &[f64], q: &[f64]) -> Result<f64> {
    check_lengths(p, q)?;
    let m = p.len();
    let mut sorted = q.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let mut prefix = Vec::with_capacity(m + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &v in &sorted {
        acc += v;
        prefix.push(acc);
    }
    let total = acc;
    let mut cross = 0.0;
    for &pi in p {
        // number of q values <= pi
        let k = sorted.partition_point(|&v| v <= pi);
        let below = pi * k as f64 - prefix[k];
        let above = (total - prefix[k]) - pi * (m - k) as f64;
        cross += below + above;
    }
    let mf = m as f64;
    Ok((1.0 - cross / (mf * mf)).clamp(0.0, 1.0))
}

/// Expected NDC averaged over all `m!` permutations of `q`.
pub fn expected_ndc_enumeration(p: &[f64], q: &[f64], limit: usize) -> Result<f64> {
    check_lengths(p, q)?;
    let m = p.len();
    let limit = limit.min(MAX_ENUMERATION_LIMIT);
    if m > limit {
        return Err(Error::EnumerationTooLarge { m, limit });
    }
    let mut perm = q.to_vec();
    let dist = |perm: &[f64]| -> f64 { p.iter().zip(perm).map(|(a, b)| (a - b).abs()).sum() };

    // Heap's algorithm, iterative form.
    let mut total = dist(&perm);
    let mut count = 1u64;
    let mut c = vec![0usize; m];
    let mut i = 0;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            total += dist(&perm);
            count += 1;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(1.0 - total / (count as f64 * m as f64))
}

/// Expected NDC estimated from `h` uniformly random permutations of `q`.
///
/// Permutation `t` is drawn by Fisher-Yates from [`rng::stream`]`(seed, t)`,
/// so the estimate depends only on `(p, q, h, seed)` and not on how the work
/// is scheduled across threads.
pub fn expected_ndc_monte_carlo(p: &[f64], q: &[f64], h: usize, seed: u64) -> Result<MonteCarloEstimate> {
    check_lengths(p, q)?;
    if h == 0 {
        return Err(Error::Config("h must be at least 1".into()));
    }
    let m = p.len() as f64;
    let samples: Vec<f64> = (0..h)
        .into_par_iter()
        .map_init(
            || q.to_vec(),
            |buf, t| {
                buf.copy_from_slice(q);
                rng::shuffle(&mut rng::stream(seed, t as u64), buf);
                let d: f64 = p.iter().zip(buf.iter()).map(|(a, b)| (a - b).abs()).sum();
                1.0 - d / m
            },
        )
        .collect();
    let mean = samples.iter().sum::<f64>() / h as f64;
    let std_error = if h > 1 {
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (h - 1) as f64;
        (var / h as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(MonteCarloEstimate {
        estimate: mean,
        std_error,
        h,
    })
}

/// Dispatch on `cfg.mode`. Returns the expectation and, for Monte Carlo, its
/// standard error.
pub fn expected_ndc(p: &[f64], q: &[f64], cfg: &ExpectationConfig) -> Result<(f64, Option<f64>)> {
    cfg.validate()?;
    match cfg.mode {
        ExpectationMode::ClosedForm => Ok((expected_ndc_closed_form(p, q)?, None)),
        ExpectationMode::Enumeration => Ok((expected_ndc_enumeration(p, q, cfg.enumeration_limit)?, None)),
        ExpectationMode::MonteCarlo => {
            let est = expected_ndc_monte_carlo(p, q, cfg.h, cfg.seed)?;
            Ok((est.estimate, Some(est.std_error)))
        }
    }
}
