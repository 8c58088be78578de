//! Fuzzy concordance between partitions and the adjusted concordance index.
//!
//! Two partitions are compared through their equivalence matrices `E_P` and
//! `E_Q`. A pair is concordant to degree `1 - |E_P - E_Q|`; the NDC is the mean
//! concordance over all pairs and reduces to the Rand index on crisp inputs.
//! The ACI rescales the NDC against its permutation expectation:
//! `(NDC - E[NDC]) / (1 - E[NDC])`.

use serde::{Deserialize, Serialize};

use crate::expectation::{expected_ndc, ExpectationConfig, ExpectationMode};
use crate::partition::{equivalence_matrix, EquivalenceMatrix, FuzzyPartition};
use crate::reduce::{chunked_sum, chunked_sums};
use crate::{Error, Result};

/// Threshold on `1 - E[NDC]` below which the ACI is reported as 0.
pub const DEGENERATE_EXPECTATION: f64 = 1e-12;

/// Degree of concordance of one pair, `1 - |eP - eQ|`.
pub fn concordance_degree(e_p: f64, e_q: f64) -> Result<f64> {
    for value in [e_p, e_q] {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::OutOfUnitInterval {
                what: "equivalence degree",
                value,
            });
        }
    }
    Ok(1.0 - (e_p - e_q).abs())
}

fn check_same_n(ep: &EquivalenceMatrix, eq: &EquivalenceMatrix) -> Result<()> {
    if ep.n() != eq.n() {
        return Err(Error::SizeMismatch {
            left: ep.n(),
            right: eq.n(),
        });
    }
    Ok(())
}

/// Normalized degree of concordance, `1 - (1/m) sum_{i<j} |E_P - E_Q|`.
pub fn ndc(ep: &EquivalenceMatrix, eq: &EquivalenceMatrix) -> Result<f64> {
    check_same_n(ep, eq)?;
    let (p, q) = (ep.upper_tri(), eq.upper_tri());
    let disc = chunked_sum(p.len(), |i| (p[i] - q[i]).abs());
    Ok(1.0 - disc / p.len() as f64)
}

/// Per-pair cardinal vectors, each of length `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerPairCardinals {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

/// Fuzzy pair cardinals summed over all pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCardinals {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_pair: Option<PerPairCardinals>,
}

/// Cardinals of a single pair with product t-norm and probabilistic-sum
/// t-conorm. The four values sum to 1.
#[inline]
fn pair_cardinals(e_p: f64, e_q: f64) -> [f64; 4] {
    let diff = e_p - e_q;
    let conc = 1.0 - diff.abs();
    let both = e_p * e_q;
    [conc * both, diff.max(0.0), (-diff).max(0.0), conc * (1.0 - both)]
}

/// Aggregate fuzzy cardinals `(a, b, c, d)`.
pub fn fuzzy_cardinals(ep: &EquivalenceMatrix, eq: &EquivalenceMatrix) -> Result<PairCardinals> {
    fuzzy_cardinals_with(ep, eq, false)
}

/// Like [`fuzzy_cardinals`], optionally keeping the per-pair vectors.
pub fn fuzzy_cardinals_with(ep: &EquivalenceMatrix, eq: &EquivalenceMatrix, keep_pairs: bool) -> Result<PairCardinals> {
    check_same_n(ep, eq)?;
    let (p, q) = (ep.upper_tri(), eq.upper_tri());
    let [a, b, c, d] = chunked_sums(p.len(), |i| pair_cardinals(p[i], q[i]));
    let per_pair = keep_pairs.then(|| {
        let mut out = PerPairCardinals {
            a: Vec::with_capacity(p.len()),
            b: Vec::with_capacity(p.len()),
            c: Vec::with_capacity(p.len()),
            d: Vec::with_capacity(p.len()),
        };
        for (&x, &y) in p.iter().zip(q) {
            let [pa, pb, pc, pd] = pair_cardinals(x, y);
            out.a.push(pa);
            out.b.push(pb);
            out.c.push(pc);
            out.d.push(pd);
        }
        out
    });
    Ok(PairCardinals {
        a,
        b,
        c,
        d,
        m: p.len(),
        per_pair,
    })
}

/// Indices expressible through the four cardinals. `None` marks an index whose
/// denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CardinalIndices {
    pub rand: Option<f64>,
    pub jaccard: Option<f64>,
    pub fowlkes_mallows: Option<f64>,
    /// `2(b + c)`, an unnormalized distance.
    pub mirkin: f64,
    pub dice: Option<f64>,
}

impl CardinalIndices {
    pub fn from_cardinals(a: f64, b: f64, c: f64, d: f64) -> Self {
        let ratio = |num: f64, den: f64| (den > 0.0).then(|| num / den);
        Self {
            rand: ratio(a + d, a + b + c + d),
            jaccard: ratio(a, a + b + c),
            fowlkes_mallows: ratio(a, ((a + b) * (a + c)).sqrt()),
            mirkin: 2.0 * (b + c),
            dice: ratio(2.0 * a, 2.0 * a + b + c),
        }
    }
}

pub fn cardinal_indices(pc: &PairCardinals) -> CardinalIndices {
    CardinalIndices::from_cardinals(pc.a, pc.b, pc.c, pc.d)
}

/// Outcome of comparing two partitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub ndc: f64,
    pub expected_ndc: f64,
    /// Raw adjusted concordance index; may be negative.
    pub aci: f64,
    /// `max(aci, 0)`.
    pub aci_clamped: f64,
    pub cardinals: PairCardinals,
    pub indices: CardinalIndices,
    pub expectation_mode: ExpectationMode,
    pub mc_std_error: Option<f64>,
    /// Set when `1 - E[NDC]` is below [`DEGENERATE_EXPECTATION`]; `aci` is
    /// then 0.
    pub degenerate: bool,
    pub config: ExpectationConfig,
    pub m: usize,
    pub n: usize,
}

/// Compare two fuzzy partitions: NDC, its expectation, ACI and cardinals.
pub fn aci(p: &FuzzyPartition, q: &FuzzyPartition, cfg: &ExpectationConfig) -> Result<ComparisonResult> {
    if p.n() != q.n() {
        return Err(Error::SizeMismatch {
            left: p.n(),
            right: q.n(),
        });
    }
    aci_from_equivalence(&equivalence_matrix(p), &equivalence_matrix(q), cfg)
}

/// [`aci`] on precomputed equivalence matrices.
pub fn aci_from_equivalence(
    ep: &EquivalenceMatrix,
    eq: &EquivalenceMatrix,
    cfg: &ExpectationConfig,
) -> Result<ComparisonResult> {
    check_same_n(ep, eq)?;
    let ndc = ndc(ep, eq)?;
    let cardinals = fuzzy_cardinals(ep, eq)?;
    let indices = cardinal_indices(&cardinals);
    let (expected, mc_std_error) = expected_ndc(ep.upper_tri(), eq.upper_tri(), cfg)?;
    let headroom = 1.0 - expected;
    let degenerate = headroom <= DEGENERATE_EXPECTATION;
    let aci = if degenerate { 0.0 } else { (ndc - expected) / headroom };
    Ok(ComparisonResult {
        ndc,
        expected_ndc: expected,
        aci,
        aci_clamped: aci.max(0.0),
        cardinals,
        indices,
        expectation_mode: cfg.mode,
        mc_std_error,
        degenerate,
        config: *cfg,
        m: ep.m(),
        n: ep.n(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crisp::{ari_cardinals, pair_counts, rand_index};
    use crate::partition::CrispPartition;
    use crate::rng;
    use proptest::prelude::*;

    fn eq_of(labels: &[i64]) -> EquivalenceMatrix {
        equivalence_matrix(&FuzzyPartition::from_labels(labels).unwrap())
    }

    fn random_fuzzy(n: usize, k: usize, seed: u64) -> FuzzyPartition {
        let mut r = rng::stream(seed, 0);
        let raw: Vec<f64> = (0..n * k).map(|_| rng::unit(&mut r) + 1e-3).collect();
        FuzzyPartition::renormalized(raw, n, k).unwrap()
    }

    #[test]
    fn concordance_examples() {
        assert_eq!(concordance_degree(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(concordance_degree(1.0, 0.0).unwrap(), 0.0);
        assert!((concordance_degree(0.50, 0.11).unwrap() - 0.61).abs() < 1e-12);
        assert!(concordance_degree(1.1, 0.0).is_err());
        assert!(concordance_degree(0.0, -0.1).is_err());
    }

    #[test]
    fn crisp_toy_cardinals_and_ndc() {
        let (ep, eq) = (eq_of(&[0, 0, 1, 0]), eq_of(&[0, 1, 1, 0]));
        assert_eq!(ndc(&ep, &eq).unwrap(), 0.5);
        let pc = fuzzy_cardinals(&ep, &eq).unwrap();
        assert_eq!((pc.a, pc.b, pc.c, pc.d), (1.0, 2.0, 1.0, 2.0));
        let idx = cardinal_indices(&pc);
        assert_eq!(idx.rand, Some(0.5));
        assert_eq!(idx.jaccard, Some(0.25));
        assert_eq!(idx.dice, Some(0.4));
        assert_eq!(idx.mirkin, 6.0);
    }

    #[test]
    fn fuzzy_toy_ndc() {
        let p = FuzzyPartition::from_rows(&[[0.29, 0.71], [0.79, 0.21], [0.41, 0.59], [0.88, 0.12]], false).unwrap();
        let q = FuzzyPartition::from_rows(&[[0.94, 0.06], [0.05, 0.95], [0.53, 0.47], [0.89, 0.11]], false).unwrap();
        let v = ndc(&equivalence_matrix(&p), &equivalence_matrix(&q)).unwrap();
        assert!((v - 0.6367).abs() < 5e-3);
        let res = aci(&p, &q, &ExpectationConfig::enumeration()).unwrap();
        assert!((res.expected_ndc - 0.6972).abs() < 5e-3);
        assert!((res.aci + 0.200).abs() < 5e-3);
        assert_eq!(res.aci_clamped, 0.0);
    }

    #[test]
    fn single_pair_cardinals() {
        let ep = EquivalenceMatrix::from_upper_tri(2, vec![0.9]).unwrap();
        let eq = EquivalenceMatrix::from_upper_tri(2, vec![0.6]).unwrap();
        let pc = fuzzy_cardinals_with(&ep, &eq, true).unwrap();
        assert!((pc.a - 0.378).abs() < 1e-12);
        assert!((pc.b - 0.3).abs() < 1e-12);
        assert_eq!(pc.c, 0.0);
        assert!((pc.d - 0.322).abs() < 1e-12);
        assert!((pc.a + pc.b + pc.c + pc.d - 1.0).abs() < 1e-12);
        assert_eq!(pc.per_pair.unwrap().a.len(), 1);
    }

    #[test]
    fn all_ones_cardinals() {
        let e = EquivalenceMatrix::from_upper_tri(4, vec![1.0; 6]).unwrap();
        let pc = fuzzy_cardinals(&e, &e).unwrap();
        assert_eq!((pc.a, pc.b, pc.c, pc.d), (6.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn identical_fuzzy_partitions() {
        let p = random_fuzzy(12, 3, 4);
        let res = aci(&p, &p, &ExpectationConfig::default()).unwrap();
        assert_eq!(res.ndc, 1.0);
        assert_eq!(res.aci, 1.0);
        assert_eq!(res.indices.rand, Some(1.0));
        assert_eq!(res.indices.mirkin, 0.0);
    }

    #[test]
    fn random_fuzzy_rand_entry_equals_ndc() {
        let (p, q) = (random_fuzzy(10, 3, 1), random_fuzzy(10, 3, 2));
        let (ep, eq) = (equivalence_matrix(&p), equivalence_matrix(&q));
        let pc = fuzzy_cardinals(&ep, &eq).unwrap();
        assert!((cardinal_indices(&pc).rand.unwrap() - ndc(&ep, &eq).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_expectation_reports_zero() {
        let c = FuzzyPartition::from_rows(&[[0.5, 0.5]; 4], false).unwrap();
        let res = aci(&c, &c, &ExpectationConfig::default()).unwrap();
        assert!(res.degenerate);
        assert_eq!(res.aci, 0.0);
        assert_eq!(res.ndc, 1.0);
    }

    #[test]
    fn size_mismatch() {
        let p = FuzzyPartition::from_labels(&[0, 1, 0]).unwrap();
        let q = FuzzyPartition::from_labels(&[0, 1]).unwrap();
        assert!(matches!(
            aci(&p, &q, &ExpectationConfig::default()),
            Err(Error::SizeMismatch { .. })
        ));
        assert!(ndc(&equivalence_matrix(&p), &equivalence_matrix(&q)).is_err());
    }

    #[test]
    fn per_pair_closure() {
        let (p, q) = (random_fuzzy(15, 4, 7), random_fuzzy(15, 2, 8));
        let (ep, eq) = (equivalence_matrix(&p), equivalence_matrix(&q));
        let pc = fuzzy_cardinals_with(&ep, &eq, true).unwrap();
        let pp = pc.per_pair.as_ref().unwrap();
        let mut conc = 0.0;
        for i in 0..pc.m {
            assert!((pp.a[i] + pp.b[i] + pp.c[i] + pp.d[i] - 1.0).abs() < 1e-12);
            assert!(pp.b[i] == 0.0 || pp.c[i] == 0.0);
            conc += pp.a[i] + pp.d[i];
        }
        assert!((conc / pc.m as f64 - ndc(&ep, &eq).unwrap()).abs() < 1e-12);
        assert!((pc.a + pc.b + pc.c + pc.d - pc.m as f64).abs() < 1e-9 * pc.m as f64);
    }

    fn crisp_pair() -> impl Strategy<Value = (Vec<i64>, Vec<i64>)> {
        (2usize..100, 1i64..=10, 1i64..=10)
            .prop_flat_map(|(n, kp, kq)| (prop::collection::vec(0..kp, n), prop::collection::vec(0..kq, n)))
    }

    proptest! {
        #[test]
        fn crisp_reduction((lp, lq) in crisp_pair()) {
            let (ep, eq) = (eq_of(&lp), eq_of(&lq));
            let cp = CrispPartition::from_signed(&lp).unwrap();
            let cq = CrispPartition::from_signed(&lq).unwrap();
            let counts = pair_counts(&cp, &cq).unwrap();
            prop_assert!((ndc(&ep, &eq).unwrap() - rand_index(&counts).unwrap()).abs() < 1e-12);
            let pc = fuzzy_cardinals(&ep, &eq).unwrap();
            prop_assert_eq!(
                (pc.a, pc.b, pc.c, pc.d),
                (counts.a as f64, counts.b as f64, counts.c as f64, counts.d as f64)
            );
        }

        #[test]
        fn crisp_aci_equals_ari((lp, lq) in crisp_pair()) {
            let p = FuzzyPartition::from_labels(&lp).unwrap();
            let q = FuzzyPartition::from_labels(&lq).unwrap();
            let res = aci(&p, &q, &ExpectationConfig::closed_form()).unwrap();
            let ari = ari_cardinals(&pair_counts(&p.to_crisp().unwrap(), &q.to_crisp().unwrap()).unwrap()).unwrap();
            if res.degenerate {
                // both partitions trivial: ARI is 1 by convention, ACI has no headroom
                prop_assert_eq!(ari, 1.0);
            } else {
                prop_assert!((res.aci - ari).abs() <= 1e-10, "aci {} ari {}", res.aci, ari);
            }
        }

        #[test]
        fn ndc_symmetric_and_triangle(n in 2usize..15, seed in any::<u64>()) {
            let p = random_fuzzy(n, 3, seed);
            let q = random_fuzzy(n, 2, seed ^ 1);
            let r = random_fuzzy(n, 4, seed ^ 2);
            let (ep, eq, er) = (equivalence_matrix(&p), equivalence_matrix(&q), equivalence_matrix(&r));
            let d = |x: &EquivalenceMatrix, y: &EquivalenceMatrix| 1.0 - ndc(x, y).unwrap();
            prop_assert_eq!(d(&ep, &eq), d(&eq, &ep));
            prop_assert!(d(&ep, &er) <= d(&ep, &eq) + d(&eq, &er) + 1e-12);
            prop_assert!(d(&ep, &eq) >= 0.0);
            prop_assert_eq!(d(&ep, &ep), 0.0);
        }
    }
}
