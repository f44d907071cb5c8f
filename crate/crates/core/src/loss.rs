//! Partition losses: Binder and variation of information (VI) between two
//! partitions, and the expected-loss criteria evaluated against a pairwise
//! similarity matrix.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::psm::PairwiseSimilarityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossKind {
    #[default]
    Binder,
    Vi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

impl LogBase {
    fn scale(self) -> f64 {
        match self {
            LogBase::Natural => 1.0,
            LogBase::Two => std::f64::consts::LN_2,
        }
    }
}

fn check_same_n(a: &Partition, b: &Partition) -> Result<()> {
    if a.n_items() != b.n_items() {
        return Err(Error::DimensionMismatch {
            expected: a.n_items(),
            found: b.n_items(),
        });
    }
    Ok(())
}

/// Contingency counts `n_kl` between the clusters of `a` and `b`.
fn contingency(a: &Partition, b: &Partition) -> BTreeMap<(usize, usize), usize> {
    let mut table = BTreeMap::new();
    for (&la, &lb) in a.labels().iter().zip(b.labels()) {
        *table.entry((la, lb)).or_insert(0) += 1;
    }
    table
}

fn pairs(m: usize) -> f64 {
    (m * m.saturating_sub(1) / 2) as f64
}

/// Fraction of item pairs on which the two partitions disagree about
/// co-membership (equal weights for both kinds of disagreement).
pub fn binder_between(a: &Partition, b: &Partition) -> Result<f64> {
    check_same_n(a, b)?;
    let n = a.n_items();
    if n < 2 {
        return Err(Error::InvalidInput("binder loss needs at least 2 items".into()));
    }
    // disagreements = pairs(a) + pairs(b) - 2 * pairs together in both
    let together_a: f64 = a.cluster_sizes().into_iter().map(pairs).sum();
    let together_b: f64 = b.cluster_sizes().into_iter().map(pairs).sum();
    let together_both: f64 = contingency(a, b).into_values().map(pairs).sum();
    Ok((together_a + together_b - 2.0 * together_both) / pairs(n))
}

/// `H(a) + H(b) - 2 I(a, b)` in natural-log units.
pub fn vi_between(a: &Partition, b: &Partition) -> Result<f64> {
    vi_between_base(a, b, LogBase::Natural)
}

pub fn vi_between_base(a: &Partition, b: &Partition, base: LogBase) -> Result<f64> {
    check_same_n(a, b)?;
    let n = a.n_items() as f64;
    let plogp = |count: usize| {
        let p = count as f64 / n;
        p * p.ln()
    };
    let h_a: f64 = -a.cluster_sizes().into_iter().map(plogp).sum::<f64>();
    let h_b: f64 = -b.cluster_sizes().into_iter().map(plogp).sum::<f64>();
    let h_ab: f64 = -contingency(a, b).into_values().map(plogp).sum::<f64>();
    // I = H(a) + H(b) - H(a,b), so VI = 2 H(a,b) - H(a) - H(b)
    let vi = 2.0 * h_ab - h_a - h_b;
    Ok(vi.max(0.0) / base.scale())
}

fn check_psm(p: &Partition, psm: &PairwiseSimilarityMatrix) -> Result<()> {
    if p.n_items() != psm.n_items() {
        return Err(Error::DimensionMismatch {
            expected: psm.n_items(),
            found: p.n_items(),
        });
    }
    Ok(())
}

/// `sum over i < j of (gamma_ij(p) - psm_ij)^2`.
pub fn expected_binder(p: &Partition, psm: &PairwiseSimilarityMatrix) -> Result<f64> {
    check_psm(p, psm)?;
    let n = p.n_items();
    let mut total = 0.0;
    for i in 0..n {
        let row = psm.row(i);
        for j in i + 1..n {
            let gamma = if p.same_cluster(i, j) { 1.0 } else { 0.0 };
            total += (gamma - row[j]).powi(2);
        }
    }
    Ok(total)
}

/// Lower bound on the expected VI:
/// `(1/n) sum_i [ln |c_i| + ln sum_j psm_ij - 2 ln sum_{j in c_i} psm_ij]`.
pub fn expected_vi_lb(p: &Partition, psm: &PairwiseSimilarityMatrix) -> Result<f64> {
    check_psm(p, psm)?;
    let n = p.n_items();
    let sizes = p.cluster_sizes();
    let mut total = 0.0;
    for i in 0..n {
        let row = psm.row(i);
        let mut all = 0.0;
        let mut within = 0.0;
        for (j, &v) in row.iter().enumerate() {
            all += v;
            if p.same_cluster(i, j) {
                within += v;
            }
        }
        total += (sizes[p.label(i)] as f64).ln() + all.ln() - 2.0 * within.ln();
    }
    Ok(total / n as f64)
}

/// Expected-loss criterion selected by `kind`.
pub fn expected_loss(kind: LossKind, p: &Partition, psm: &PairwiseSimilarityMatrix) -> Result<f64> {
    match kind {
        LossKind::Binder => expected_binder(p, psm),
        LossKind::Vi => expected_vi_lb(p, psm),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psm::pairwise_similarity;
    use proptest::prelude::*;

    fn part(l: &[usize]) -> Partition {
        Partition::canonicalize(l).unwrap()
    }

    fn psm3(p01: f64, p02: f64, p12: f64) -> PairwiseSimilarityMatrix {
        PairwiseSimilarityMatrix::from_rows(&[
            vec![1.0, p01, p02],
            vec![p01, 1.0, p12],
            vec![p02, p12, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn binder_fixtures() {
        let a = part(&[0, 1, 1, 0]);
        assert_eq!(binder_between(&a, &a).unwrap(), 0.0);
        let v = binder_between(&part(&[0, 0, 1, 1]), &part(&[0, 0, 0, 0])).unwrap();
        assert!((v - 4.0 / 6.0).abs() < 1e-12);
        let v = binder_between(&part(&[0, 0, 1]), &part(&[0, 1, 2])).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
        assert!(binder_between(&part(&[0]), &part(&[0])).is_err());
    }

    #[test]
    fn vi_fixtures() {
        let a = part(&[0, 1, 1, 2]);
        assert_eq!(vi_between(&a, &a).unwrap(), 0.0);
        let v = vi_between(&part(&[0, 0]), &part(&[0, 1])).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-12);
        let v = vi_between(&part(&[0, 0, 1, 1]), &part(&[0, 1, 0, 1])).unwrap();
        assert!((v - 2.0 * 2f64.ln()).abs() < 1e-12);
        let bits = vi_between_base(&part(&[0, 0, 1, 1]), &part(&[0, 1, 0, 1]), LogBase::Two).unwrap();
        assert!((bits - 2.0).abs() < 1e-12);
    }

    #[test]
    fn expected_binder_fixtures() {
        let v = expected_binder(&part(&[0, 0, 1]), &psm3(0.8, 0.1, 0.2)).unwrap();
        assert!((v - 0.09).abs() < 1e-12);
        let p = part(&[0, 1, 0, 0, 2]);
        let exact = pairwise_similarity(std::slice::from_ref(&p)).unwrap();
        assert_eq!(expected_binder(&p, &exact).unwrap(), 0.0);
        let psm = PairwiseSimilarityMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(expected_binder(&part(&[0, 1]), &psm).unwrap(), 1.0);
    }

    #[test]
    fn expected_vi_lb_fixtures() {
        let p = part(&[0, 1, 0, 0, 2]);
        let exact = pairwise_similarity(std::slice::from_ref(&p)).unwrap();
        assert!(expected_vi_lb(&p, &exact).unwrap().abs() < 1e-12);
        let one = PairwiseSimilarityMatrix::from_rows(&[vec![1.0]]).unwrap();
        assert_eq!(expected_vi_lb(&part(&[0]), &one).unwrap(), 0.0);
        let apart = PairwiseSimilarityMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(expected_vi_lb(&part(&[0, 1]), &apart).unwrap(), 0.0);
    }

    fn arb_pair() -> impl Strategy<Value = (Vec<u8>, Vec<u8>)> {
        (2usize..=6).prop_flat_map(|n| {
            (prop::collection::vec(0u8..4, n), prop::collection::vec(0u8..4, n))
        })
    }

    proptest! {
        #[test]
        fn binder_matches_expected_binder_on_exact_psm((a, b) in arb_pair()) {
            let (a, b) = (part(&a.iter().map(|&x| x as usize).collect::<Vec<_>>()),
                          part(&b.iter().map(|&x| x as usize).collect::<Vec<_>>()));
            let n = a.n_items();
            let exact_b = pairwise_similarity(std::slice::from_ref(&b)).unwrap();
            let count = expected_binder(&a, &exact_b).unwrap();
            let normalized = binder_between(&a, &b).unwrap();
            prop_assert!((count - normalized * (n * (n - 1) / 2) as f64).abs() < 1e-9);
        }

        #[test]
        fn losses_ignore_relabeling((a, b) in arb_pair(), shift in 1usize..9) {
            let relabel: Vec<usize> = b.iter().map(|&x| (x as usize + shift) * 3).collect();
            let (a, b, c) = (part(&a.iter().map(|&x| x as usize).collect::<Vec<_>>()),
                             part(&b.iter().map(|&x| x as usize).collect::<Vec<_>>()),
                             part(&relabel));
            prop_assert_eq!(binder_between(&a, &b).unwrap(), binder_between(&a, &c).unwrap());
            prop_assert_eq!(vi_between(&a, &b).unwrap(), vi_between(&a, &c).unwrap());
            prop_assert!((vi_between(&a, &b).unwrap() - vi_between(&b, &a).unwrap()).abs() < 1e-12);
        }
    }
}
