use std::collections::BTreeMap;

use super::{exact_two_sided, midrank, normal_two_sided, Method, PMode, StatsError, TestPolicy, TestResult};

/// Null counts of 2·W+ over all 2^n sign assignments, given doubled ranks
/// (midranks are multiples of 0.5, so doubling keeps them integral).
fn doubled_w_null_counts(doubled_ranks: &[usize]) -> Vec<f64> {
    let total: usize = doubled_ranks.iter().sum();
    let mut counts = vec![0.0; total + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in doubled_ranks {
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    counts
}

/// Paired signed-rank test on `(first, second)` pairs, two-sided.
///
/// Differences are `second - first`; zero differences are dropped and
/// counted in `aux["zeros_dropped"]`. The statistic is W+.
pub fn wilcoxon_signed_rank(pairs: &[(f64, f64)], policy: &TestPolicy) -> Result<TestResult, StatsError> {
    if pairs.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let diffs: Vec<f64> = pairs.iter().map(|&(a, b)| b - a).filter(|d| *d != 0.0).collect();
    let zeros = pairs.len() - diffs.len();
    if diffs.is_empty() {
        return Err(StatsError::AllZeroDifferences);
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranked = midrank(&abs)?;
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranked.midranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let n = diffs.len();
    let nn = n as f64;
    let w_minus = nn * (nn + 1.0) / 2.0 - w_plus;

    let mut aux = BTreeMap::from([
        ("W+", w_plus),
        ("W-", w_minus),
        ("n_effective", nn),
        ("zeros_dropped", zeros as f64),
    ]);
    let (p, mode) = if n <= policy.wilcoxon_exact_max_n {
        let doubled: Vec<usize> = ranked.midranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let counts = doubled_w_null_counts(&doubled);
        (
            exact_two_sided(&counts, (2.0 * w_plus).round() as usize),
            PMode::ExactPermutation,
        )
    } else {
        let mu = nn * (nn + 1.0) / 4.0;
        let var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - ranked.tie_term() / 48.0;
        let (z, p) = normal_two_sided(w_plus, mu, var, policy.continuity_correction);
        aux.insert("z", z);
        (p, PMode::NormalApprox)
    };
    Ok(TestResult {
        method: Method::WilcoxonSignedRank,
        statistic: w_plus,
        aux,
        p_value: p,
        mode,
        n: vec![pairs.len()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn from_diffs(d: &[f64]) -> Vec<(f64, f64)> {
        d.iter().map(|&d| (0.0, d)).collect()
    }

    #[test]
    fn three_positive() {
        let r = wilcoxon_signed_rank(&from_diffs(&[1.0, 2.0, 3.0]), &TestPolicy::default()).unwrap();
        assert_eq!(r.statistic, 6.0);
        assert_eq!(r.mode, PMode::ExactPermutation);
        assert!((r.p_value - 0.25).abs() < 1e-12);
    }

    #[test]
    fn zeros() {
        let p = TestPolicy::default();
        assert_eq!(
            wilcoxon_signed_rank(&[(1.0, 1.0), (2.0, 2.0)], &p),
            Err(StatsError::AllZeroDifferences)
        );
        let r = wilcoxon_signed_rank(&[(1.0, 1.0), (0.0, 1.0), (0.0, 2.0)], &p).unwrap();
        assert_eq!(r.aux["zeros_dropped"], 1.0);
        assert_eq!(r.aux["n_effective"], 2.0);
    }

    #[test]
    fn ties_stay_exact() {
        let r = wilcoxon_signed_rank(&from_diffs(&[1.0, -1.0, 2.0, 2.0]), &TestPolicy::default()).unwrap();
        assert_eq!(r.mode, PMode::ExactPermutation);
        assert_eq!(r.statistic, 1.5 + 3.5 + 3.5);
    }

    #[test]
    fn large_uses_normal() {
        let d: Vec<f64> = (1..=40).map(f64::from).collect();
        let r = wilcoxon_signed_rank(&from_diffs(&d), &TestPolicy::default()).unwrap();
        assert_eq!(r.mode, PMode::NormalApprox);
        assert!(r.p_value < 1e-6);
    }

    proptest! {
        #[test]
        fn negation_swaps_w(d in proptest::collection::vec(-8i32..8, 1..30)) {
            prop_assume!(d.iter().any(|&v| v != 0));
            let d: Vec<f64> = d.into_iter().map(f64::from).collect();
            let neg: Vec<f64> = d.iter().map(|v| -v).collect();
            let p = TestPolicy::default();
            let a = wilcoxon_signed_rank(&from_diffs(&d), &p).unwrap();
            let b = wilcoxon_signed_rank(&from_diffs(&neg), &p).unwrap();
            prop_assert_eq!(a.aux["W+"], b.aux["W-"]);
            prop_assert!((a.p_value - b.p_value).abs() < 1e-12);
        }
    }
}
