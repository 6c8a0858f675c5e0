use std::collections::BTreeMap;

use super::{exact_two_sided, midrank, normal_two_sided, Method, PMode, StatsError, TestPolicy, TestResult};

/// Null distribution of U for sample sizes (m, n): `counts[u]` is the number
/// of group labelings with that U. Uses the recurrence over whether the
/// largest observation belongs to the first sample.
pub(crate) fn u_null_counts(m: usize, n: usize) -> Vec<f64> {
    // table[j] holds counts for (i, j) while sweeping i upward
    let mut table: Vec<Vec<f64>> = (0..=n).map(|_| vec![1.0]).collect();
    for i in 1..=m {
        let mut next: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        next.push(vec![1.0]);
        for j in 1..=n {
            let mut c = vec![0.0; i * j + 1];
            // largest value in first sample: it beats all j values of the second
            for (u, &v) in table[j].iter().enumerate() {
                c[u + j] += v;
            }
            // largest value in second sample
            for (u, &v) in next[j - 1].iter().enumerate() {
                c[u] += v;
            }
            next.push(c);
        }
        table = next;
    }
    table.pop().expect("n + 1 entries")
}

/// Two-sample Wilcoxon rank-sum / Mann-Whitney U test, two-sided.
///
/// The reported statistic is U for `x`. Exact p-values are used for tie-free
/// data with combined size at most `policy.mwu_exact_max_n`; otherwise the
/// normal approximation with tie-corrected variance.
pub fn mann_whitney_u(x: &[f64], y: &[f64], policy: &TestPolicy) -> Result<TestResult, StatsError> {
    if x.is_empty() || y.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let (nx, ny) = (x.len(), y.len());
    let all: Vec<f64> = x.iter().chain(y).copied().collect();
    let ranked = midrank(&all)?;
    let rx: f64 = ranked.midranks[..nx].iter().sum();
    let u1 = rx - (nx * (nx + 1)) as f64 / 2.0;
    let u2 = (nx * ny) as f64 - u1;

    let mut aux = BTreeMap::from([("U1", u1), ("U2", u2), ("R1", rx)]);
    let n_total = nx + ny;
    let (p, mode) = if !ranked.has_ties() && n_total <= policy.mwu_exact_max_n {
        let counts = u_null_counts(nx, ny);
        (exact_two_sided(&counts, u1.round() as usize), PMode::ExactPermutation)
    } else {
        let nn = n_total as f64;
        let mu = (nx * ny) as f64 / 2.0;
        let var = (nx * ny) as f64 / 12.0 * ((nn + 1.0) - ranked.tie_term() / (nn * (nn - 1.0)));
        let (z, p) = normal_two_sided(u1, mu, var, policy.continuity_correction);
        aux.insert("z", z);
        (p, PMode::NormalApprox)
    };
    Ok(TestResult {
        method: Method::MannWhitneyU,
        statistic: u1,
        aux,
        p_value: p,
        mode,
        n: vec![nx, ny],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn binom(n: usize, k: usize) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn separated_samples() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &TestPolicy::default()).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.mode, PMode::ExactPermutation);
        assert!((r.p_value - 0.1).abs() < 1e-12);
    }

    #[test]
    fn null_counts_total_is_binomial() {
        for (m, n) in [(1, 1), (3, 4), (7, 7), (10, 10)] {
            let c = u_null_counts(m, n);
            assert_eq!(c.len(), m * n + 1);
            assert_eq!(c.iter().sum::<f64>(), binom(m + n, m));
            assert!(c.iter().zip(c.iter().rev()).all(|(a, b)| a == b));
        }
    }

    #[test]
    fn same_multiset_is_not_significant() {
        let x = [1.0, 2.0, 2.0, 5.0];
        let r = mann_whitney_u(&x, &x, &TestPolicy::default()).unwrap();
        assert!(r.p_value >= 0.99);
    }

    #[test]
    fn empty_sample() {
        assert_eq!(
            mann_whitney_u(&[], &[1.0], &TestPolicy::default()),
            Err(StatsError::EmptySample)
        );
    }

    #[test]
    fn large_samples_use_normal_approx() {
        let x: Vec<f64> = (0..30).map(f64::from).collect();
        let y: Vec<f64> = (10..40).map(f64::from).collect();
        let r = mann_whitney_u(&x, &y, &TestPolicy::default()).unwrap();
        assert_eq!(r.mode, PMode::NormalApprox);
        assert!(r.p_value < 0.01);
        assert!(r.aux["z"] < 0.0);
    }

    fn distinct_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..12, 1usize..12).prop_flat_map(|(nx, ny)| {
            Just((0..(nx + ny) as i32).collect::<Vec<_>>())
                .prop_shuffle()
                .prop_map(move |v| {
                    let v: Vec<f64> = v.into_iter().map(|i| f64::from(i) * 1.5).collect();
                    (v[..nx].to_vec(), v[nx..].to_vec())
                })
        })
    }

    proptest! {
        #[test]
        fn u1_plus_u2(x in proptest::collection::vec(0i32..20, 1..15), y in proptest::collection::vec(0i32..20, 1..15)) {
            let x: Vec<f64> = x.into_iter().map(f64::from).collect();
            let y: Vec<f64> = y.into_iter().map(f64::from).collect();
            let r = mann_whitney_u(&x, &y, &TestPolicy::default()).unwrap();
            prop_assert_eq!(r.aux["U1"] + r.aux["U2"], (x.len() * y.len()) as f64);
            prop_assert!((0.0..=1.0).contains(&r.p_value));
        }

        #[test]
        fn swap_symmetry((x, y) in distinct_pair()) {
            let p = TestPolicy::default();
            let a = mann_whitney_u(&x, &y, &p).unwrap();
            let b = mann_whitney_u(&y, &x, &p).unwrap();
            prop_assert!((a.p_value - b.p_value).abs() < 1e-12);
        }

        #[test]
        fn increasing_transform_invariance((x, y) in distinct_pair()) {
            let p = TestPolicy { mwu_exact_max_n: 10, ..TestPolicy::default() };
            let f = |v: &[f64]| v.iter().map(|t| (t * 0.3).exp() + 2.0 * t).collect::<Vec<_>>();
            let a = mann_whitney_u(&x, &y, &p).unwrap();
            let b = mann_whitney_u(&f(&x), &f(&y), &p).unwrap();
            prop_assert_eq!(a.statistic, b.statistic);
            prop_assert_eq!(a.p_value, b.p_value);
        }
    }
}
