use std::collections::BTreeMap;

use super::{chi2_sf, midrank, Method, PMode, StatsError, TestResult};

/// Kruskal-Wallis H with tie correction; p from chi-square on k - 1 df.
pub fn kruskal_wallis(groups: &[&[f64]]) -> Result<TestResult, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups {
            needed: 2,
            got: groups.len(),
        });
    }
    if groups.iter().any(|g| g.is_empty()) {
        return Err(StatsError::EmptySample);
    }
    let all: Vec<f64> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    let n = all.len();
    if n < 3 {
        return Err(StatsError::TooFewObservations);
    }
    let ranked = midrank(&all)?;
    let nn = n as f64;
    let divisor = 1.0 - ranked.tie_term() / (nn * nn * nn - nn);
    if divisor <= 0.0 {
        return Err(StatsError::AllValuesIdentical);
    }

    // centred form; the expanded sum(R^2/n) - 3(N+1) cancels badly near zero
    let mean_rank = (nn + 1.0) / 2.0;
    let mut offset = 0;
    let mut sum_sq = 0.0;
    for g in groups {
        let r: f64 = ranked.midranks[offset..offset + g.len()].iter().sum();
        let d = r / g.len() as f64 - mean_rank;
        sum_sq += g.len() as f64 * d * d;
        offset += g.len();
    }
    let h_raw = 12.0 / (nn * (nn + 1.0)) * sum_sq;
    let h = h_raw / divisor;
    let df = (groups.len() - 1) as f64;
    Ok(TestResult {
        method: Method::KruskalWallisH,
        statistic: h,
        aux: BTreeMap::from([("H", h), ("df", df), ("tie_divisor", divisor)]),
        p_value: chi2_sf(h, df).clamp(0.0, 1.0),
        mode: PMode::ChiSquareApprox,
        n: groups.iter().map(|g| g.len()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_pairs() {
        // rank sums 3, 7, 11: 12/42 * (9 + 49 + 121)/2 - 21 = 32/7
        let r = kruskal_wallis(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]).unwrap();
        assert!((r.statistic - 32.0 / 7.0).abs() < 1e-12);
        assert_eq!(r.aux["df"], 2.0);
        assert!((r.p_value - (-16.0f64 / 7.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn permutation_check_of_three_pairs() {
        // share of the 90 distinct labelings with H at least as large
        let values = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let observed = kruskal_wallis(&[&values[..2], &values[2..4], &values[4..]]).unwrap().statistic;
        let mut total = 0;
        let mut extreme = 0;
        let mut idx: Vec<usize> = (0..6).collect();
        permute(&mut idx, 0, &mut |p| {
            if p[0] < p[1] && p[2] < p[3] && p[4] < p[5] {
                let g = |a: usize, b: usize| [values[p[a]], values[p[b]]];
                let (a, b, c) = (g(0, 1), g(2, 3), g(4, 5));
                let h = kruskal_wallis(&[&a, &b, &c]).unwrap().statistic;
                total += 1;
                if h >= observed - 1e-12 {
                    extreme += 1;
                }
            }
        });
        assert_eq!(total, 90);
        // only the 6 fully separated labelings reach 32/7
        assert_eq!(extreme, 6);
    }

    fn permute(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k == v.len() {
            f(v);
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            permute(v, k + 1, f);
            v.swap(k, i);
        }
    }

    #[test]
    fn identical_values() {
        assert_eq!(
            kruskal_wallis(&[&[2.0, 2.0], &[2.0]]),
            Err(StatsError::AllValuesIdentical)
        );
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(kruskal_wallis(&[&[1.0, 2.0]]), Err(StatsError::TooFewGroups { .. })));
        assert_eq!(kruskal_wallis(&[&[1.0], &[]]), Err(StatsError::EmptySample));
        assert_eq!(kruskal_wallis(&[&[1.0], &[2.0]]), Err(StatsError::TooFewObservations));
    }
}
