//! Rank-based hypothesis tests, Shapiro-Wilk, and multiple-comparison helpers.

mod kruskal;
mod mann_whitney;
mod rank;
mod shapiro;
mod sweep;
mod wilcoxon;

use std::collections::BTreeMap;

pub use kruskal::kruskal_wallis;
pub use mann_whitney::mann_whitney_u;
pub use rank::{midrank, RankedSample};
pub use shapiro::{shapiro_wilk, SHAPIRO_MAX_N};
pub use sweep::{paired_sweep, sensitivity_sweep, Grouping, PairedRow, SweepCell, SweepGroup, SweepRow};
pub use wilcoxon::wilcoxon_signed_rank;

use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    MannWhitneyU,
    KruskalWallisH,
    WilcoxonSignedRank,
    ShapiroWilk,
}

impl Method {
    pub fn code(&self) -> &'static str {
        match self {
            Method::MannWhitneyU => "MannWhitneyU",
            Method::KruskalWallisH => "KruskalWallisH",
            Method::WilcoxonSignedRank => "WilcoxonSignedRank",
            Method::ShapiroWilk => "ShapiroWilk",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PMode {
    ExactPermutation,
    NormalApprox,
    ChiSquareApprox,
    RoystonApprox,
}

impl PMode {
    pub fn code(&self) -> &'static str {
        match self {
            PMode::ExactPermutation => "ExactPermutation",
            PMode::NormalApprox => "NormalApprox",
            PMode::ChiSquareApprox => "ChiSquareApprox",
            PMode::RoystonApprox => "RoystonApprox",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub method: Method,
    pub statistic: f64,
    pub aux: BTreeMap<&'static str, f64>,
    pub p_value: f64,
    pub mode: PMode,
    pub n: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("empty sample")]
    EmptySample,
    #[error("non-finite value at position {0}")]
    NonFiniteValue(usize),
    #[error("need at least {needed} groups, got {got}")]
    TooFewGroups { needed: usize, got: usize },
    #[error("need at least 3 observations in total")]
    TooFewObservations,
    #[error("all values identical")]
    AllValuesIdentical,
    #[error("every paired difference is zero")]
    AllZeroDifferences,
    #[error("sample size {0} outside 3..=5000")]
    SampleSizeOutOfRange(usize),
    #[error("zero variance")]
    ZeroVariance,
}

/// When exact p-values are used and whether normal approximations apply a
/// continuity correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TestPolicy {
    pub mwu_exact_max_n: usize,
    pub wilcoxon_exact_max_n: usize,
    pub continuity_correction: bool,
}

impl Default for TestPolicy {
    fn default() -> Self {
        Self {
            mwu_exact_max_n: 20,
            wilcoxon_exact_max_n: 20,
            continuity_correction: true,
        }
    }
}

/// Two-sided normal p-value for an observed `stat` with mean `mu` and
/// variance `var`; the correction shrinks the distance to the mean.
pub(crate) fn normal_two_sided(stat: f64, mu: f64, var: f64, correction: bool) -> (f64, f64) {
    if var <= 0.0 {
        return (0.0, 1.0);
    }
    let sd = var.sqrt();
    let dev = stat - mu;
    let cc = if correction { 0.5 } else { 0.0 };
    let num = (dev.abs() - cc).max(0.0);
    let z = num / sd * dev.signum();
    let p = erfc(num / sd / std::f64::consts::SQRT_2);
    (z, p.min(1.0))
}

pub(crate) fn chi2_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(df).expect("df > 0").sf(x)
}

/// Two-sided exact p from a table of null counts over an integer-valued
/// statistic: twice the smaller tail, capped at 1.
pub(crate) fn exact_two_sided(counts: &[f64], observed: usize) -> f64 {
    let total: f64 = counts.iter().sum();
    let lower: f64 = counts[..=observed].iter().sum();
    let upper: f64 = counts[observed..].iter().sum();
    (2.0 * lower.min(upper) / total).min(1.0)
}

/// Bonferroni adjustment for a family of `m` comparisons.
pub fn bonferroni(p_values: &[f64], m: usize) -> Vec<f64> {
    assert!(m >= p_values.len().max(1), "family size smaller than the number of p-values");
    p_values.iter().map(|&p| (p * m as f64).min(1.0)).collect()
}

/// Significance marker: `*` below 0.10, `**` below 0.05, `***` below 0.01.
pub fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.10 {
        "*"
    } else {
        ""
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bonferroni_examples() {
        assert!((bonferroni(&[0.01], 5)[0] - 0.05).abs() < 1e-15);
        assert_eq!(bonferroni(&[0.5], 5), [1.0]);
        assert_eq!(bonferroni(&[0.0], 7), [0.0]);
        let adj = bonferroni(&[0.001, 0.02, 0.3], 3);
        assert!(adj.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn star_thresholds() {
        assert_eq!(stars(0.058), "*");
        assert_eq!(stars(0.353), "");
        assert_eq!(stars(0.085), "*");
        assert_eq!(stars(0.015), "**");
        assert_eq!(stars(0.0), "***");
        assert_eq!(stars(0.10), "");
        assert_eq!(stars(0.05), "*");
        assert_eq!(stars(0.01), "**");
    }

    #[test]
    fn exact_tail_doubling_is_capped() {
        assert_eq!(exact_two_sided(&[1.0, 2.0, 1.0], 1), 1.0);
        assert!((exact_two_sided(&[1.0, 2.0, 1.0], 0) - 0.5).abs() < 1e-15);
    }
}
