use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use taplink_core::stats::{shapiro_wilk, StatsError, SHAPIRO_MAX_N};

/// Normality verdict for one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapiroGate {
    pub n: usize,
    /// Sample size actually tested; below `n` when subsampled.
    pub tested_n: usize,
    pub w: f64,
    pub p_value: f64,
    pub threshold: f64,
    pub non_normal: bool,
}

impl ShapiroGate {
    pub fn verdict(&self) -> &'static str {
        if self.non_normal {
            "non-normal"
        } else {
            "normal not rejected"
        }
    }
}

/// Shapiro-Wilk with a fixed threshold. Samples above the test's size limit
/// are reduced to a seeded random subsample first.
pub fn shapiro_gate(values: &[f64], threshold: f64, seed: u64) -> Result<ShapiroGate, StatsError> {
    let tested: Vec<f64> = if values.len() > SHAPIRO_MAX_N {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = sample(&mut rng, values.len(), SHAPIRO_MAX_N).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| values[i]).collect()
    } else {
        values.to_vec()
    };
    let r = shapiro_wilk(&tested)?;
    Ok(ShapiroGate {
        n: values.len(),
        tested_n: tested.len(),
        w: r.statistic,
        p_value: r.p_value,
        threshold,
        non_normal: r.p_value < threshold,
    })
}
