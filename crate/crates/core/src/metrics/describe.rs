use super::MetricsError;

/// Summary of a sample, in minutes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescriptiveStats {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation; `None` below two observations.
    pub std: Option<f64>,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub iqr: f64,
}

/// Quantile of sorted data, interpolating linearly at position 1 + (n-1)q.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "quantile of empty sample");
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Describe values given in seconds; the result is in minutes.
pub fn describe(seconds: &[f64]) -> Result<DescriptiveStats, MetricsError> {
    if seconds.is_empty() {
        return Err(MetricsError::EmptySample);
    }
    let mut v: Vec<f64> = seconds.iter().map(|s| s / 60.0).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let mean = v.iter().sum::<f64>() / n as f64;
    let std = (n >= 2).then(|| {
        let ss: f64 = v.iter().map(|x| (x - mean) * (x - mean)).sum();
        (ss / (n - 1) as f64).sqrt()
    });
    let q1 = quantile(&v, 0.25);
    let q3 = quantile(&v, 0.75);
    Ok(DescriptiveStats {
        count: n,
        mean,
        std,
        min: v[0],
        q1,
        median: quantile(&v, 0.5),
        q3,
        max: v[n - 1],
        iqr: q3 - q1,
    })
}
