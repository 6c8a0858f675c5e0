use super::StatsError;

#[derive(Debug, Clone, PartialEq)]
pub struct RankedSample {
    pub values: Vec<f64>,
    /// Rank of `values[i]`; ties share the mean of the ranks they span.
    pub midranks: Vec<f64>,
    /// Sizes of the tie groups with more than one member, in value order.
    pub tie_groups: Vec<usize>,
}

impl RankedSample {
    /// Σ (t³ - t) over tie groups.
    pub fn tie_term(&self) -> f64 {
        self.tie_groups
            .iter()
            .map(|&t| {
                let t = t as f64;
                t * t * t - t
            })
            .sum()
    }

    pub fn has_ties(&self) -> bool {
        !self.tie_groups.is_empty()
    }
}

pub fn midrank(values: &[f64]) -> Result<RankedSample, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(StatsError::NonFiniteValue(i));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut midranks = vec![0.0; values.len()];
    let mut tie_groups = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j, mean (i + 1 + j) / 2
        let r = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            midranks[k] = r;
        }
        if j - i > 1 {
            tie_groups.push(j - i);
        }
        i = j;
    }
    Ok(RankedSample {
        values: values.to_vec(),
        midranks,
        tie_groups,
    })
}
