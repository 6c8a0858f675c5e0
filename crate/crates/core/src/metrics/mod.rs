//! Per-trip reporting errors and the descriptive summaries built on them.

mod describe;

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::ingest::{classify_respondent, DiaryRespondent};
use crate::matcher::{CardMatch, MatchResult, MatchSet, MatchStatus};
use crate::model::{Covariates, ModeCategory};

pub use describe::{describe, quantile, DescriptiveStats};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("empty sample")]
    EmptySample,
    #[error("need at least two records")]
    TooFewRecords,
    #[error("one of the series has zero variance")]
    DegenerateVariance,
}

/// Reporting error of one matched trip. Signed values are card time minus
/// diary time, so negative means the reported time was later than the tap
/// ("early" in the analysis tables).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorRecord {
    pub respondent_id: Arc<str>,
    pub trip_index: u32,
    pub signed_first: i64,
    pub signed_last: i64,
    pub abs_first: u64,
    pub abs_last: u64,
    pub mode: ModeCategory,
    pub covariates: Covariates,
}

/// One record per matched trip, taking the best card of every matched
/// respondent.
pub fn trip_errors(matches: &MatchSet, diary: &[DiaryRespondent]) -> Vec<ErrorRecord> {
    trip_errors_with(matches, diary, |m| m.best.as_ref())
}

/// Like [`trip_errors`], with the card chosen per respondent by `pick`.
pub fn trip_errors_with<'a>(
    matches: &'a MatchSet,
    diary: &[DiaryRespondent],
    pick: impl Fn(&'a MatchResult) -> Option<&'a CardMatch>,
) -> Vec<ErrorRecord> {
    let by_id: HashMap<&str, &DiaryRespondent> = diary.iter().map(|r| (&*r.respondent_id, r)).collect();
    let mut out = Vec::new();
    for m in matches.results.iter().filter(|m| m.status == MatchStatus::Matched) {
        let (Some(card), Some(r)) = (pick(m), by_id.get(&*m.respondent_id)) else {
            continue;
        };
        let Ok(mode) = classify_respondent(r) else {
            continue;
        };
        for t in &card.trips {
            out.push(ErrorRecord {
                respondent_id: m.respondent_id.clone(),
                trip_index: t.index_in_day,
                signed_first: t.signed_first,
                signed_last: t.signed_last,
                abs_first: t.signed_first.unsigned_abs(),
                abs_last: t.signed_last.unsigned_abs(),
                mode,
                covariates: r.covariates.clone(),
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QuadrantCounts {
    pub late_late: u64,
    pub early_early: u64,
    pub late_early: u64,
    pub early_late: u64,
    pub zero_first_only: u64,
    pub zero_last_only: u64,
    pub zero_both: u64,
}

impl QuadrantCounts {
    pub fn classified(&self) -> u64 {
        self.late_late + self.early_early + self.late_early + self.early_late
    }

    pub fn total(&self) -> u64 {
        self.classified() + self.zero_first_only + self.zero_last_only + self.zero_both
    }

    /// Shares of (lateLate, earlyEarly, lateEarly, earlyLate) among records
    /// with both signs nonzero.
    pub fn fractions(&self) -> Option<[f64; 4]> {
        let c = self.classified();
        (c > 0).then(|| {
            let c = c as f64;
            [
                self.late_late as f64 / c,
                self.early_early as f64 / c,
                self.late_early as f64 / c,
                self.early_late as f64 / c,
            ]
        })
    }

    /// Share of trips whose first and last stop errors have the same sign.
    pub fn consistent_fraction(&self) -> Option<f64> {
        self.fractions().map(|f| f[0] + f[1])
    }
}

pub fn quadrant_counts(records: &[ErrorRecord]) -> QuadrantCounts {
    let mut q = QuadrantCounts::default();
    for r in records {
        match (r.signed_first.signum(), r.signed_last.signum()) {
            (0, 0) => q.zero_both += 1,
            (0, _) => q.zero_first_only += 1,
            (_, 0) => q.zero_last_only += 1,
            (1, 1) => q.late_late += 1,
            (-1, -1) => q.early_early += 1,
            (1, -1) => q.late_early += 1,
            _ => q.early_late += 1,
        }
    }
    q
}

/// `(abs_first of trip 1, abs_first of trip 2)` for respondents with exactly
/// two matched trips, in respondent order.
pub fn first_second_pairs(records: &[ErrorRecord]) -> Vec<(u64, u64)> {
    let mut by_resp: BTreeMap<&str, Vec<&ErrorRecord>> = BTreeMap::new();
    for r in records {
        by_resp.entry(&r.respondent_id).or_default().push(r);
    }
    by_resp
        .into_values()
        .filter(|v| v.len() == 2)
        .map(|mut v| {
            v.sort_by_key(|r| r.trip_index);
            (v[0].abs_first, v[1].abs_first)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cutoff<T> {
    pub kept: Vec<T>,
    pub excluded: usize,
}

/// Keep values (seconds) strictly below `c_minutes`. An infinite cut-off
/// keeps everything.
pub fn apply_cutoff(values: &[u64], c_minutes: f64) -> Cutoff<u64> {
    assert!(c_minutes > 0.0, "cut-off must be positive");
    let limit = c_minutes * 60.0;
    let kept: Vec<u64> = values.iter().copied().filter(|&v| (v as f64) < limit).collect();
    Cutoff {
        excluded: values.len() - kept.len(),
        kept,
    }
}

/// Paired variant: a pair survives only if both members are below the cut-off.
pub fn apply_pair_cutoff(pairs: &[(u64, u64)], c_minutes: f64) -> Cutoff<(u64, u64)> {
    assert!(c_minutes > 0.0, "cut-off must be positive");
    let limit = c_minutes * 60.0;
    let kept: Vec<(u64, u64)> = pairs
        .iter()
        .copied()
        .filter(|&(a, b)| (a as f64) < limit && (b as f64) < limit)
        .collect();
    Cutoff {
        excluded: pairs.len() - kept.len(),
        kept,
    }
}

/// Pearson correlation of first-stop and last-stop signed errors.
pub fn signed_correlation(records: &[ErrorRecord]) -> Result<f64, MetricsError> {
    if records.len() < 2 {
        return Err(MetricsError::TooFewRecords);
    }
    let n = records.len() as f64;
    let mx = records.iter().map(|r| r.signed_first as f64).sum::<f64>() / n;
    let my = records.iter().map(|r| r.signed_last as f64).sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for r in records {
        let dx = r.signed_first as f64 - mx;
        let dy = r.signed_last as f64 - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricsError::DegenerateVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Counts per whole-minute bin; bin `k` covers `[k, k + 1)` minutes.
pub fn minute_histogram(seconds: impl IntoIterator<Item = i64>) -> BTreeMap<i64, u64> {
    let mut bins = BTreeMap::new();
    for s in seconds {
        *bins.entry(s.div_euclid(60)).or_default() += 1;
    }
    bins
}

#[cfg(test)]
mod tests;
