//! The analysis bundle: every table the report renders, as plain data.
//!
//! Minute values are kept unrounded here; rounding to two decimals happens
//! only when rendering.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use taplink_core::ingest::{DiaryRespondent, DiaryYearRow, OdCounts, TripFrequency};
use taplink_core::matcher::{MatchRateSummary, MatchResult, MatchSet};
use taplink_core::metrics::{
    describe, first_second_pairs, minute_histogram, quadrant_counts, signed_correlation, trip_errors_with,
    DescriptiveStats, ErrorRecord,
};
use taplink_core::stats::{
    paired_sweep, sensitivity_sweep, stars, Grouping, SweepCell, SweepRow, TestPolicy,
};

use crate::config::StatsConfig;
use crate::gate::{shapiro_gate, ShapiroGate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Desc {
    pub count: usize,
    pub mean: f64,
    pub std: Option<f64>,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub iqr: f64,
}

impl From<&DescriptiveStats> for Desc {
    fn from(d: &DescriptiveStats) -> Self {
        Self {
            count: d.count,
            mean: d.mean,
            std: d.std,
            min: d.min,
            q1: d.q1,
            median: d.median,
            q3: d.q3,
            max: d.max,
            iqr: d.iqr,
        }
    }
}

fn desc_of(seconds: impl IntoIterator<Item = f64>) -> Option<Desc> {
    let v: Vec<f64> = seconds.into_iter().collect();
    describe(&v).ok().as_ref().map(Desc::from)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestEntry {
    pub method: Option<String>,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub p_bonferroni: Option<f64>,
    pub stars: String,
    pub mode: Option<String>,
    pub n: Vec<usize>,
    /// Why no test was run.
    pub insufficient: Option<String>,
}

impl TestEntry {
    fn from_cell(cell: &SweepCell, m: usize) -> Self {
        match cell {
            SweepCell::Test(t) => Self {
                method: Some(t.method.code().to_string()),
                statistic: Some(t.statistic),
                p_value: Some(t.p_value),
                p_bonferroni: Some((t.p_value * m as f64).min(1.0)),
                stars: stars(t.p_value).to_string(),
                mode: Some(t.mode.code().to_string()),
                n: t.n.clone(),
                insufficient: None,
            },
            SweepCell::Insufficient(why) => Self {
                method: None,
                statistic: None,
                p_value: None,
                p_bonferroni: None,
                stars: String::new(),
                mode: None,
                n: Vec::new(),
                insufficient: Some(why.clone()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupEntry {
    pub level: String,
    pub count: usize,
    pub stats: Option<Desc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    /// `None` for all data.
    pub cutoff_min: Option<f64>,
    pub groups: Vec<GroupEntry>,
    pub test: TestEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub grouping: String,
    pub title: String,
    pub rows: Vec<SweepEntry>,
}

fn finite(c: f64) -> Option<f64> {
    c.is_finite().then_some(c)
}

fn sweep_entry(row: &SweepRow, m: usize) -> SweepEntry {
    SweepEntry {
        cutoff_min: finite(row.cutoff_min),
        groups: row
            .groups
            .iter()
            .map(|g| GroupEntry {
                level: g.level.to_string(),
                count: g.count,
                stats: g.stats.as_ref().map(Desc::from),
            })
            .collect(),
        test: TestEntry::from_cell(&row.cell, m),
    }
}

pub fn sweep_tables(
    records: &[ErrorRecord],
    groupings: &[Grouping],
    cutoffs: &[f64],
    policy: &TestPolicy,
    m: usize,
) -> Vec<SweepTable> {
    groupings
        .iter()
        .map(|&g| SweepTable {
            grouping: g.code().to_string(),
            title: g.title().to_string(),
            rows: sensitivity_sweep(records, g, cutoffs, policy)
                .iter()
                .map(|r| sweep_entry(r, m))
                .collect(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedEntry {
    pub cutoff_min: Option<f64>,
    pub count: usize,
    pub first: Option<Desc>,
    pub second: Option<Desc>,
    pub test: TestEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadrantEntry {
    pub late_late: u64,
    pub early_early: u64,
    pub late_early: u64,
    pub early_late: u64,
    pub zero_first_only: u64,
    pub zero_last_only: u64,
    pub zero_both: u64,
    pub total: u64,
    pub consistent_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatCell {
    pub first_bin_min: i64,
    pub last_bin_min: i64,
    pub trips: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistBin {
    pub minute: i64,
    pub trips: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityEntry {
    pub variable: String,
    pub gate: Option<ShapiroGate>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverallEntry {
    pub respondents: usize,
    pub trips: usize,
    pub abs_first: Option<Desc>,
    pub abs_last: Option<Desc>,
    pub signed_first: Option<Desc>,
    pub signed_last: Option<Desc>,
    pub signed_correlation: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GapBucket {
    Unique,
    Under5,
    Under30,
    Under60,
    Over60,
}

impl GapBucket {
    pub const ALL: [GapBucket; 5] = [
        GapBucket::Unique,
        GapBucket::Under5,
        GapBucket::Under30,
        GapBucket::Under60,
        GapBucket::Over60,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            GapBucket::Unique => "Unique match",
            GapBucket::Under5 => "[0-5[",
            GapBucket::Under30 => "[5-30[",
            GapBucket::Under60 => "[30-60[",
            GapBucket::Over60 => "60+",
        }
    }

    /// Bucket of a matched respondent by the gap to the runner-up card,
    /// averaged over the 2 stops of each of its trips, in minutes.
    pub fn of(m: &MatchResult) -> Option<Self> {
        let best = m.best.as_ref()?;
        let (Some(_), Some(gap)) = (&m.second_best, m.gap_seconds) else {
            return Some(GapBucket::Unique);
        };
        let per_stop_min = gap as f64 / (2 * best.trips.len().max(1)) as f64 / 60.0;
        Some(if per_stop_min < 5.0 {
            GapBucket::Under5
        } else if per_stop_min < 30.0 {
            GapBucket::Under30
        } else if per_stop_min < 60.0 {
            GapBucket::Under60
        } else {
            GapBucket::Over60
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketRow {
    pub bucket: GapBucket,
    pub label: String,
    pub respondents: u64,
    pub percent: Option<f64>,
}

pub fn bucket_rows(counts: &BTreeMap<GapBucket, u64>) -> Vec<BucketRow> {
    let total: u64 = counts.values().sum();
    GapBucket::ALL
        .iter()
        .map(|b| {
            let n = counts.get(b).copied().unwrap_or(0);
            BucketRow {
                bucket: *b,
                label: b.label().to_string(),
                respondents: n,
                percent: (total > 0).then(|| 100.0 * n as f64 / total as f64),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianPair {
    pub grouping: String,
    pub level: String,
    pub best_median: Option<f64>,
    pub second_median: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondCardSection {
    pub buckets: Vec<BucketRow>,
    /// Respondents whose runner-up card replaced the best one.
    pub substituted: usize,
    pub two_level: Vec<SweepTable>,
    pub multi_level: Vec<SweepTable>,
    pub medians: Vec<MedianPair>,
}

fn all_data_medians(tables: &[SweepTable]) -> Vec<(String, String, Option<f64>)> {
    tables
        .iter()
        .filter_map(|t| t.rows.iter().find(|r| r.cutoff_min.is_none()).map(|r| (t, r)))
        .flat_map(|(t, r)| {
            r.groups
                .iter()
                .map(|g| (t.grouping.clone(), g.level.clone(), g.stats.as_ref().map(|s| s.median)))
        })
        .collect()
}

/// Re-run the group comparisons with the runner-up card for respondents
/// whose best match is ambiguous (the `[0-5[` bucket), side by side with the
/// best-card results.
pub fn second_card_analysis(
    matches: &MatchSet,
    diary: &[DiaryRespondent],
    best: (&[SweepTable], &[SweepTable]),
    stats: &StatsConfig,
) -> SecondCardSection {
    let mut counts: BTreeMap<GapBucket, u64> = BTreeMap::new();
    for m in &matches.results {
        if let Some(b) = GapBucket::of(m) {
            *counts.entry(b).or_default() += 1;
        }
    }
    let swap = |m: &MatchResult| GapBucket::of(m) == Some(GapBucket::Under5);
    let substituted = matches.results.iter().filter(|m| swap(m)).count();
    let records = trip_errors_with(matches, diary, |m| {
        if swap(m) {
            m.second_best.as_ref()
        } else {
            m.best.as_ref()
        }
    });
    let policy = stats.policy();
    let m = stats.bonferroni_m();
    let two_level = sweep_tables(&records, &Grouping::TWO_LEVEL, &stats.cutoffs_min, &policy, m);
    let multi_level = sweep_tables(&records, &Grouping::MULTI_LEVEL, &stats.cutoffs_min, &policy, m);

    let mut before = all_data_medians(best.0);
    before.extend(all_data_medians(best.1));
    let mut after = all_data_medians(&two_level);
    after.extend(all_data_medians(&multi_level));
    let mut medians: Vec<MedianPair> = before
        .into_iter()
        .map(|(grouping, level, best_median)| MedianPair {
            grouping,
            level,
            best_median,
            second_median: None,
        })
        .collect();
    for (g, l, v) in after {
        match medians.iter_mut().find(|p| p.grouping == g && p.level == l) {
            Some(p) => p.second_median = v,
            None => medians.push(MedianPair {
                grouping: g,
                level: l,
                best_median: None,
                second_median: v,
            }),
        }
    }
    SecondCardSection {
        buckets: bucket_rows(&counts),
        substituted,
        two_level,
        multi_level,
        medians,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    /// `None` on the total row.
    pub year: Option<i32>,
    pub eligible: u64,
    pub matched: u64,
    pub percent: Option<f64>,
}

pub fn rate_rows(s: &MatchRateSummary) -> Vec<RateRow> {
    s.by_year
        .iter()
        .chain(std::iter::once(&s.total))
        .map(|r| RateRow {
            year: r.year,
            eligible: r.eligible,
            matched: r.matched,
            percent: r.percent(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayFrequency {
    pub day: String,
    pub buckets: [u64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardFrequency {
    /// Card-days with 1, 2, 3 and 4+ journeys, pooled over all days.
    pub pooled: [u64; 4],
    pub by_day: Vec<DayFrequency>,
    /// Unweighted mean over days of the per-day counts.
    pub average_day: Option<[f64; 4]>,
}

impl CardFrequency {
    pub fn new(pooled: TripFrequency, by_day: &BTreeMap<chrono::NaiveDate, TripFrequency>) -> Self {
        let days: Vec<DayFrequency> = by_day
            .iter()
            .map(|(d, f)| DayFrequency {
                day: d.format("%Y-%m-%d").to_string(),
                buckets: f.buckets,
            })
            .collect();
        let average_day = (!days.is_empty()).then(|| {
            let mut avg = [0.0; 4];
            for d in &days {
                for (a, &b) in avg.iter_mut().zip(&d.buckets) {
                    *a += b as f64;
                }
            }
            avg.map(|a| a / days.len() as f64)
        });
        Self {
            pooled: pooled.buckets,
            by_day: days,
            average_day,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdEntry {
    pub od_days: usize,
    pub journeys: u64,
    pub mean: f64,
    pub median: f64,
    pub std: f64,
}

impl OdEntry {
    pub fn new(od: &OdCounts) -> Option<Self> {
        od.summary.map(|s| Self {
            od_days: s.n,
            journeys: od.counts.values().sum(),
            mean: s.mean,
            median: s.median,
            std: s.std,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiaryYearEntry {
    pub year: i32,
    pub respondents: u64,
    pub trips: u64,
    pub by_trip_count: [u64; 4],
}

impl From<&DiaryYearRow> for DiaryYearEntry {
    fn from(r: &DiaryYearRow) -> Self {
        Self {
            year: r.year,
            respondents: r.respondents,
            trips: r.trips,
            by_trip_count: r.by_trip_count,
        }
    }
}

/// Match-stage facts the analysis cannot recover from `matches.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub transactions: usize,
    pub transactions_rejected: usize,
    pub journeys: usize,
    pub orphan_taps: usize,
    pub respondents: usize,
    pub respondents_rejected: usize,
    pub eligible: usize,
    pub match_rates: Vec<RateRow>,
    pub card_frequency: CardFrequency,
    pub od: Option<OdEntry>,
    pub diary_years: Vec<DiaryYearEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub ingest: Option<IngestSummary>,
    pub cutoffs_min: Vec<Option<f64>>,
    pub bonferroni_m: usize,
    pub overall: OverallEntry,
    pub normality: Vec<NormalityEntry>,
    pub two_level: Vec<SweepTable>,
    pub multi_level: Vec<SweepTable>,
    pub paired: Vec<PairedEntry>,
    pub quadrants: QuadrantEntry,
    pub heatmap: Vec<HeatCell>,
    pub histogram_first: Vec<HistBin>,
    pub histogram_last: Vec<HistBin>,
    pub second_card: SecondCardSection,
}

/// Heat-map bin edge in minutes; errors beyond an hour share the edge bins.
const HEAT_BIN_MIN: i64 = 5;
const HEAT_RANGE_MIN: i64 = 60;

fn heat_bin(signed_s: i64) -> i64 {
    let lim = HEAT_RANGE_MIN / HEAT_BIN_MIN;
    signed_s.div_euclid(HEAT_BIN_MIN * 60).clamp(-lim, lim - 1) * HEAT_BIN_MIN
}

fn histogram(values: impl IntoIterator<Item = i64>) -> Vec<HistBin> {
    minute_histogram(values)
        .into_iter()
        .map(|(minute, trips)| HistBin { minute, trips })
        .collect()
}

pub fn build_bundle(
    matches: &MatchSet,
    diary: &[DiaryRespondent],
    records: &[ErrorRecord],
    stats: &StatsConfig,
    ingest: Option<IngestSummary>,
) -> ReportBundle {
    let policy = stats.policy();
    let m = stats.bonferroni_m();
    let cutoffs = &stats.cutoffs_min;

    let two_level = sweep_tables(records, &Grouping::TWO_LEVEL, cutoffs, &policy, m);
    let multi_level = sweep_tables(records, &Grouping::MULTI_LEVEL, cutoffs, &policy, m);
    let paired = paired_sweep(&first_second_pairs(records), cutoffs, &policy)
        .iter()
        .map(|r| PairedEntry {
            cutoff_min: finite(r.cutoff_min),
            count: r.count,
            first: r.first.as_ref().map(Desc::from),
            second: r.second.as_ref().map(Desc::from),
            test: TestEntry::from_cell(&r.cell, m),
        })
        .collect();

    let q = quadrant_counts(records);
    let quadrants = QuadrantEntry {
        late_late: q.late_late,
        early_early: q.early_early,
        late_early: q.late_early,
        early_late: q.early_late,
        zero_first_only: q.zero_first_only,
        zero_last_only: q.zero_last_only,
        zero_both: q.zero_both,
        total: q.total(),
        consistent_fraction: q.consistent_fraction(),
    };

    let mut heat: BTreeMap<(i64, i64), u64> = BTreeMap::new();
    for r in records {
        *heat.entry((heat_bin(r.signed_first), heat_bin(r.signed_last))).or_default() += 1;
    }
    let heatmap = heat
        .into_iter()
        .map(|((f, l), trips)| HeatCell {
            first_bin_min: f,
            last_bin_min: l,
            trips,
        })
        .collect();

    let series: [(&str, Vec<f64>); 4] = [
        ("abs_first", records.iter().map(|r| r.abs_first as f64).collect()),
        ("abs_last", records.iter().map(|r| r.abs_last as f64).collect()),
        ("signed_first", records.iter().map(|r| r.signed_first as f64).collect()),
        ("signed_last", records.iter().map(|r| r.signed_last as f64).collect()),
    ];
    let normality = series
        .iter()
        .map(|(name, v)| match shapiro_gate(v, stats.shapiro_threshold, stats.shapiro_subsample_seed) {
            Ok(g) => NormalityEntry {
                variable: name.to_string(),
                gate: Some(g),
                error: None,
            },
            Err(e) => NormalityEntry {
                variable: name.to_string(),
                gate: None,
                error: Some(e.to_string()),
            },
        })
        .collect();

    let mut respondents: Vec<&str> = records.iter().map(|r| &*r.respondent_id).collect();
    respondents.dedup();
    let overall = OverallEntry {
        respondents: respondents.len(),
        trips: records.len(),
        abs_first: desc_of(series[0].1.iter().copied()),
        abs_last: desc_of(series[1].1.iter().copied()),
        signed_first: desc_of(series[2].1.iter().copied()),
        signed_last: desc_of(series[3].1.iter().copied()),
        signed_correlation: signed_correlation(records).ok(),
    };

    let second_card = second_card_analysis(matches, diary, (&two_level, &multi_level), stats);
    ReportBundle {
        ingest,
        cutoffs_min: cutoffs.iter().map(|&c| finite(c)).collect(),
        bonferroni_m: m,
        overall,
        normality,
        two_level,
        multi_level,
        paired,
        quadrants,
        heatmap,
        histogram_first: histogram(records.iter().map(|r| r.signed_first)),
        histogram_last: histogram(records.iter().map(|r| r.signed_last)),
        second_card,
    }
}
