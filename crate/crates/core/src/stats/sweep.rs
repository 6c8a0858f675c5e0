use std::borrow::Cow;
use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::metrics::{apply_cutoff, apply_pair_cutoff, describe, DescriptiveStats, ErrorRecord};
use crate::model::{DayType1, DayType2, FamilyPosition, Gender, InterviewType, ModeCategory, Region, ScheduleFlexibility};

use super::{kruskal_wallis, mann_whitney_u, wilcoxon_signed_rank, StatsError, TestPolicy, TestResult};

/// Covariate used to split error records into comparison groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Grouping {
    Gender,
    DayType1,
    DayType2,
    Interview,
    Schedule,
    Region,
    Mode,
    Year,
    FamilyPosition,
}

impl Grouping {
    pub const TWO_LEVEL: [Grouping; 6] = [
        Grouping::Gender,
        Grouping::DayType1,
        Grouping::DayType2,
        Grouping::Interview,
        Grouping::Schedule,
        Grouping::Region,
    ];
    pub const MULTI_LEVEL: [Grouping; 3] = [Grouping::Mode, Grouping::Year, Grouping::FamilyPosition];

    pub fn code(&self) -> &'static str {
        match self {
            Grouping::Gender => "gender",
            Grouping::DayType1 => "day_type1",
            Grouping::DayType2 => "day_type2",
            Grouping::Interview => "interview",
            Grouping::Schedule => "schedule",
            Grouping::Region => "region",
            Grouping::Mode => "mode",
            Grouping::Year => "year",
            Grouping::FamilyPosition => "family_position",
        }
    }

    pub fn title(&self) -> &'static str {
        match self {
            Grouping::Gender => "Gender",
            Grouping::DayType1 => "Day Type 1",
            Grouping::DayType2 => "Day Type 2",
            Grouping::Interview => "Interview Type",
            Grouping::Schedule => "Schedule Flexibility",
            Grouping::Region => "Location",
            Grouping::Mode => "Mode",
            Grouping::Year => "Year",
            Grouping::FamilyPosition => "Position in family",
        }
    }

    /// Display label of a record's level, or `None` when the record does not
    /// take part in this comparison (unknown lookup, `Other` interviews).
    pub fn level_of(&self, r: &ErrorRecord) -> Option<Cow<'static, str>> {
        let c = &r.covariates;
        let s: &'static str = match self {
            Grouping::Gender => match c.gender {
                Gender::Male => "Male",
                Gender::Female => "Female",
            },
            Grouping::DayType1 => match c.day_type1 {
                DayType1::Weekday => "Weekdays",
                DayType1::Weekend => "Weekends",
            },
            Grouping::DayType2 => match c.day_type2 {
                DayType2::NormalWeekday => "Weekdays",
                DayType2::WeekendOrHoliday => "Weekends & Holidays",
            },
            Grouping::Interview => match c.interview {
                InterviewType::Internet => "Internet",
                InterviewType::Telephone => "Telephone",
                InterviewType::Other => return None,
            },
            Grouping::Schedule => match c.schedule? {
                ScheduleFlexibility::Fixed => "Fixed",
                ScheduleFlexibility::Flexible => "Flexible",
            },
            Grouping::Region => match c.region? {
                Region::ZealandFunen => "Zealand & Funen",
                Region::Jutland => "Jutland",
            },
            Grouping::Mode => match r.mode {
                ModeCategory::TrainOnly => "Train",
                ModeCategory::BusOnly => "Bus",
                ModeCategory::Mixed => "Mixed",
            },
            Grouping::Year => return Some(Cow::Owned(c.year.to_string())),
            Grouping::FamilyPosition => match c.family_position {
                FamilyPosition::Single => "Single",
                FamilyPosition::OlderInCouple => "Older in Couple",
                FamilyPosition::YoungerInCouple => "Younger in Couple",
                FamilyPosition::ChildUnder25 => "Child < 25 years",
            },
        };
        Some(Cow::Borrowed(s))
    }

    /// Levels in table order. Fixed for categorical covariates; for years,
    /// the years present in `records`.
    pub fn levels(&self, records: &[ErrorRecord]) -> Vec<Cow<'static, str>> {
        let fixed: &[&'static str] = match self {
            Grouping::Gender => &["Male", "Female"],
            Grouping::DayType1 => &["Weekdays", "Weekends"],
            Grouping::DayType2 => &["Weekdays", "Weekends & Holidays"],
            Grouping::Interview => &["Internet", "Telephone"],
            Grouping::Schedule => &["Fixed", "Flexible"],
            Grouping::Region => &["Zealand & Funen", "Jutland"],
            Grouping::Mode => &["Train", "Bus", "Mixed"],
            Grouping::FamilyPosition => &["Single", "Older in Couple", "Younger in Couple", "Child < 25 years"],
            Grouping::Year => {
                let years: BTreeSet<i32> = records.iter().map(|r| r.covariates.year).collect();
                return years.into_iter().map(|y| Cow::Owned(y.to_string())).collect();
            }
        };
        fixed.iter().map(|s| Cow::Borrowed(*s)).collect()
    }

    /// Absolute first-stop errors (seconds) per level, in [`Self::levels`] order.
    pub fn split(&self, records: &[ErrorRecord]) -> Vec<(Cow<'static, str>, Vec<u64>)> {
        let mut out: Vec<(Cow<'static, str>, Vec<u64>)> =
            self.levels(records).into_iter().map(|l| (l, Vec::new())).collect();
        for r in records {
            if let Some(level) = self.level_of(r) {
                if let Some(slot) = out.iter_mut().find(|(l, _)| *l == level) {
                    slot.1.push(r.abs_first);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGroup {
    pub level: Cow<'static, str>,
    pub count: usize,
    /// `None` when no record of this level survives the cut-off.
    pub stats: Option<DescriptiveStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepCell {
    Test(TestResult),
    Insufficient(String),
}

impl SweepCell {
    pub fn p_value(&self) -> Option<f64> {
        match self {
            SweepCell::Test(t) => Some(t.p_value),
            SweepCell::Insufficient(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Cut-off in minutes; infinite for "all data".
    pub cutoff_min: f64,
    pub groups: Vec<SweepGroup>,
    pub cell: SweepCell,
}

fn describe_u64(v: &[u64]) -> Option<DescriptiveStats> {
    let f: Vec<f64> = v.iter().map(|&s| s as f64).collect();
    describe(&f).ok()
}

fn to_f64(v: &[u64]) -> Vec<f64> {
    v.iter().map(|&s| s as f64).collect()
}

fn insufficient(e: StatsError) -> SweepCell {
    SweepCell::Insufficient(e.to_string())
}

/// Group test at each cut-off: Mann-Whitney for two levels, Kruskal-Wallis
/// for more. Empty groups and degenerate samples produce an
/// [`SweepCell::Insufficient`] marker instead of an error.
pub fn sensitivity_sweep(
    records: &[ErrorRecord],
    grouping: Grouping,
    cutoffs_min: &[f64],
    policy: &TestPolicy,
) -> Vec<SweepRow> {
    let split = grouping.split(records);
    cutoffs_min
        .par_iter()
        .map(|&c| {
            let kept: Vec<(Cow<'static, str>, Vec<u64>)> = split
                .iter()
                .map(|(l, v)| (l.clone(), if c.is_finite() { apply_cutoff(v, c).kept } else { v.clone() }))
                .collect();
            let groups = kept
                .iter()
                .map(|(l, v)| SweepGroup {
                    level: l.clone(),
                    count: v.len(),
                    stats: describe_u64(v),
                })
                .collect();
            let cell = if kept.len() < 2 {
                SweepCell::Insufficient(format!("{} level(s)", kept.len()))
            } else if let Some((l, _)) = kept.iter().find(|(_, v)| v.is_empty()) {
                SweepCell::Insufficient(format!("no records for {l}"))
            } else if kept.len() == 2 {
                mann_whitney_u(&to_f64(&kept[0].1), &to_f64(&kept[1].1), policy)
                    .map_or_else(insufficient, SweepCell::Test)
            } else {
                let samples: Vec<Vec<f64>> = kept.iter().map(|(_, v)| to_f64(v)).collect();
                let refs: Vec<&[f64]> = samples.iter().map(Vec::as_slice).collect();
                kruskal_wallis(&refs).map_or_else(insufficient, SweepCell::Test)
            };
            SweepRow {
                cutoff_min: c,
                groups,
                cell,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairedRow {
    pub cutoff_min: f64,
    pub count: usize,
    pub first: Option<DescriptiveStats>,
    pub second: Option<DescriptiveStats>,
    pub cell: SweepCell,
}

/// Signed-rank test of first against second trip at each cut-off; a pair
/// is kept only if both of its errors are below the cut-off.
pub fn paired_sweep(pairs: &[(u64, u64)], cutoffs_min: &[f64], policy: &TestPolicy) -> Vec<PairedRow> {
    cutoffs_min
        .par_iter()
        .map(|&c| {
            let kept = if c.is_finite() {
                apply_pair_cutoff(pairs, c).kept
            } else {
                pairs.to_vec()
            };
            let first: Vec<u64> = kept.iter().map(|p| p.0).collect();
            let second: Vec<u64> = kept.iter().map(|p| p.1).collect();
            let fp: Vec<(f64, f64)> = kept.iter().map(|&(a, b)| (a as f64, b as f64)).collect();
            PairedRow {
                cutoff_min: c,
                count: kept.len(),
                first: describe_u64(&first),
                second: describe_u64(&second),
                cell: wilcoxon_signed_rank(&fp, policy).map_or_else(insufficient, SweepCell::Test),
            }
        })
        .collect()
}
