use std::collections::{BTreeMap, HashMap};

use chrono::{Datelike, NaiveDate};

use crate::model::EndpointKey;

use super::{DiaryRespondent, Journey};

/// Number of (card, day) pairs with 1, 2, 3 and 4+ journeys.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TripFrequency {
    pub buckets: [u64; 4],
}

impl TripFrequency {
    fn add(&mut self, journeys: usize) {
        if journeys > 0 {
            self.buckets[journeys.min(4) - 1] += 1;
        }
    }

    pub fn total(&self) -> u64 {
        self.buckets.iter().sum()
    }
}

fn journeys_per_card_day(journeys: &[Journey]) -> HashMap<(&str, NaiveDate), usize> {
    let mut counts: HashMap<(&str, NaiveDate), usize> = HashMap::new();
    for j in journeys {
        *counts.entry((&*j.card_id, j.service_day)).or_default() += 1;
    }
    counts
}

pub fn card_trip_frequency(journeys: &[Journey]) -> TripFrequency {
    let mut f = TripFrequency::default();
    for n in journeys_per_card_day(journeys).into_values() {
        f.add(n);
    }
    f
}

pub fn card_trip_frequency_by_day(journeys: &[Journey]) -> BTreeMap<NaiveDate, TripFrequency> {
    let mut out: BTreeMap<NaiveDate, TripFrequency> = BTreeMap::new();
    for ((_, day), n) in journeys_per_card_day(journeys) {
        out.entry(day).or_default().add(n);
    }
    out
}

/// Mean, median and population standard deviation of a set of counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountSummary {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub std: f64,
}

impl CountSummary {
    pub fn of(values: &[u64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_unstable();
        let n = v.len();
        let sum: u64 = v.iter().sum();
        let mean = sum as f64 / n as f64;
        let median = if n % 2 == 1 {
            v[n / 2] as f64
        } else {
            (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
        };
        let var = v.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / n as f64;
        Some(Self {
            n,
            mean,
            median,
            std: var.sqrt(),
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct OdCounts {
    pub counts: BTreeMap<(EndpointKey, EndpointKey, NaiveDate), u64>,
    /// `None` when there are no journeys.
    pub summary: Option<CountSummary>,
}

pub fn od_daily_counts(journeys: &[Journey]) -> OdCounts {
    let mut counts: BTreeMap<(EndpointKey, EndpointKey, NaiveDate), u64> = BTreeMap::new();
    for j in journeys {
        *counts
            .entry((j.first_endpoint.clone(), j.last_endpoint.clone(), j.service_day))
            .or_default() += 1;
    }
    let values: Vec<u64> = counts.values().copied().collect();
    OdCounts {
        summary: CountSummary::of(&values),
        counts,
    }
}

/// Per-year diary composition: reported trips, respondents, and respondents
/// by trips reported that day.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiaryYearRow {
    pub year: i32,
    pub trips: u64,
    pub respondents: u64,
    pub by_trip_count: [u64; 4],
}

pub fn diary_year_summary(respondents: &[DiaryRespondent]) -> Vec<DiaryYearRow> {
    let mut by_year: BTreeMap<i32, DiaryYearRow> = BTreeMap::new();
    for r in respondents {
        let year = r.day.year();
        let row = by_year.entry(year).or_insert_with(|| DiaryYearRow {
            year,
            ..Default::default()
        });
        row.trips += r.trips.len() as u64;
        row.respondents += 1;
        if !r.trips.is_empty() {
            row.by_trip_count[r.trips.len().min(4) - 1] += 1;
        }
    }
    by_year.into_values().collect()
}
