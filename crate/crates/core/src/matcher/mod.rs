//! Linking diary respondents to smart-card records.
//!
//! Each respondent's trips are turned into [`TripMatchSpec`]s, candidate cards
//! are pulled from the [`CandidateIndex`], and every candidate is scored by
//! the cheapest order-preserving assignment of trips to that card's journeys.

mod index;
mod spec;

use std::borrow::Borrow;
use std::collections::BTreeMap;
use std::sync::Arc;

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;

use crate::ingest::{classify_respondent, DiaryRespondent, Journey, JourneyId};
use crate::model::AliasTable;

pub use index::CandidateIndex;
pub use spec::{trip_spec, FirstSemantics, LastSemantics, SpecError, TripMatchSpec};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MatchOptions {
    /// Optional prefilter: a journey can only stand in for a trip whose
    /// reported start is within this many seconds of its tap-in.
    pub time_window_s: Option<u64>,
}

/// Cheapest assignment of a respondent's trips to one card's journeys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub journeys: Vec<JourneyId>,
    /// Signed (card - diary) differences at the first and last stop.
    pub deltas: Vec<(i64, i64)>,
    pub total_delta_t: u64,
}

fn feasible(spec: &TripMatchSpec, j: &Journey, opts: MatchOptions) -> bool {
    j.service_day == spec.day
        && j.first_endpoint == spec.first_key
        && j.last_endpoint == spec.last_key
        && opts
            .time_window_s
            .is_none_or(|w| j.tap_in_time.abs_diff_seconds(&spec.first_ref_time) <= w)
}

fn cost(spec: &TripMatchSpec, j: &Journey) -> u64 {
    j.tap_in_time.abs_diff_seconds(&spec.first_ref_time)
        + j.tap_out_time.abs_diff_seconds(&spec.last_ref_time)
}

pub fn score_assignment<J: Borrow<Journey>>(specs: &[TripMatchSpec], journeys: &[J]) -> Option<Assignment> {
    score_assignment_with(specs, journeys, MatchOptions::default())
}

/// `best[i][j]` is the cheapest way to place trips `i..` on journeys `j..`.
/// On equal cost the DP takes the journey rather than skipping it, which
/// yields the lexicographically earliest journey sequence among optima.
pub fn score_assignment_with<J: Borrow<Journey>>(
    specs: &[TripMatchSpec],
    journeys: &[J],
    opts: MatchOptions,
) -> Option<Assignment> {
    let m = specs.len();
    let k = journeys.len();
    if m == 0 || m > k {
        return None;
    }
    const INF: u64 = u64::MAX;
    let w = k + 1;
    let mut best = vec![INF; (m + 1) * w];
    let mut take = vec![false; m * w];
    best[m * w..].fill(0);
    for i in (0..m).rev() {
        // at least m - i journeys must remain
        for j in (i..=k - (m - i)).rev() {
            let skip = best[i * w + j + 1];
            let jr = journeys[j].borrow();
            let mut v = skip;
            if feasible(&specs[i], jr, opts) && best[(i + 1) * w + j + 1] != INF {
                let t = cost(&specs[i], jr) + best[(i + 1) * w + j + 1];
                if t <= skip {
                    v = t;
                    take[i * w + j] = true;
                }
            }
            best[i * w + j] = v;
        }
    }
    if best[0] == INF {
        return None;
    }

    let mut out = Assignment {
        journeys: Vec::with_capacity(m),
        deltas: Vec::with_capacity(m),
        total_delta_t: best[0],
    };
    let (mut i, mut j) = (0, 0);
    while i < m {
        if take[i * w + j] {
            let jr = journeys[j].borrow();
            out.journeys.push(jr.id);
            out.deltas.push((
                jr.tap_in_time.signed_diff_seconds(&specs[i].first_ref_time),
                jr.tap_out_time.signed_diff_seconds(&specs[i].last_ref_time),
            ));
            i += 1;
        }
        j += 1;
    }
    Some(out)
}

/// Per-trip outcome of a card match, in the respondent's trip order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripDelta {
    pub index_in_day: u32,
    pub journey: String,
    pub signed_first: i64,
    pub signed_last: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CardMatch {
    pub card_id: Arc<str>,
    pub total_delta_t: u64,
    pub trips: Vec<TripDelta>,
}

impl CardMatch {
    fn new(card_id: Arc<str>, specs: &[TripMatchSpec], a: &Assignment, index: &CandidateIndex) -> Self {
        let trips = specs
            .iter()
            .zip(&a.journeys)
            .zip(&a.deltas)
            .map(|((s, &jid), &(f, l))| TripDelta {
                index_in_day: s.index_in_day,
                journey: index.get(jid).label(),
                signed_first: f,
                signed_last: l,
            })
            .collect();
        Self {
            card_id,
            total_delta_t: a.total_delta_t,
            trips,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchStatus {
    Matched,
    NoCandidate,
}

impl MatchStatus {
    pub fn code(&self) -> &'static str {
        match self {
            MatchStatus::Matched => "Matched",
            MatchStatus::NoCandidate => "NoCandidate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Matched" => Some(MatchStatus::Matched),
            "NoCandidate" => Some(MatchStatus::NoCandidate),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    pub respondent_id: Arc<str>,
    pub status: MatchStatus,
    pub best: Option<CardMatch>,
    pub second_best: Option<CardMatch>,
    pub tie: bool,
    pub gap_seconds: Option<u64>,
    /// Cards with at least one feasible assignment.
    pub candidates: usize,
    pub spec_error: Option<SpecError>,
}

impl MatchResult {
    fn no_candidate(r: &DiaryRespondent, spec_error: Option<SpecError>) -> Self {
        Self {
            respondent_id: r.respondent_id.clone(),
            status: MatchStatus::NoCandidate,
            best: None,
            second_best: None,
            tie: false,
            gap_seconds: None,
            candidates: 0,
            spec_error,
        }
    }
}

pub fn respondent_specs(r: &DiaryRespondent, aliases: &AliasTable) -> Result<Vec<TripMatchSpec>, SpecError> {
    r.trips.iter().map(|t| trip_spec(t, aliases)).collect()
}

pub fn match_respondent(
    r: &DiaryRespondent,
    index: &CandidateIndex,
    aliases: &AliasTable,
    opts: MatchOptions,
) -> MatchResult {
    let specs = match respondent_specs(r, aliases) {
        Ok(s) => s,
        Err(e) => return MatchResult::no_candidate(r, Some(e)),
    };
    match_specs(r, &specs, index, opts)
}

fn match_specs(
    r: &DiaryRespondent,
    specs: &[TripMatchSpec],
    index: &CandidateIndex,
    opts: MatchOptions,
) -> MatchResult {
    if specs.is_empty() {
        return MatchResult::no_candidate(r, None);
    }
    // A feasible card has, for every trip, a journey with exactly that
    // trip's day and endpoints, so any one trip's list bounds the candidate
    // set; use the shortest.
    let probe = specs
        .iter()
        .map(|s| index.lookup_od(s.day, &s.first_key, &s.last_key))
        .min_by_key(|l| l.len())
        .unwrap_or(&[]);

    let mut days: Vec<NaiveDate> = specs.iter().map(|s| s.day).collect();
    days.sort_unstable();
    days.dedup();

    // Store order is card-major, so posting lists come grouped by card in
    // ascending card id.
    let mut scored: Vec<(u64, Arc<str>, Assignment)> = Vec::new();
    let mut pool: Vec<&Journey> = Vec::new();
    let mut last_card: Option<&Arc<str>> = None;
    for &jid in probe {
        let card = &index.get(jid).card_id;
        if last_card.is_some_and(|c| c == card) {
            continue;
        }
        last_card = Some(card);
        pool.clear();
        for &d in &days {
            pool.extend(index.card_day(card, d));
        }
        if let Some(a) = score_assignment_with(specs, &pool, opts) {
            scored.push((a.total_delta_t, card.clone(), a));
        }
    }

    if scored.is_empty() {
        return MatchResult::no_candidate(r, None);
    }
    scored.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let tie = scored.len() > 1 && scored[1].0 == scored[0].0;
    let candidates = scored.len();
    let mut it = scored.into_iter();
    let (bt, bc, ba) = it.next().expect("non-empty");
    let second = it.next();
    let gap_seconds = second.as_ref().map(|s| s.0 - bt);
    MatchResult {
        respondent_id: r.respondent_id.clone(),
        status: MatchStatus::Matched,
        best: Some(CardMatch::new(bc, specs, &ba, index)),
        second_best: second.map(|(_, c, a)| CardMatch::new(c, specs, &a, index)),
        tie,
        gap_seconds,
        candidates,
        spec_error: None,
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchRateRow {
    /// `None` for the all-years total.
    pub year: Option<i32>,
    pub eligible: u64,
    pub matched: u64,
}

impl MatchRateRow {
    pub fn percent(&self) -> Option<f64> {
        (self.eligible > 0).then(|| 100.0 * self.matched as f64 / self.eligible as f64)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchRateSummary {
    pub by_year: Vec<MatchRateRow>,
    pub total: MatchRateRow,
}

impl MatchRateSummary {
    pub fn from_results<'a>(items: impl IntoIterator<Item = (i32, &'a MatchResult)>) -> Self {
        let mut by_year: BTreeMap<i32, MatchRateRow> = BTreeMap::new();
        let mut total = MatchRateRow::default();
        for (year, m) in items {
            let row = by_year.entry(year).or_insert_with(|| MatchRateRow {
                year: Some(year),
                ..Default::default()
            });
            row.eligible += 1;
            total.eligible += 1;
            if m.status == MatchStatus::Matched {
                row.matched += 1;
                total.matched += 1;
            }
        }
        Self {
            by_year: by_year.into_values().collect(),
            total,
        }
    }
}

/// Results for every eligible respondent, in respondent id order.
#[derive(Debug, Clone, Default)]
pub struct MatchSet {
    pub results: Vec<MatchResult>,
}

impl MatchSet {
    pub fn matched(&self) -> impl Iterator<Item = &MatchResult> {
        self.results.iter().filter(|m| m.status == MatchStatus::Matched)
    }
}

/// Match every eligible respondent. Respondents outside the 2-3 trip range
/// are not attempted and do not count as eligible.
pub fn match_all(
    respondents: &[DiaryRespondent],
    index: &CandidateIndex,
    aliases: &AliasTable,
    opts: MatchOptions,
) -> (MatchSet, MatchRateSummary) {
    let mut eligible: Vec<&DiaryRespondent> = respondents
        .iter()
        .filter(|r| classify_respondent(r).is_ok())
        .collect();
    eligible.sort_by(|a, b| a.respondent_id.cmp(&b.respondent_id));

    let results: Vec<MatchResult> = eligible
        .par_iter()
        .map(|r| match_respondent(r, index, aliases, opts))
        .collect();
    let summary = MatchRateSummary::from_results(
        eligible.iter().zip(&results).map(|(r, m)| (r.day.year(), m)),
    );
    (MatchSet { results }, summary)
}

#[cfg(test)]
mod tests;
