use super::*;
use crate::ingest::{reconstruct_journeys, CardTransaction, DiaryLeg, DiaryTrip, TxType};
use crate::model::{
    Covariates, DayType1, DayType2, DiaryTime, EndpointKey, FamilyPosition, Gender, InterviewType, LegMode,
    Timestamp,
};
use proptest::prelude::*;

fn day() -> NaiveDate {
    NaiveDate::from_ymd_opt(2024, 3, 5).unwrap()
}

fn hm(h: u32, m: u32, s: u32) -> Timestamp {
    Timestamp::from_hms(day(), h, m, s).unwrap()
}

/// Journeys from `(card, from, to, tap_in, tap_out)` rows.
fn journeys(rows: &[(&str, &str, &str, Timestamp, Timestamp)]) -> Vec<Journey> {
    let mut taps = Vec::new();
    for &(card, from, to, tin, tout) in rows {
        for (tx_type, at, ts) in [(TxType::TapIn, from, tin), (TxType::TapOut, to, tout)] {
            taps.push(CardTransaction {
                card_id: Arc::from(card),
                ts,
                tx_type,
                endpoint: EndpointKey::station(at),
                mode: LegMode::Train,
            });
        }
    }
    let (j, o) = reconstruct_journeys(taps);
    assert!(o.is_empty());
    j
}

fn spec(from: &str, to: &str, first: Timestamp, last: Timestamp) -> TripMatchSpec {
    TripMatchSpec {
        index_in_day: 1,
        day: first.date(),
        first_key: EndpointKey::station(from),
        last_key: EndpointKey::station(to),
        first_ref_time: first,
        last_ref_time: last,
        first_semantics: FirstSemantics::StationArrival,
        last_semantics: LastSemantics::StationAlight,
    }
}

#[test]
fn two_trip_delta_t() {
    let js = journeys(&[
        ("c", "a", "b", hm(8, 3, 0), hm(8, 31, 0)),
        ("c", "b", "a", hm(16, 10, 0), hm(16, 29, 0)),
    ]);
    let specs = [
        spec("a", "b", hm(8, 0, 0), hm(8, 30, 0)),
        spec("b", "a", hm(16, 0, 0), hm(16, 30, 0)),
    ];
    let a = score_assignment(&specs, &js).unwrap();
    assert_eq!(a.total_delta_t, 900);
    assert_eq!(a.deltas, [(180, 60), (600, -60)]);
}

#[test]
fn identical_times_cost_nothing() {
    let js = journeys(&[("c", "a", "b", hm(8, 0, 0), hm(8, 30, 0))]);
    let specs = [spec("a", "b", hm(8, 0, 0), hm(8, 30, 0))];
    assert_eq!(score_assignment(&specs, &js).unwrap().total_delta_t, 0);
}

#[test]
fn extra_journeys_are_skipped() {
    let js = journeys(&[
        ("c", "a", "b", hm(8, 0, 0), hm(8, 30, 0)),
        ("c", "a", "b", hm(12, 0, 0), hm(12, 30, 0)),
        ("c", "a", "b", hm(16, 0, 0), hm(16, 30, 0)),
    ]);
    let specs = [
        spec("a", "b", hm(8, 0, 0), hm(8, 30, 0)),
        spec("a", "b", hm(16, 0, 0), hm(16, 30, 0)),
    ];
    let a = score_assignment(&specs, &js).unwrap();
    assert_eq!(a.total_delta_t, 0);
    assert_eq!(a.journeys, [JourneyId(0), JourneyId(2)]);
    assert_eq!(brute_force(&specs, &js), Some(0));
}

#[test]
fn crossing_assignment_is_not_allowed() {
    // the only endpoint-feasible pairing would put trip 2 before trip 1
    let js = journeys(&[
        ("c", "b", "a", hm(8, 0, 0), hm(8, 30, 0)),
        ("c", "a", "b", hm(16, 0, 0), hm(16, 30, 0)),
    ]);
    let specs = [
        spec("a", "b", hm(8, 0, 0), hm(8, 30, 0)),
        spec("b", "a", hm(16, 0, 0), hm(16, 30, 0)),
    ];
    assert!(score_assignment(&specs, &js).is_none());
}

#[test]
fn time_window_prefilter() {
    let js = journeys(&[("c", "a", "b", hm(11, 0, 0), hm(11, 30, 0))]);
    let specs = [spec("a", "b", hm(8, 0, 0), hm(8, 30, 0))];
    let narrow = MatchOptions {
        time_window_s: Some(3600),
    };
    assert!(score_assignment_with(&specs, &js, narrow).is_none());
    assert!(score_assignment(&specs, &js).is_some());
}

/// Exhaustive minimum over all order-preserving injective feasible choices.
fn brute_force(specs: &[TripMatchSpec], js: &[Journey]) -> Option<u64> {
    fn go(specs: &[TripMatchSpec], js: &[Journey], from: usize) -> Option<u64> {
        let Some((s, rest)) = specs.split_first() else {
            return Some(0);
        };
        (from..js.len())
            .filter(|&j| feasible(s, &js[j], MatchOptions::default()))
            .filter_map(|j| go(rest, js, j + 1).map(|c| c + cost(s, &js[j])))
            .min()
    }
    go(specs, js, 0)
}

fn arb_instance() -> impl Strategy<Value = (Vec<TripMatchSpec>, Vec<Journey>)> {
    let trip = (0u8..3, 0u8..3, 0u32..600, 0u32..60);
    let journey = (0u8..3, 0u8..3, 0u32..1200, 1u32..60);
    (
        proptest::collection::vec(trip, 1..=3),
        proptest::collection::vec(journey, 0..=8),
    )
        .prop_map(|(trips, jrows)| {
            let names = ["a", "b", "c"];
            let mut specs: Vec<TripMatchSpec> = trips
                .into_iter()
                .map(|(f, t, start, dur)| {
                    let first = hm(5, 0, 0).add_seconds(start as i64 * 60);
                    spec(names[f as usize], names[t as usize], first, first.add_seconds(dur as i64 * 60))
                })
                .collect();
            specs.sort_by_key(|s| s.first_ref_time);
            let rows: Vec<(&str, &str, &str, Timestamp, Timestamp)> = jrows
                .into_iter()
                .enumerate()
                .map(|(i, (f, t, start, dur))| {
                    // distinct tap-in seconds so the card chain stays simple
                    let tin = hm(5, 0, 0).add_seconds(start as i64 * 60 + i as i64);
                    (
                        "c",
                        names[f as usize],
                        names[t as usize],
                        tin,
                        tin.add_seconds(dur as i64 * 60 - 30),
                    )
                })
                .collect();
            let mut rows = rows;
            rows.sort_by_key(|r| r.3);
            // keep journeys non-overlapping in time
            let mut kept: Vec<(&str, &str, &str, Timestamp, Timestamp)> = Vec::new();
            for r in rows {
                if kept.last().is_none_or(|k| k.4 < r.3) {
                    kept.push(r);
                }
            }
            (specs, journeys(&kept))
        })
}

proptest! {
    #[test]
    fn dp_matches_enumeration((specs, js) in arb_instance()) {
        let dp = score_assignment(&specs, &js);
        prop_assert_eq!(dp.as_ref().map(|a| a.total_delta_t), brute_force(&specs, &js));
        if let Some(a) = dp {
            let sum: u64 = a.deltas.iter().map(|&(f, l)| f.unsigned_abs() + l.unsigned_abs()).sum();
            prop_assert_eq!(sum, a.total_delta_t);
            prop_assert!(a.journeys.windows(2).all(|w| w[0] < w[1]));
        }
    }
}

fn respondent(trips: &[(&str, &str, Timestamp, Timestamp)]) -> DiaryRespondent {
    let rid: Arc<str> = Arc::from("r1");
    DiaryRespondent {
        respondent_id: rid.clone(),
        day: day(),
        trips: trips
            .iter()
            .enumerate()
            .map(|(i, &(from, to, f, l))| DiaryTrip {
                respondent_id: rid.clone(),
                day: f.date(),
                index_in_day: i as u32 + 1,
                legs: vec![DiaryLeg {
                    mode: LegMode::Train,
                    board_line: None,
                    board_station: Some(from.into()),
                    alight_station: Some(to.into()),
                }],
                first_ref_time: DiaryTime::new(f).unwrap(),
                last_ref_time: DiaryTime::new(l).unwrap(),
                crosses_midnight: false,
            })
            .collect(),
        covariates: Covariates {
            gender: Gender::Female,
            day_type1: DayType1::Weekday,
            day_type2: DayType2::NormalWeekday,
            interview: InterviewType::Internet,
            schedule: None,
            region: None,
            family_position: FamilyPosition::Single,
            year: 2024,
            cross_region: false,
        },
        occupation_code: String::new(),
    }
}

fn two_trip_respondent() -> DiaryRespondent {
    respondent(&[
        ("a", "b", hm(8, 0, 0), hm(8, 30, 0)),
        ("b", "a", hm(16, 0, 0), hm(16, 30, 0)),
    ])
}

fn run(js: Vec<Journey>) -> MatchResult {
    let idx = CandidateIndex::build(js);
    match_respondent(&two_trip_respondent(), &idx, &AliasTable::new(), MatchOptions::default())
}

#[test]
fn single_candidate() {
    let m = run(journeys(&[
        ("c", "a", "b", hm(8, 3, 0), hm(8, 31, 0)),
        ("c", "b", "a", hm(16, 10, 0), hm(16, 29, 0)),
    ]));
    assert_eq!(m.status, MatchStatus::Matched);
    assert!(m.second_best.is_none());
    assert!(!m.tie);
    let best = m.best.unwrap();
    assert_eq!(best.total_delta_t, 900);
    assert_eq!(best.trips[1].journey, "c#2");
    assert_eq!(best.trips[1].signed_first, 600);
}

#[test]
fn best_and_second_best() {
    let m = run(journeys(&[
        ("d", "a", "b", hm(8, 3, 0), hm(8, 31, 0)),
        ("d", "b", "a", hm(16, 10, 0), hm(16, 29, 0)),
        ("c", "a", "b", hm(8, 13, 0), hm(8, 31, 0)),
        ("c", "b", "a", hm(16, 10, 0), hm(16, 29, 0)),
    ]));
    assert_eq!(&*m.best.as_ref().unwrap().card_id, "d");
    assert_eq!(&*m.second_best.as_ref().unwrap().card_id, "c");
    assert_eq!(m.second_best.unwrap().total_delta_t, 1500);
    assert_eq!(m.gap_seconds, Some(600));
    assert!(!m.tie);
    assert_eq!(m.candidates, 2);
}

#[test]
fn tie_goes_to_smallest_card_id() {
    let m = run(journeys(&[
        ("z", "a", "b", hm(8, 0, 0), hm(8, 30, 0)),
        ("z", "b", "a", hm(16, 0, 0), hm(16, 30, 0)),
        ("m", "a", "b", hm(8, 0, 0), hm(8, 30, 0)),
        ("m", "b", "a", hm(16, 0, 0), hm(16, 30, 0)),
    ]));
    assert!(m.tie);
    assert_eq!(&*m.best.unwrap().card_id, "m");
    assert_eq!(m.gap_seconds, Some(0));
}

#[test]
fn no_candidate() {
    let m = run(journeys(&[("c", "x", "y", hm(8, 0, 0), hm(8, 30, 0))]));
    assert_eq!(m.status, MatchStatus::NoCandidate);
    assert!(m.best.is_none());
    // a card with only one of the two trips is not a candidate either
    let m = run(journeys(&[("c", "a", "b", hm(8, 0, 0), hm(8, 30, 0))]));
    assert_eq!(m.status, MatchStatus::NoCandidate);
}

#[test]
fn zero_cost_match_survives_decoys() {
    let mut rows = vec![
        ("true", "a", "b", hm(8, 0, 0), hm(8, 30, 0)),
        ("true", "b", "a", hm(16, 0, 0), hm(16, 30, 0)),
    ];
    let decoys: Vec<String> = (0..20).map(|i| format!("d{i:02}")).collect();
    for (i, d) in decoys.iter().enumerate() {
        rows.push((d, "a", "b", hm(8, i as u32, 1), hm(8, 30, 0)));
        rows.push((d, "b", "a", hm(16, 0, 0), hm(16, 30 + i as u32, 0)));
    }
    let m = run(journeys(&rows));
    let best = m.best.unwrap();
    assert_eq!(&*best.card_id, "true");
    assert_eq!(best.total_delta_t, 0);
}

#[test]
fn match_all_reports_rates_and_ignores_ineligible() {
    let js = journeys(&[
        ("c", "a", "b", hm(8, 0, 0), hm(8, 30, 0)),
        ("c", "b", "a", hm(16, 0, 0), hm(16, 30, 0)),
    ]);
    let idx = CandidateIndex::build(js);
    let mut other = two_trip_respondent();
    other.respondent_id = Arc::from("r2");
    other.trips[0].legs[0].board_station = Some("q".into());
    let mut single = respondent(&[("a", "b", hm(8, 0, 0), hm(8, 30, 0))]);
    single.respondent_id = Arc::from("r0");
    let rs = vec![other, single, two_trip_respondent()];
    let (set, summary) = match_all(&rs, &idx, &AliasTable::new(), MatchOptions::default());
    let ids: Vec<&str> = set.results.iter().map(|m| &*m.respondent_id).collect();
    assert_eq!(ids, ["r1", "r2"]);
    assert_eq!((summary.total.eligible, summary.total.matched), (2, 1));
    assert_eq!(summary.total.percent(), Some(50.0));
    assert_eq!(summary.by_year.len(), 1);
}
