//! `matches.csv` and `errors.csv`: the files passed between the match and
//! analyze stages.

use std::io::{Read, Write};
use std::sync::Arc;

use taplink_core::matcher::{CardMatch, MatchResult, MatchSet, MatchStatus, TripDelta};
use taplink_core::metrics::ErrorRecord;

/// Trips per respondent that `matches.csv` has columns for.
pub const MAX_TRIPS: usize = 3;

pub fn matches_header() -> Vec<String> {
    let mut h: Vec<String> = [
        "respondent_id",
        "status",
        "card_id",
        "total_delta_t_s",
        "tie",
        "second_card_id",
        "second_delta_t_s",
        "gap_s",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for k in 1..=MAX_TRIPS {
        for col in ["index", "journey", "first_s", "last_s"] {
            h.push(format!("trip{k}_{col}"));
        }
        for col in ["journey", "first_s", "last_s"] {
            h.push(format!("second_trip{k}_{col}"));
        }
    }
    h
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_matches<W: Write>(w: W, set: &MatchSet) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(matches_header())?;
    for m in &set.results {
        let best = m.best.as_ref();
        let second = m.second_best.as_ref();
        let mut row = vec![
            m.respondent_id.to_string(),
            m.status.code().to_string(),
            opt(best.map(|b| &b.card_id)),
            opt(best.map(|b| b.total_delta_t)),
            m.tie.to_string(),
            opt(second.map(|b| &b.card_id)),
            opt(second.map(|b| b.total_delta_t)),
            opt(m.gap_seconds),
        ];
        for k in 0..MAX_TRIPS {
            let t = best.and_then(|b| b.trips.get(k));
            row.push(opt(t.map(|t| t.index_in_day)));
            row.push(opt(t.map(|t| &t.journey)));
            row.push(opt(t.map(|t| t.signed_first)));
            row.push(opt(t.map(|t| t.signed_last)));
            let s = second.and_then(|b| b.trips.get(k));
            row.push(opt(s.map(|t| &t.journey)));
            row.push(opt(s.map(|t| t.signed_first)));
            row.push(opt(s.map(|t| t.signed_last)));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, thiserror::Error)]
#[error("matches line {line}: {reason}")]
pub struct RecordError {
    pub line: u64,
    pub reason: String,
}

fn parse_num<T: std::str::FromStr>(s: &str, line: u64, col: &str) -> Result<T, RecordError> {
    s.parse().map_err(|_| RecordError {
        line,
        reason: format!("bad {col} {s:?}"),
    })
}

pub fn read_matches<R: Read>(r: R) -> Result<MatchSet, RecordError> {
    let err = |line: u64, reason: String| RecordError { line, reason };
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = rdr.headers().map_err(|e| err(1, e.to_string()))?.clone();
    if header.iter().ne(matches_header().iter().map(String::as_str)) {
        return Err(err(1, "unexpected header".into()));
    }
    let mut results = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let f = |i: usize| rec.get(i).unwrap_or("");
        let status = MatchStatus::parse(f(1)).ok_or_else(|| err(line, format!("bad status {:?}", f(1))))?;
        let tie: bool = parse_num(f(4), line, "tie")?;
        let card = |id: &str, total: &str, offset: usize| -> Result<Option<CardMatch>, RecordError> {
            if id.is_empty() {
                return Ok(None);
            }
            let mut trips = Vec::new();
            for k in 0..MAX_TRIPS {
                let base = 8 + k * 7;
                let journey = f(base + offset);
                if journey.is_empty() {
                    continue;
                }
                let (df, dl) = if offset == 1 { (base + 2, base + 3) } else { (base + 5, base + 6) };
                trips.push(TripDelta {
                    index_in_day: parse_num(f(base), line, "trip index")?,
                    journey: journey.to_string(),
                    signed_first: parse_num(f(df), line, "first_s")?,
                    signed_last: parse_num(f(dl), line, "last_s")?,
                });
            }
            Ok(Some(CardMatch {
                card_id: Arc::from(id),
                total_delta_t: parse_num(total, line, "delta_t")?,
                trips,
            }))
        };
        let best = card(f(2), f(3), 1)?;
        let second_best = card(f(5), f(6), 4)?;
        if (status == MatchStatus::Matched) != best.is_some() {
            return Err(err(line, "status and card_id disagree".into()));
        }
        let gap_seconds = if f(7).is_empty() { None } else { Some(parse_num(f(7), line, "gap_s")?) };
        results.push(MatchResult {
            respondent_id: Arc::from(f(0)),
            status,
            best,
            second_best,
            tie,
            gap_seconds,
            candidates: 0,
            spec_error: None,
        });
    }
    Ok(MatchSet { results })
}

pub const ERRORS_HEADER: [&str; 15] = [
    "respondent_id",
    "trip_index",
    "signed_first_s",
    "signed_last_s",
    "abs_first_s",
    "abs_last_s",
    "mode",
    "year",
    "gender",
    "day_type1",
    "day_type2",
    "interview",
    "schedule",
    "region",
    "family_position",
];

pub fn write_errors<W: Write>(w: W, records: &[ErrorRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(ERRORS_HEADER)?;
    for r in records {
        let c = &r.covariates;
        w.write_record([
            r.respondent_id.to_string(),
            r.trip_index.to_string(),
            r.signed_first.to_string(),
            r.signed_last.to_string(),
            r.abs_first.to_string(),
            r.abs_last.to_string(),
            r.mode.code().to_string(),
            c.year.to_string(),
            c.gender.code().to_string(),
            c.day_type1.code().to_string(),
            c.day_type2.code().to_string(),
            c.interview.code().to_string(),
            opt(c.schedule.map(|s| s.code())),
            opt(c.region.map(|s| s.code())),
            c.family_position.code().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> MatchSet {
        let trip = |i, j: &str, f, l| TripDelta {
            index_in_day: i,
            journey: j.into(),
            signed_first: f,
            signed_last: l,
        };
        MatchSet {
            results: vec![
                MatchResult {
                    respondent_id: Arc::from("R1"),
                    status: MatchStatus::Matched,
                    best: Some(CardMatch {
                        card_id: Arc::from("c1"),
                        total_delta_t: 900,
                        trips: vec![trip(1, "c1#1", -300, 0), trip(2, "c1#2", 600, 0)],
                    }),
                    second_best: Some(CardMatch {
                        card_id: Arc::from("c2"),
                        total_delta_t: 1500,
                        trips: vec![trip(1, "c2#1", 300, -600), trip(2, "c2#3", 0, 600)],
                    }),
                    tie: false,
                    gap_seconds: Some(600),
                    candidates: 0,
                    spec_error: None,
                },
                MatchResult {
                    respondent_id: Arc::from("R2"),
                    status: MatchStatus::NoCandidate,
                    best: None,
                    second_best: None,
                    tie: false,
                    gap_seconds: None,
                    candidates: 0,
                    spec_error: None,
                },
            ],
        }
    }

    #[test]
    fn matches_round_trip() {
        let set = sample();
        let mut buf = Vec::new();
        write_matches(&mut buf, &set).unwrap();
        let back = read_matches(buf.as_slice()).unwrap();
        assert_eq!(back.results, set.results);
    }

    #[test]
    fn header_has_per_trip_columns() {
        let h = matches_header();
        assert_eq!(h.len(), 8 + 7 * MAX_TRIPS);
        assert_eq!(h[8], "trip1_index");
        assert_eq!(h.last().unwrap(), "second_trip3_last_s");
    }

    #[test]
    fn status_must_agree_with_card() {
        let mut buf = Vec::new();
        write_matches(&mut buf, &MatchSet::default()).unwrap();
        let mut text = String::from_utf8(buf).unwrap();
        text.push_str("R1,Matched,,,false,,,");
        text.push_str(&",".repeat(7 * MAX_TRIPS));
        text.push('\n');
        assert!(read_matches(text.as_bytes()).is_err());
    }
}
