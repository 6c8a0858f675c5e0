use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;
use std::sync::Arc;

use chrono::{Datelike, NaiveDate};

use crate::model::{
    derive_day_types, fold_name, parse_date, Covariates, DiaryTime, FamilyPosition, Gender,
    InterviewType, LegMode, MappingTables, ModeCategory, Region, Timestamp,
};

use super::{IngestError, RejectReason, Rejection};

pub const DIARY_HEADER: [&str; 14] = [
    "respondent_id",
    "day",
    "trip_index",
    "leg_index",
    "mode",
    "board_station",
    "alight_station",
    "board_line",
    "first_ref_time",
    "last_ref_time",
    "gender",
    "interview",
    "occupation_code",
    "family_position",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiaryLeg {
    pub mode: LegMode,
    pub board_line: Option<String>,
    pub board_station: Option<String>,
    pub alight_station: Option<String>,
}

/// One reported public-transport trip.
///
/// `first_ref_time` is the reported arrival at the first station when the
/// first leg is rail, or the boarding time of the first bus otherwise.
/// `last_ref_time` is the alighting time of the last leg.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiaryTrip {
    pub respondent_id: Arc<str>,
    /// Calendar date of `first_ref_time`.
    pub day: NaiveDate,
    pub index_in_day: u32,
    pub legs: Vec<DiaryLeg>,
    pub first_ref_time: DiaryTime,
    pub last_ref_time: DiaryTime,
    pub crosses_midnight: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiaryRespondent {
    pub respondent_id: Arc<str>,
    pub day: NaiveDate,
    /// Sorted by `first_ref_time`, then reported index.
    pub trips: Vec<DiaryTrip>,
    pub covariates: Covariates,
    pub occupation_code: String,
}

impl DiaryRespondent {
    /// Only respondents reporting two or three trips take part in matching.
    pub fn is_eligible(&self) -> bool {
        matches!(self.trips.len(), 2 | 3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("respondent reported {trips} trips; only 2 or 3 are matched")]
pub struct Excluded {
    pub trips: usize,
}

pub fn classify_respondent(r: &DiaryRespondent) -> Result<ModeCategory, Excluded> {
    if !r.is_eligible() {
        return Err(Excluded {
            trips: r.trips.len(),
        });
    }
    let legs = || r.trips.iter().flat_map(|t| t.legs.iter());
    if legs().all(|l| l.mode.is_rail()) {
        Ok(ModeCategory::TrainOnly)
    } else if legs().all(|l| l.mode == LegMode::Bus) {
        Ok(ModeCategory::BusOnly)
    } else {
        Ok(ModeCategory::Mixed)
    }
}

pub fn parse_diary_file(
    path: &Path,
    tables: &MappingTables,
) -> Result<(Vec<DiaryRespondent>, Vec<Rejection>), IngestError> {
    let file = File::open(path).map_err(|source| IngestError::FileUnreadable {
        path: path.to_path_buf(),
        source,
    })?;
    parse_diary(BufReader::new(file), tables)
}

#[derive(Debug)]
struct Row {
    line: u64,
    day: NaiveDate,
    trip_index: u32,
    leg_index: u32,
    leg: DiaryLeg,
    first: Timestamp,
    last: Timestamp,
    gender: Gender,
    interview: InterviewType,
    occupation: String,
    family: FamilyPosition,
}

type RowResult = Result<Row, Rejection>;

/// Parse `diary.csv` (one row per trip leg) into respondents ordered by id.
///
/// Any invalid row rejects its whole respondent, since dropping a single
/// trip would silently change the respondent's trip count.
pub fn parse_diary<R: Read>(
    reader: R,
    tables: &MappingTables,
) -> Result<(Vec<DiaryRespondent>, Vec<Rejection>), IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers().map_err(IngestError::from_csv)?.clone();
    let mut col = [0usize; DIARY_HEADER.len()];
    for (i, name) in DIARY_HEADER.iter().enumerate() {
        col[i] = header
            .iter()
            .position(|h| h.trim() == *name)
            .ok_or_else(|| IngestError::MalformedRow {
                line: 1,
                reason: format!("missing column {name}"),
            })?;
    }

    let mut by_respondent: BTreeMap<String, Vec<RowResult>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(IngestError::from_csv)?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| rec.get(col[i]).unwrap_or("").trim();
        let id = field(0).to_string();
        let row = parse_row(line, &field);
        by_respondent.entry(id).or_default().push(row);
    }

    let mut out = Vec::new();
    let mut rejected = Vec::new();
    for (id, rows) in by_respondent {
        match build_respondent(&id, rows, tables) {
            Ok(r) => out.push(r),
            Err(rej) => rejected.push(rej),
        }
    }
    Ok((out, rejected))
}

fn parse_row<'a>(line: u64, field: &impl Fn(usize) -> &'a str) -> RowResult {
    let reject = |reason, detail: &str| Rejection {
        line,
        reason,
        detail: detail.to_string(),
    };
    let opt = |s: &str| (!s.is_empty()).then(|| s.to_string());

    let day = parse_date(field(1)).map_err(|_| reject(RejectReason::BadDate, field(1)))?;
    let trip_index: u32 = field(2)
        .parse()
        .ok()
        .filter(|&i| i >= 1)
        .ok_or_else(|| reject(RejectReason::BadIndex, field(2)))?;
    let leg_index: u32 = field(3)
        .parse()
        .ok()
        .filter(|&i| i >= 1)
        .ok_or_else(|| reject(RejectReason::BadIndex, field(3)))?;
    let mode = LegMode::parse(field(4)).ok_or_else(|| reject(RejectReason::UnknownMode, field(4)))?;
    let first: Timestamp =
        field(8).parse().map_err(|_| reject(RejectReason::BadTimestamp, field(8)))?;
    let last: Timestamp =
        field(9).parse().map_err(|_| reject(RejectReason::BadTimestamp, field(9)))?;
    let gender = Gender::parse(field(10)).ok_or_else(|| reject(RejectReason::BadCovariate, field(10)))?;
    let interview =
        InterviewType::parse(field(11)).ok_or_else(|| reject(RejectReason::BadCovariate, field(11)))?;
    let family =
        FamilyPosition::parse(field(13)).ok_or_else(|| reject(RejectReason::BadCovariate, field(13)))?;

    Ok(Row {
        line,
        day,
        trip_index,
        leg_index,
        leg: DiaryLeg {
            mode,
            board_station: opt(field(5)),
            alight_station: opt(field(6)),
            board_line: opt(field(7)),
        },
        first,
        last,
        gender,
        interview,
        occupation: field(12).to_string(),
        family,
    })
}

fn build_respondent(
    id: &str,
    rows: Vec<RowResult>,
    tables: &MappingTables,
) -> Result<DiaryRespondent, Rejection> {
    let mut rows: Vec<Row> = rows.into_iter().collect::<Result<_, _>>()?;
    if id.is_empty() {
        return Err(Rejection {
            line: rows[0].line,
            reason: RejectReason::EmptyRespondentId,
            detail: String::new(),
        });
    }
    rows.sort_by_key(|r| (r.trip_index, r.leg_index));
    let head = &rows[0];
    let inconsistent = |r: &Row, what: &str| Rejection {
        line: r.line,
        reason: RejectReason::InconsistentRespondent,
        detail: format!("{id}: {what}"),
    };
    for r in &rows {
        if r.day != head.day
            || r.gender != head.gender
            || r.interview != head.interview
            || r.family != head.family
            || r.occupation != head.occupation
        {
            return Err(inconsistent(r, "respondent fields differ between rows"));
        }
    }

    let respondent_id: Arc<str> = Arc::from(id);
    let mut trips: Vec<DiaryTrip> = Vec::new();
    let mut expected_trip = 1;
    let mut i = 0;
    while i < rows.len() {
        let t = rows[i].trip_index;
        if t != expected_trip {
            return Err(Rejection {
                line: rows[i].line,
                reason: RejectReason::BadIndex,
                detail: format!("{id}: trip index {t}, expected {expected_trip}"),
            });
        }
        let start = i;
        while i < rows.len() && rows[i].trip_index == t {
            let r = &rows[i];
            if r.leg_index != (i - start) as u32 + 1 {
                return Err(Rejection {
                    line: r.line,
                    reason: RejectReason::BadIndex,
                    detail: format!("{id}: trip {t} leg index {}", r.leg_index),
                });
            }
            if r.first != rows[start].first || r.last != rows[start].last {
                return Err(inconsistent(r, "trip times differ between legs"));
            }
            i += 1;
        }
        let r0 = &rows[start];
        let grid = |ts: Timestamp| {
            DiaryTime::new(ts).map_err(|e| Rejection {
                line: r0.line,
                reason: RejectReason::OffGrid,
                detail: e.to_string(),
            })
        };
        let first = grid(r0.first)?;
        let last = grid(r0.last)?;
        if first > last {
            return Err(Rejection {
                line: r0.line,
                reason: RejectReason::BadTripTimes,
                detail: format!("{id}: trip {t} ends before it starts"),
            });
        }
        trips.push(DiaryTrip {
            respondent_id: respondent_id.clone(),
            day: first.ts().date(),
            index_in_day: t,
            legs: rows[start..i].iter().map(|r| r.leg.clone()).collect(),
            first_ref_time: first,
            last_ref_time: last,
            crosses_midnight: last.ts().date() > first.ts().date(),
        });
        expected_trip += 1;
    }
    trips.sort_by_key(|t| (t.first_ref_time, t.index_in_day));

    let (day_type1, day_type2) = derive_day_types(head.day, &tables.holidays);
    let (region, cross_region) = region_of(&trips, tables);
    let covariates = Covariates {
        gender: head.gender,
        day_type1,
        day_type2,
        interview: head.interview,
        schedule: tables.schedule_of(&head.occupation),
        region,
        family_position: head.family,
        year: head.day.year(),
        cross_region,
    };
    Ok(DiaryRespondent {
        respondent_id,
        day: head.day,
        trips,
        covariates,
        occupation_code: head.occupation.clone(),
    })
}

/// Region of the first stop of the first trip, plus whether any known
/// endpoint lies elsewhere.
fn region_of(trips: &[DiaryTrip], tables: &MappingTables) -> (Option<Region>, bool) {
    let mut names: Vec<&str> = Vec::new();
    for t in trips {
        for l in &t.legs {
            let ends: [&Option<String>; 2] = if l.mode.is_rail() {
                [&l.board_station, &l.alight_station]
            } else {
                [&l.board_line, &l.board_line]
            };
            names.extend(ends.into_iter().flatten().map(String::as_str));
        }
    }
    let lookup = |raw: &str| -> Option<Region> {
        let folded = fold_name(raw);
        match tables.aliases.resolve(&folded) {
            Some(k) => tables.region_of(k),
            None => tables.region_of(&folded),
        }
    };
    let regions: Vec<Option<Region>> = names.iter().map(|&n| lookup(n)).collect();
    let first = regions.first().copied().flatten();
    let cross = regions.iter().flatten().any(|r| Some(*r) != first);
    (first, cross)
}
