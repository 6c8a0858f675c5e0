use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;
use std::sync::Arc;

use crate::ingest::{DiaryRespondent, Journey};

use super::{LinkRow, SynthError, LINKAGE_HEADER};

pub fn read_linkage<R: Read>(reader: R) -> Result<Vec<LinkRow>, SynthError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().map(str::trim).ne(LINKAGE_HEADER.iter().copied()) {
        return Err(SynthError::BrokenLink {
            row: 0,
            reason: format!("expected header {}", LINKAGE_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let trip_index = rec[2].trim().parse().map_err(|_| SynthError::BrokenLink {
            row: row + 1,
            reason: format!("bad trip index {:?}", &rec[2]),
        })?;
        out.push(LinkRow {
            respondent_id: rec[0].trim().to_string(),
            card_id: rec[1].trim().to_string(),
            trip_index,
            journey_id: rec[3].trim().to_string(),
        });
    }
    Ok(out)
}

pub fn read_linkage_file(path: &Path) -> Result<Vec<LinkRow>, SynthError> {
    read_linkage(BufReader::new(File::open(path)?))
}

/// Diary-versus-truth error of one linked trip, signed as card minus diary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthError {
    pub respondent_id: Arc<str>,
    pub trip_index: u32,
    pub signed_first: i64,
    pub signed_last: i64,
    pub abs_first: u64,
}

/// Per linked trip, the distance between the reported first time and the
/// true tap-in, taken from the linkage rather than from matching.
pub fn truth_error_distribution(
    linkage: &[LinkRow],
    journeys: &[Journey],
    diary: &[DiaryRespondent],
) -> Result<Vec<TruthError>, SynthError> {
    let by_label: HashMap<String, &Journey> = journeys.iter().map(|j| (j.label(), j)).collect();
    let by_id: HashMap<&str, &DiaryRespondent> = diary.iter().map(|r| (r.respondent_id.as_ref(), r)).collect();

    linkage
        .iter()
        .enumerate()
        .map(|(row, l)| {
            let broken = |reason: String| SynthError::BrokenLink { row: row + 1, reason };
            let j = by_label
                .get(&l.journey_id)
                .ok_or_else(|| broken(format!("journey {} not in transactions", l.journey_id)))?;
            if *j.card_id != *l.card_id {
                return Err(broken(format!("journey {} is not on card {}", l.journey_id, l.card_id)));
            }
            let r = by_id
                .get(l.respondent_id.as_str())
                .ok_or_else(|| broken(format!("respondent {} not in diary", l.respondent_id)))?;
            let t = r
                .trips
                .iter()
                .find(|t| t.index_in_day == l.trip_index)
                .ok_or_else(|| broken(format!("respondent {} has no trip {}", l.respondent_id, l.trip_index)))?;
            let signed_first = j.tap_in_time.signed_diff_seconds(&t.first_ref_time.ts());
            Ok(TruthError {
                respondent_id: r.respondent_id.clone(),
                trip_index: l.trip_index,
                signed_first,
                signed_last: j.tap_out_time.signed_diff_seconds(&t.last_ref_time.ts()),
                abs_first: signed_first.unsigned_abs(),
            })
        })
        .collect()
}
