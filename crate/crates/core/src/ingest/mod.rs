//! Card-transaction and travel-diary ingestion.
//!
//! Both parsers are lenient per row and strict per file: a row whose values
//! break a type invariant goes to the rejection log with a reason code, while
//! a file whose shape is wrong (header, column count, encoding) is an error.

mod diary;
mod journeys;
mod summary;
mod transactions;

use std::fmt;
use std::path::PathBuf;

use serde::Serialize;

pub use diary::{
    classify_respondent, parse_diary, parse_diary_file, DiaryLeg, DiaryRespondent, DiaryTrip,
    Excluded, DIARY_HEADER,
};
pub use journeys::{reconstruct_journeys, Journey, JourneyId, Orphan, OrphanReason};
pub use summary::{
    card_trip_frequency, card_trip_frequency_by_day, diary_year_summary, od_daily_counts,
    CountSummary, DiaryYearRow, OdCounts, TripFrequency,
};
pub use transactions::{
    parse_transactions, parse_transactions_file, CardTransaction, TxType, TRANSACTIONS_HEADER,
};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    FileUnreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
}

impl IngestError {
    fn from_csv(e: csv::Error) -> Self {
        let line = e.position().map_or(0, |p| p.line());
        IngestError::MalformedRow {
            line,
            reason: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum RejectReason {
    UnknownTxType,
    UnknownMode,
    UnknownEndpointKind,
    ModeEndpointMismatch,
    BadTimestamp,
    EmptyCardId,
    EmptyRespondentId,
    EmptyEndpoint,
    BadDate,
    OffGrid,
    BadTripTimes,
    BadIndex,
    BadCovariate,
    InconsistentRespondent,
}

impl RejectReason {
    pub fn code(&self) -> &'static str {
        match self {
            RejectReason::UnknownTxType => "UnknownTxType",
            RejectReason::UnknownMode => "UnknownMode",
            RejectReason::UnknownEndpointKind => "UnknownEndpointKind",
            RejectReason::ModeEndpointMismatch => "ModeEndpointMismatch",
            RejectReason::BadTimestamp => "BadTimestamp",
            RejectReason::EmptyCardId => "EmptyCardId",
            RejectReason::EmptyRespondentId => "EmptyRespondentId",
            RejectReason::EmptyEndpoint => "EmptyEndpoint",
            RejectReason::BadDate => "BadDate",
            RejectReason::OffGrid => "OffGrid",
            RejectReason::BadTripTimes => "BadTripTimes",
            RejectReason::BadIndex => "BadIndex",
            RejectReason::BadCovariate => "BadCovariate",
            RejectReason::InconsistentRespondent => "InconsistentRespondent",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// One rejected input row (or, for the diary, one rejected respondent
/// anchored at the offending row).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub line: u64,
    pub reason: RejectReason,
    pub detail: String,
}
