//! Domain types shared by every stage: timestamps, endpoint keys, leg modes
//! and respondent covariates.

mod covariates;
mod endpoint;
pub mod tables;
mod time;

pub use covariates::{
    derive_day_types, Covariates, DayType1, DayType2, FamilyPosition, Gender, InterviewType,
    ModeCategory, Region, ScheduleFlexibility,
};
pub use endpoint::{
    fold_name, normalize_endpoint, AliasTable, EndpointKey, EndpointKind, EndpointNormalizer,
    LegMode,
};
pub use tables::{MappingTables, TableError, TableRows};
pub use time::{
    abs_diff_seconds, parse_date, DiaryTime, Timestamp, DIARY_GRID_SECONDS, SECONDS_PER_DAY,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("endpoint name is empty")]
    EmptyName,
    #[error("seconds of day {0} outside [0, 86399]")]
    SecondsOutOfRange(u32),
    #[error("unparseable timestamp {0:?}")]
    BadTimestamp(String),
    #[error("unparseable date {0:?}")]
    BadDate(String),
    #[error("diary time {0} is not on the 5-minute grid")]
    OffGrid(String),
    #[error("alias table contains a cycle through {0:?}")]
    AliasCycle(String),
}
