use std::fmt;
use std::str::FromStr;

use chrono::{Duration, NaiveDate, NaiveDateTime, Timelike};

use super::ModelError;

pub const SECONDS_PER_DAY: u32 = 86_400;

/// Diary times are reported on a 5-minute grid.
pub const DIARY_GRID_SECONDS: u32 = 300;

/// A civil-clock instant at one-second resolution.
///
/// Ordering is lexicographic on `(date, seconds_of_day)`, which the derived
/// `Ord` gives us because of field order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp {
    date: NaiveDate,
    seconds: u32,
}

impl Timestamp {
    pub fn new(date: NaiveDate, seconds_of_day: u32) -> Result<Self, ModelError> {
        if seconds_of_day >= SECONDS_PER_DAY {
            return Err(ModelError::SecondsOutOfRange(seconds_of_day));
        }
        Ok(Self {
            date,
            seconds: seconds_of_day,
        })
    }

    pub fn from_hms(date: NaiveDate, h: u32, m: u32, s: u32) -> Result<Self, ModelError> {
        if m >= 60 || s >= 60 {
            return Err(ModelError::SecondsOutOfRange(h * 3600 + m * 60 + s));
        }
        Self::new(date, h * 3600 + m * 60 + s)
    }

    pub fn date(&self) -> NaiveDate {
        self.date
    }

    pub fn seconds_of_day(&self) -> u32 {
        self.seconds
    }

    /// Seconds since 1970-01-01T00:00:00 on the civil clock.
    pub fn epoch_seconds(&self) -> i64 {
        let days = self
            .date
            .signed_duration_since(NaiveDate::from_ymd_opt(1970, 1, 1).unwrap())
            .num_days();
        days * SECONDS_PER_DAY as i64 + self.seconds as i64
    }

    pub fn from_epoch_seconds(secs: i64) -> Self {
        let days = secs.div_euclid(SECONDS_PER_DAY as i64);
        let rem = secs.rem_euclid(SECONDS_PER_DAY as i64) as u32;
        let date = NaiveDate::from_ymd_opt(1970, 1, 1).unwrap() + Duration::days(days);
        Self { date, seconds: rem }
    }

    /// `self - other` in seconds.
    pub fn signed_diff_seconds(&self, other: &Timestamp) -> i64 {
        let days = self.date.signed_duration_since(other.date).num_days();
        days * SECONDS_PER_DAY as i64 + self.seconds as i64 - other.seconds as i64
    }

    pub fn abs_diff_seconds(&self, other: &Timestamp) -> u64 {
        self.signed_diff_seconds(other).unsigned_abs()
    }

    pub fn add_seconds(&self, delta: i64) -> Timestamp {
        Self::from_epoch_seconds(self.epoch_seconds() + delta)
    }

    pub fn is_on_grid(&self, grid: u32) -> bool {
        self.seconds % grid == 0
    }

    fn from_naive(dt: NaiveDateTime) -> Self {
        Self {
            date: dt.date(),
            seconds: dt.time().num_seconds_from_midnight(),
        }
    }
}

/// Free-function form used by the scoring code.
pub fn abs_diff_seconds(a: Timestamp, b: Timestamp) -> u64 {
    a.abs_diff_seconds(&b)
}

impl FromStr for Timestamp {
    type Err = ModelError;

    /// Accepts `YYYY-MM-DDTHH:MM:SS` (a space separator is tolerated).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let parsed = NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S")
            .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S"))
            .map_err(|_| ModelError::BadTimestamp(s.to_string()))?;
        // chrono admits a leap second as 60; we do not
        if parsed.time().nanosecond() != 0 {
            return Err(ModelError::BadTimestamp(s.to_string()));
        }
        Ok(Self::from_naive(parsed))
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (h, m, s) = (self.seconds / 3600, (self.seconds / 60) % 60, self.seconds % 60);
        write!(f, "{}T{:02}:{:02}:{:02}", self.date.format("%Y-%m-%d"), h, m, s)
    }
}

/// A diary-reported time. Always a multiple of [`DIARY_GRID_SECONDS`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DiaryTime(Timestamp);

impl DiaryTime {
    pub fn new(ts: Timestamp) -> Result<Self, ModelError> {
        if !ts.is_on_grid(DIARY_GRID_SECONDS) {
            return Err(ModelError::OffGrid(ts.to_string()));
        }
        Ok(Self(ts))
    }

    pub fn ts(&self) -> Timestamp {
        self.0
    }
}

impl fmt::Display for DiaryTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub fn parse_date(s: &str) -> Result<NaiveDate, ModelError> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").map_err(|_| ModelError::BadDate(s.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn five_minutes_apart() {
        let a = Timestamp::from_hms(d(2024, 3, 5), 8, 0, 0).unwrap();
        let b = Timestamp::from_hms(d(2024, 3, 5), 8, 5, 0).unwrap();
        assert_eq!(abs_diff_seconds(a, b), 300);
        assert_eq!(abs_diff_seconds(a, a), 0);
    }

    #[test]
    fn across_midnight() {
        let a = Timestamp::from_hms(d(2024, 3, 5), 23, 59, 0).unwrap();
        let b = Timestamp::from_hms(d(2024, 3, 6), 0, 1, 0).unwrap();
        assert_eq!(abs_diff_seconds(a, b), 120);
        assert_eq!(b.signed_diff_seconds(&a), 120);
    }

    #[test]
    fn rejects_out_of_range_seconds() {
        assert!(Timestamp::new(d(2024, 1, 1), 86_400).is_err());
        assert!(Timestamp::new(d(2024, 1, 1), 86_399).is_ok());
    }

    #[test]
    fn parse_and_display() {
        let ts: Timestamp = "2021-06-01T07:04:09".parse().unwrap();
        assert_eq!(ts.seconds_of_day(), 7 * 3600 + 4 * 60 + 9);
        assert_eq!(ts.to_string(), "2021-06-01T07:04:09");
        assert!("2021-06-01T25:00:00".parse::<Timestamp>().is_err());
        assert!("2021-02-30T01:00:00".parse::<Timestamp>().is_err());
        assert!("garbage".parse::<Timestamp>().is_err());
    }

    #[test]
    fn diary_time_grid() {
        let on = Timestamp::from_hms(d(2020, 1, 1), 9, 5, 0).unwrap();
        let off = Timestamp::from_hms(d(2020, 1, 1), 9, 5, 1).unwrap();
        assert!(DiaryTime::new(on).is_ok());
        assert!(matches!(DiaryTime::new(off), Err(ModelError::OffGrid(_))));
    }

    fn arb_ts() -> impl Strategy<Value = Timestamp> {
        (0i64..3650, 0u32..SECONDS_PER_DAY).prop_map(|(days, s)| {
            Timestamp::new(d(2015, 1, 1) + Duration::days(days), s).unwrap()
        })
    }

    proptest! {
        #[test]
        fn abs_diff_is_a_metric(a in arb_ts(), b in arb_ts()) {
            prop_assert_eq!(a.abs_diff_seconds(&b), b.abs_diff_seconds(&a));
            prop_assert_eq!(a.abs_diff_seconds(&b) == 0, a == b);
        }

        #[test]
        fn ordering_matches_epoch(a in arb_ts(), b in arb_ts()) {
            prop_assert_eq!(a.cmp(&b), a.epoch_seconds().cmp(&b.epoch_seconds()));
        }

        #[test]
        fn epoch_round_trip(a in arb_ts(), delta in -200_000i64..200_000) {
            prop_assert_eq!(Timestamp::from_epoch_seconds(a.epoch_seconds()), a);
            prop_assert_eq!(a.add_seconds(delta).signed_diff_seconds(&a), delta);
        }
    }
}
