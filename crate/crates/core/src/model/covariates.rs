use std::collections::BTreeSet;
use std::fmt;

use chrono::{Datelike, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

macro_rules! coded_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident => $code:literal $(| $alt:literal)*),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn code(&self) -> &'static str {
                match self {
                    $($name::$variant => $code),+
                }
            }

            pub fn parse(s: &str) -> Option<Self> {
                let s = s.trim();
                $(
                    if s.eq_ignore_ascii_case($code) $(|| s.eq_ignore_ascii_case($alt))* {
                        return Some($name::$variant);
                    }
                )+
                None
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.code())
            }
        }
    };
}

coded_enum!(Gender { Male => "male" | "m", Female => "female" | "f" });
coded_enum!(DayType1 { Weekday => "weekday", Weekend => "weekend" });
coded_enum!(DayType2 { NormalWeekday => "weekday", WeekendOrHoliday => "weekend_holiday" });
coded_enum!(
    /// `Other` covers reconstructed or combined interviews. Those respondents
    /// stay in every analysis except the interview-type comparison.
    InterviewType { Internet => "internet", Telephone => "telephone", Other => "other" }
);
coded_enum!(ScheduleFlexibility { Fixed => "fixed", Flexible => "flexible" });
coded_enum!(Region { ZealandFunen => "zealand_funen", Jutland => "jutland" });
coded_enum!(FamilyPosition {
    Single => "single",
    OlderInCouple => "older_in_couple",
    YoungerInCouple => "younger_in_couple",
    ChildUnder25 => "child_under_25",
});
coded_enum!(ModeCategory { TrainOnly => "train", BusOnly => "bus", Mixed => "mixed" });

/// Socio-demographic attributes attached to every trip a respondent made.
///
/// `schedule` and `region` come from external lookup tables and are `None`
/// when the table has no entry; such records drop out of that comparison only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Covariates {
    pub gender: Gender,
    pub day_type1: DayType1,
    pub day_type2: DayType2,
    pub interview: InterviewType,
    pub schedule: Option<ScheduleFlexibility>,
    pub region: Option<Region>,
    pub family_position: FamilyPosition,
    pub year: i32,
    /// Trip endpoints fall in more than one region; `region` follows the
    /// first stop.
    pub cross_region: bool,
}

pub fn derive_day_types(date: NaiveDate, holidays: &BTreeSet<NaiveDate>) -> (DayType1, DayType2) {
    let weekend = matches!(date.weekday(), Weekday::Sat | Weekday::Sun);
    if weekend {
        (DayType1::Weekend, DayType2::WeekendOrHoliday)
    } else if holidays.contains(&date) {
        (DayType1::Weekday, DayType2::WeekendOrHoliday)
    } else {
        (DayType1::Weekday, DayType2::NormalWeekday)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn day_types_cover_all_four_cases() {
        let sat = d(2024, 3, 9);
        let sun = d(2024, 3, 10);
        let tue = d(2024, 3, 5);
        let none = BTreeSet::new();
        let with_tue: BTreeSet<_> = [tue, sat].into_iter().collect();

        assert_eq!(derive_day_types(sat, &none), (DayType1::Weekend, DayType2::WeekendOrHoliday));
        assert_eq!(derive_day_types(sun, &with_tue), (DayType1::Weekend, DayType2::WeekendOrHoliday));
        assert_eq!(derive_day_types(tue, &none), (DayType1::Weekday, DayType2::NormalWeekday));
        assert_eq!(derive_day_types(tue, &with_tue), (DayType1::Weekday, DayType2::WeekendOrHoliday));
    }

    #[test]
    fn weekend_always_implies_weekend_or_holiday() {
        let holidays: BTreeSet<_> = [d(2022, 12, 26)].into_iter().collect();
        let mut day = d(2022, 1, 1);
        while day.year() == 2022 {
            let (t1, t2) = derive_day_types(day, &holidays);
            if t1 == DayType1::Weekend {
                assert_eq!(t2, DayType2::WeekendOrHoliday);
            }
            day = day.succ_opt().unwrap();
        }
    }

    #[test]
    fn codes_round_trip() {
        for g in FamilyPosition::ALL {
            assert_eq!(FamilyPosition::parse(g.code()), Some(*g));
        }
        assert_eq!(Gender::parse("F"), Some(Gender::Female));
        assert_eq!(InterviewType::parse("bogus"), None);
    }
}
