use chrono::NaiveDate;

use crate::ingest::{DiaryLeg, DiaryTrip};
use crate::model::{normalize_endpoint, AliasTable, EndpointKey, EndpointKind, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FirstSemantics {
    /// Reported arrival at the first station; travelers tap in on arrival.
    StationArrival,
    /// Reported boarding time of the first bus.
    BusBoarding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LastSemantics {
    /// Reported alighting from the last train; tap-out follows immediately.
    StationAlight,
    BusAlight,
}

/// What a card journey must look like to stand in for one diary trip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripMatchSpec {
    pub index_in_day: u32,
    pub day: NaiveDate,
    pub first_key: EndpointKey,
    pub last_key: EndpointKey,
    pub first_ref_time: Timestamp,
    pub last_ref_time: Timestamp,
    pub first_semantics: FirstSemantics,
    pub last_semantics: LastSemantics,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("trip {trip}: leg {leg} has no {field}")]
    MissingEndpoint {
        trip: u32,
        leg: usize,
        field: &'static str,
    },
    #[error("trip {0} has no legs")]
    NoLegs(u32),
}

fn endpoint(
    trip: u32,
    leg_no: usize,
    value: &Option<String>,
    field: &'static str,
    kind: EndpointKind,
    aliases: &AliasTable,
) -> Result<EndpointKey, SpecError> {
    let missing = SpecError::MissingEndpoint {
        trip,
        leg: leg_no,
        field,
    };
    let raw = value.as_deref().ok_or(missing.clone())?;
    normalize_endpoint(raw, kind, aliases).map_err(|_| missing)
}

/// Derive the match key of a trip from its first and last legs: rail ends
/// match on station names, bus ends on line designations.
pub fn trip_spec(trip: &DiaryTrip, aliases: &AliasTable) -> Result<TripMatchSpec, SpecError> {
    let t = trip.index_in_day;
    let first: &DiaryLeg = trip.legs.first().ok_or(SpecError::NoLegs(t))?;
    let last: &DiaryLeg = trip.legs.last().ok_or(SpecError::NoLegs(t))?;
    let last_no = trip.legs.len();

    let (first_key, first_semantics) = if first.mode.is_rail() {
        let k = endpoint(t, 1, &first.board_station, "board_station", EndpointKind::Station, aliases)?;
        (k, FirstSemantics::StationArrival)
    } else {
        let k = endpoint(t, 1, &first.board_line, "board_line", EndpointKind::BusLine, aliases)?;
        (k, FirstSemantics::BusBoarding)
    };
    let (last_key, last_semantics) = if last.mode.is_rail() {
        let k = endpoint(t, last_no, &last.alight_station, "alight_station", EndpointKind::Station, aliases)?;
        (k, LastSemantics::StationAlight)
    } else {
        // the line a traveler alights from is the line of the last bus boarded
        let k = endpoint(t, last_no, &last.board_line, "board_line", EndpointKind::BusLine, aliases)?;
        (k, LastSemantics::BusAlight)
    };

    Ok(TripMatchSpec {
        index_in_day: t,
        day: trip.day,
        first_key,
        last_key,
        first_ref_time: trip.first_ref_time.ts(),
        last_ref_time: trip.last_ref_time.ts(),
        first_semantics,
        last_semantics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DiaryTime, LegMode};
    use std::sync::Arc;

    fn at(h: u32, m: u32) -> DiaryTime {
        DiaryTime::new(Timestamp::from_hms(NaiveDate::from_ymd_opt(2024, 3, 5).unwrap(), h, m, 0).unwrap())
            .unwrap()
    }

    fn leg(mode: LegMode, line: Option<&str>, from: Option<&str>, to: Option<&str>) -> DiaryLeg {
        DiaryLeg {
            mode,
            board_line: line.map(String::from),
            board_station: from.map(String::from),
            alight_station: to.map(String::from),
        }
    }

    fn trip(legs: Vec<DiaryLeg>, first: DiaryTime, last: DiaryTime) -> DiaryTrip {
        DiaryTrip {
            respondent_id: Arc::from("r"),
            day: first.ts().date(),
            index_in_day: 1,
            legs,
            first_ref_time: first,
            last_ref_time: last,
            crosses_midnight: false,
        }
    }

    #[test]
    fn train_trip_uses_stations_and_arrival() {
        let t = trip(vec![leg(LegMode::Train, None, Some("X"), Some("Y"))], at(8, 0), at(8, 40));
        let s = trip_spec(&t, &AliasTable::new()).unwrap();
        assert_eq!(s.first_key, EndpointKey::station("x"));
        assert_eq!(s.last_key, EndpointKey::station("y"));
        assert_eq!(s.first_ref_time, at(8, 0).ts());
        assert_eq!(s.last_ref_time, at(8, 40).ts());
        assert_eq!(s.first_semantics, FirstSemantics::StationArrival);
        assert_eq!(s.last_semantics, LastSemantics::StationAlight);
    }

    #[test]
    fn bus_trip_uses_lines_and_boarding() {
        let t = trip(
            vec![leg(LegMode::Bus, Some("5C"), None, None), leg(LegMode::Bus, Some("150S"), None, None)],
            at(9, 5),
            at(9, 45),
        );
        let s = trip_spec(&t, &AliasTable::new()).unwrap();
        assert_eq!(s.first_key, EndpointKey::line("5c"));
        assert_eq!(s.last_key, EndpointKey::line("150s"));
        assert_eq!(s.first_semantics, FirstSemantics::BusBoarding);
        assert_eq!(s.last_semantics, LastSemantics::BusAlight);
    }

    #[test]
    fn mixed_trip_resolves_each_end_separately() {
        let t = trip(
            vec![leg(LegMode::Bus, Some("5C"), None, None), leg(LegMode::Metro, None, Some("K"), Some("Y"))],
            at(9, 5),
            at(9, 45),
        );
        let s = trip_spec(&t, &AliasTable::new()).unwrap();
        assert_eq!(s.first_key, EndpointKey::line("5c"));
        assert_eq!(s.last_key, EndpointKey::station("y"));
    }

    #[test]
    fn missing_line_is_an_error() {
        let t = trip(vec![leg(LegMode::Bus, None, None, None)], at(9, 5), at(9, 45));
        assert_eq!(
            trip_spec(&t, &AliasTable::new()),
            Err(SpecError::MissingEndpoint {
                trip: 1,
                leg: 1,
                field: "board_line"
            })
        );
    }
}
