use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::model::{fold_name, parse_date, FamilyPosition, Gender, InterviewType, ScheduleFlexibility};

use super::SynthError;

const SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_travelers: usize,
    /// First survey day, ISO-8601.
    pub start_date: String,
    /// Each traveler's day is drawn uniformly from this many days.
    pub days_span: u32,
    pub holidays: Vec<String>,
    pub network: NetworkConfig,
    pub trips_per_day: TripsPerDay,
    pub modes: ModeMix,
    /// Chance that a single-mode trip has a second leg.
    pub transfer_prob: f64,
    pub covariates: CovariateMix,
    pub noise: NoiseConfig,
    /// Give every eligible traveler's first trip an endpoint pair that no
    /// other card uses on that day, so the true card is the only candidate.
    pub unique_first_trips: bool,
    /// Add a second card per traveler that repeats the traveler's journeys
    /// with every tap moved by up to `twin_jitter_s`.
    pub twin_cards: bool,
    pub twin_jitter_s: u32,
    pub planted: Option<PlantedShift>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            n_travelers: 1000,
            start_date: "2019-03-04".into(),
            days_span: 14,
            holidays: Vec::new(),
            network: NetworkConfig::default(),
            trips_per_day: TripsPerDay::default(),
            modes: ModeMix::default(),
            transfer_prob: 0.25,
            covariates: CovariateMix::default(),
            noise: NoiseConfig::default(),
            unique_first_trips: false,
            twin_cards: false,
            twin_jitter_s: 60,
            planted: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    /// Explicit station names; when empty, `n_stations` names are generated.
    pub stations: Vec<String>,
    pub lines: Vec<String>,
    pub n_stations: usize,
    pub n_lines: usize,
    /// Zipf exponent of endpoint popularity; 0 is uniform.
    pub popularity_exponent: f64,
    /// Share of stations and lines placed in Jutland.
    pub jutland_share: f64,
    /// Chance that a diary names a station by its alias.
    pub alias_report_prob: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            stations: Vec::new(),
            lines: Vec::new(),
            n_stations: 120,
            n_lines: 80,
            popularity_exponent: 0.8,
            jutland_share: 0.3,
            alias_report_prob: 0.1,
        }
    }
}

impl NetworkConfig {
    pub fn station_names(&self) -> Vec<String> {
        if self.stations.is_empty() {
            (1..=self.n_stations).map(|k| format!("Station {k:03}")).collect()
        } else {
            self.stations.clone()
        }
    }

    pub fn line_names(&self) -> Vec<String> {
        if self.lines.is_empty() {
            (1..=self.n_lines).map(|k| format!("Bus {k}")).collect()
        } else {
            self.lines.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TripsPerDay {
    pub one: f64,
    pub two: f64,
    pub three: f64,
    /// Drawn travelers report exactly four trips.
    pub four_plus: f64,
}

impl Default for TripsPerDay {
    fn default() -> Self {
        Self {
            one: 0.1,
            two: 0.7,
            three: 0.15,
            four_plus: 0.05,
        }
    }
}

impl TripsPerDay {
    pub fn weights(&self) -> [f64; 4] {
        [self.one, self.two, self.three, self.four_plus]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModeMix {
    pub train: f64,
    pub bus: f64,
    pub mixed: f64,
}

impl Default for ModeMix {
    fn default() -> Self {
        Self {
            train: 0.5,
            bus: 0.35,
            mixed: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CovariateMix {
    pub female: f64,
    pub interview: InterviewMix,
    /// Share of travelers whose occupation has a flexible schedule.
    pub flexible: f64,
    pub family: FamilyMix,
}

impl Default for CovariateMix {
    fn default() -> Self {
        Self {
            female: 0.52,
            interview: InterviewMix::default(),
            flexible: 0.3,
            family: FamilyMix::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterviewMix {
    pub internet: f64,
    pub telephone: f64,
    pub other: f64,
}

impl Default for InterviewMix {
    fn default() -> Self {
        Self {
            internet: 0.45,
            telephone: 0.5,
            other: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyMix {
    pub single: f64,
    pub older_in_couple: f64,
    pub younger_in_couple: f64,
    pub child_under_25: f64,
}

impl Default for FamilyMix {
    fn default() -> Self {
        Self {
            single: 0.3,
            older_in_couple: 0.3,
            younger_in_couple: 0.25,
            child_under_25: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Grid mixture for reported times. Absent means true times are snapped
    /// to the 5-minute grid so that reports can equal them exactly.
    pub rounding: Option<GridMix>,
    /// Per-stop recall shift, normal with this mean and standard deviation.
    pub recall_shift_mean_s: f64,
    pub recall_shift_std_s: f64,
    /// Per-trip shift added to both stops, normal with mean zero.
    pub trip_shift_std_s: f64,
    pub station_misreport_prob: f64,
    pub missing_tap_out_prob: f64,
    /// Cards without a diary, as a multiple of the number of travelers.
    pub decoy_card_factor: f64,
    /// Uniform delay between arriving at a station and tapping in.
    pub walk_time_max_s: u32,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            rounding: None,
            recall_shift_mean_s: 0.0,
            recall_shift_std_s: 0.0,
            trip_shift_std_s: 0.0,
            station_misreport_prob: 0.0,
            missing_tap_out_prob: 0.0,
            decoy_card_factor: 10.0,
            walk_time_max_s: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridMix {
    pub min5: f64,
    pub min15: f64,
    pub min30: f64,
}

impl Default for GridMix {
    fn default() -> Self {
        Self {
            min5: 1.0,
            min15: 0.0,
            min30: 0.0,
        }
    }
}

/// Extra reporting shift for one covariate level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantedShift {
    /// One of `gender`, `interview`, `schedule`, `family_position`.
    pub grouping: String,
    /// Level code, e.g. `female`.
    pub level: String,
    /// Added to both reported times of every trip of that level.
    pub shift_s: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PlantedLevel {
    Gender(Gender),
    Interview(InterviewType),
    Schedule(ScheduleFlexibility),
    Family(FamilyPosition),
}

impl PlantedShift {
    pub(crate) fn level(&self) -> Result<PlantedLevel, SynthError> {
        let bad = || invalid("planted.level", format!("{:?} is not a {} level", self.level, self.grouping));
        match self.grouping.as_str() {
            "gender" => Gender::parse(&self.level).map(PlantedLevel::Gender).ok_or_else(bad),
            "interview" => InterviewType::parse(&self.level).map(PlantedLevel::Interview).ok_or_else(bad),
            "schedule" => ScheduleFlexibility::parse(&self.level).map(PlantedLevel::Schedule).ok_or_else(bad),
            "family_position" => FamilyPosition::parse(&self.level).map(PlantedLevel::Family).ok_or_else(bad),
            other => Err(invalid("planted.grouping", format!("unknown grouping {other:?}"))),
        }
    }
}

fn invalid(field: &str, reason: impl Into<String>) -> SynthError {
    SynthError::InvalidConfig {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn prob(field: &str, p: f64) -> Result<(), SynthError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(field, format!("probability {p} outside [0, 1]")))
    }
}

fn distribution(field: &str, parts: &[(&str, f64)]) -> Result<(), SynthError> {
    for (name, p) in parts {
        prob(&format!("{field}.{name}"), *p)?;
    }
    let sum: f64 = parts.iter().map(|(_, p)| p).sum();
    if (sum - 1.0).abs() > SUM_TOL {
        return Err(invalid(field, format!("probabilities sum to {sum}")));
    }
    Ok(())
}

fn non_negative(field: &str, v: f64) -> Result<(), SynthError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("expected a finite value >= 0, got {v}")))
    }
}

fn distinct_names(field: &str, names: &[String]) -> Result<(), SynthError> {
    let mut seen = std::collections::HashSet::new();
    for n in names {
        let f = fold_name(n);
        if f.is_empty() {
            return Err(invalid(field, "empty name"));
        }
        if !seen.insert(f) {
            return Err(invalid(field, format!("duplicate name {n:?}")));
        }
    }
    Ok(())
}

/// Checked form of a config, ready for generation.
#[derive(Debug, Clone)]
pub(crate) struct Validated {
    pub start: NaiveDate,
    pub holidays: Vec<NaiveDate>,
    pub stations: Vec<String>,
    pub lines: Vec<String>,
    pub planted: Option<(PlantedLevel, i64)>,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        self.checked().map(|_| ())
    }

    pub(crate) fn checked(&self) -> Result<Validated, SynthError> {
        if self.n_travelers < 1 {
            return Err(invalid("n_travelers", "must be at least 1"));
        }
        if self.days_span < 1 {
            return Err(invalid("days_span", "must be at least 1"));
        }
        let start = parse_date(&self.start_date).map_err(|e| invalid("start_date", e.to_string()))?;
        let holidays = self
            .holidays
            .iter()
            .enumerate()
            .map(|(i, d)| parse_date(d).map_err(|e| invalid(&format!("holidays[{i}]"), e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;

        let net = &self.network;
        let stations = net.station_names();
        let lines = net.line_names();
        if stations.len() < 2 {
            return Err(invalid("network.stations", "need at least 2 stations"));
        }
        if lines.is_empty() {
            return Err(invalid("network.lines", "need at least 1 bus line"));
        }
        distinct_names("network.stations", &stations)?;
        distinct_names("network.lines", &lines)?;
        let mut all: Vec<String> = stations.clone();
        all.extend(lines.iter().cloned());
        distinct_names("network", &all)?;
        non_negative("network.popularity_exponent", net.popularity_exponent)?;
        prob("network.jutland_share", net.jutland_share)?;
        prob("network.alias_report_prob", net.alias_report_prob)?;

        let t = &self.trips_per_day;
        distribution(
            "trips_per_day",
            &[("one", t.one), ("two", t.two), ("three", t.three), ("four_plus", t.four_plus)],
        )?;
        let m = &self.modes;
        distribution("modes", &[("train", m.train), ("bus", m.bus), ("mixed", m.mixed)])?;
        prob("transfer_prob", self.transfer_prob)?;

        let c = &self.covariates;
        prob("covariates.female", c.female)?;
        prob("covariates.flexible", c.flexible)?;
        let i = &c.interview;
        distribution(
            "covariates.interview",
            &[("internet", i.internet), ("telephone", i.telephone), ("other", i.other)],
        )?;
        let f = &c.family;
        distribution(
            "covariates.family",
            &[
                ("single", f.single),
                ("older_in_couple", f.older_in_couple),
                ("younger_in_couple", f.younger_in_couple),
                ("child_under_25", f.child_under_25),
            ],
        )?;

        let n = &self.noise;
        if let Some(g) = &n.rounding {
            distribution("noise.rounding", &[("min5", g.min5), ("min15", g.min15), ("min30", g.min30)])?;
        }
        if !n.recall_shift_mean_s.is_finite() {
            return Err(invalid("noise.recall_shift_mean_s", "must be finite"));
        }
        non_negative("noise.recall_shift_std_s", n.recall_shift_std_s)?;
        non_negative("noise.trip_shift_std_s", n.trip_shift_std_s)?;
        prob("noise.station_misreport_prob", n.station_misreport_prob)?;
        prob("noise.missing_tap_out_prob", n.missing_tap_out_prob)?;
        non_negative("noise.decoy_card_factor", n.decoy_card_factor)?;
        if n.walk_time_max_s > 600 {
            return Err(invalid("noise.walk_time_max_s", "at most 600 s"));
        }
        if self.twin_jitter_s > 120 {
            return Err(invalid("twin_jitter_s", "at most 120 s"));
        }

        let planted = match &self.planted {
            Some(p) => Some((p.level()?, p.shift_s)),
            None => None,
        };
        Ok(Validated {
            start,
            holidays,
            stations,
            lines,
            planted,
        })
    }
}
