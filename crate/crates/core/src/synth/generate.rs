use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use chrono::{Days, NaiveDate};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::ingest::TxType;
use crate::model::{
    FamilyPosition, Gender, InterviewType, LegMode, Region, ScheduleFlexibility, TableRows, Timestamp,
    DIARY_GRID_SECONDS,
};

use super::config::{PlantedLevel, SynthConfig, Validated};
use super::{LinkRow, SynthError};

// Stream layout: every random draw comes from ChaCha8 seeded with the config
// seed, on a stream chosen by purpose (high bits) and entity index (low bits).
const TRAVELER: u64 = 0;
const REPORT: u64 = 1 << 60;
const FIXUP: u64 = 2 << 60;
const FIXUP_OTHER: u64 = 3 << 60;
const TWIN: u64 = 4 << 60;
const DECOY: u64 = 5 << 60;

const DAY_START: i64 = 5 * 3600 + 1800;
const DAY_END: i64 = 22 * 3600;
const MAX_REDRAWS: usize = 10_000;

const FIXED_OCCUPATIONS: [&str; 4] = ["A01", "A02", "A03", "A04"];
const FLEXIBLE_OCCUPATIONS: [&str; 2] = ["B01", "B02"];

fn stream(seed: u64, purpose: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose | index as u64);
    rng
}

/// splitmix64 finalizer; a bijection on u64, so distinct tags give distinct ids.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn card_id(seed: u64, tag: u64) -> Arc<str> {
    Arc::from(format!("{:016x}", mix64(tag.wrapping_add(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Stop {
    Station(u32),
    Line(u32),
}

struct Network {
    stations: Vec<String>,
    lines: Vec<String>,
    station_pick: WeightedIndex<f64>,
    line_pick: WeightedIndex<f64>,
}

impl Network {
    fn new(stations: Vec<String>, lines: Vec<String>, exponent: f64) -> Self {
        let zipf = |n: usize| {
            WeightedIndex::new((0..n).map(|k| (k as f64 + 1.0).powf(-exponent))).expect("non-empty")
        };
        Self {
            station_pick: zipf(stations.len()),
            line_pick: zipf(lines.len()),
            stations,
            lines,
        }
    }

    fn station(&self, rng: &mut ChaCha8Rng, avoid: &[u32]) -> u32 {
        loop {
            let s = self.station_pick.sample(rng) as u32;
            if !avoid.contains(&s) {
                return s;
            }
        }
    }

    fn line(&self, rng: &mut ChaCha8Rng, avoid: &[u32]) -> u32 {
        loop {
            let l = self.line_pick.sample(rng) as u32;
            if !avoid.contains(&l) {
                return l;
            }
        }
    }

    /// A different stop of the same kind, uniformly; the stop itself if it
    /// is the only one of its kind.
    fn other(&self, rng: &mut ChaCha8Rng, s: Stop) -> Stop {
        let pick = |n: usize, cur: u32, rng: &mut ChaCha8Rng| {
            if n < 2 {
                return cur;
            }
            let k = rng.random_range(0..n as u32 - 1);
            if k >= cur {
                k + 1
            } else {
                k
            }
        };
        match s {
            Stop::Station(i) => Stop::Station(pick(self.stations.len(), i, rng)),
            Stop::Line(i) => Stop::Line(pick(self.lines.len(), i, rng)),
        }
    }

    fn name(&self, s: Stop) -> &str {
        match s {
            Stop::Station(i) => &self.stations[i as usize],
            Stop::Line(i) => &self.lines[i as usize],
        }
    }
}

fn alias_of(name: &str) -> String {
    format!("{name} St.")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TripKind {
    Rail,
    Bus,
    BusRail,
    RailBus,
}

#[derive(Debug, Clone, Copy)]
struct Leg {
    mode: LegMode,
    from: Stop,
    to: Stop,
}

#[derive(Debug, Clone)]
struct Trip {
    kind: TripKind,
    legs: Vec<Leg>,
    /// Arrival at the first stop, seconds of day.
    start: i64,
    tap_in: i64,
    transfers: Vec<i64>,
    tap_out: i64,
    tap_out_dropped: bool,
}

impl Trip {
    fn endpoints(&self) -> (Stop, Stop) {
        (self.legs[0].from, self.legs[self.legs.len() - 1].to)
    }

    fn taps(&self, day0: i64, out: &mut Vec<Tap>) {
        out.push(Tap {
            ts: day0 + self.tap_in,
            tx: TxType::TapIn,
            mode: self.legs[0].mode,
            stop: self.legs[0].from,
        });
        for (leg, &t) in self.legs[1..].iter().zip(&self.transfers) {
            out.push(Tap {
                ts: day0 + t,
                tx: TxType::Transfer,
                mode: leg.mode,
                stop: leg.from,
            });
        }
        if !self.tap_out_dropped {
            let last = self.legs[self.legs.len() - 1];
            out.push(Tap {
                ts: day0 + self.tap_out,
                tx: TxType::TapOut,
                mode: last.mode,
                stop: last.to,
            });
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tap {
    pub ts: i64,
    pub tx: TxType,
    pub mode: LegMode,
    pub stop: Stop,
}

fn rail_mode(rng: &mut ChaCha8Rng) -> LegMode {
    if rng.random_bool(0.7) {
        LegMode::Train
    } else {
        LegMode::Metro
    }
}

fn draw_legs(kind: TripKind, two: bool, net: &Network, rng: &mut ChaCha8Rng) -> Vec<Leg> {
    let rail = |from: u32, to: u32, rng: &mut ChaCha8Rng| Leg {
        mode: rail_mode(rng),
        from: Stop::Station(from),
        to: Stop::Station(to),
    };
    let bus = |l: u32| Leg {
        mode: LegMode::Bus,
        from: Stop::Line(l),
        to: Stop::Line(l),
    };
    match kind {
        TripKind::Rail => {
            let a = net.station(rng, &[]);
            if two && net.stations.len() >= 3 {
                let c = net.station(rng, &[a]);
                let b = net.station(rng, &[a, c]);
                vec![rail(a, c, rng), rail(c, b, rng)]
            } else {
                let b = net.station(rng, &[a]);
                vec![rail(a, b, rng)]
            }
        }
        TripKind::Bus => {
            let l1 = net.line(rng, &[]);
            if two && net.lines.len() >= 2 {
                let l2 = net.line(rng, &[l1]);
                vec![bus(l1), bus(l2)]
            } else {
                vec![bus(l1)]
            }
        }
        TripKind::BusRail => {
            let l = net.line(rng, &[]);
            let c = net.station(rng, &[]);
            let b = net.station(rng, &[c]);
            vec![bus(l), rail(c, b, rng)]
        }
        TripKind::RailBus => {
            let a = net.station(rng, &[]);
            let c = net.station(rng, &[a]);
            let l = net.line(rng, &[]);
            vec![rail(a, c, rng), bus(l)]
        }
    }
}

/// New endpoints for the same trip kind. Redraws always use two legs, which
/// offers far more endpoint pairs than a single bus line does.
fn redraw_legs(trip: &mut Trip, net: &Network, rng: &mut ChaCha8Rng) {
    trip.legs = draw_legs(trip.kind, true, net, rng);
    if trip.transfers.len() + 1 != trip.legs.len() {
        let mid = trip.tap_in + (trip.tap_out - trip.tap_in) / 2;
        trip.transfers = (1..trip.legs.len()).map(|_| mid - mid % 60).collect();
    }
}

struct DayPlanner<'a> {
    cfg: &'a SynthConfig,
    net: &'a Network,
    trips_pick: WeightedIndex<f64>,
    mode_pick: WeightedIndex<f64>,
}

impl DayPlanner<'_> {
    fn trip_count(&self, rng: &mut ChaCha8Rng) -> usize {
        self.trips_pick.sample(rng) + 1
    }

    fn plan(&self, rng: &mut ChaCha8Rng, k: usize) -> Vec<Trip> {
        let kinds: Vec<TripKind> = match self.mode_pick.sample(rng) {
            0 => vec![TripKind::Rail; k],
            1 => vec![TripKind::Bus; k],
            _ => {
                const ALL: [TripKind; 4] = [TripKind::Rail, TripKind::Bus, TripKind::BusRail, TripKind::RailBus];
                let mut v: Vec<TripKind> = (0..k).map(|_| ALL[rng.random_range(0..4)]).collect();
                if v.iter().all(|&t| t == TripKind::Rail) || v.iter().all(|&t| t == TripKind::Bus) {
                    v[0] = TripKind::BusRail;
                }
                v
            }
        };
        kinds
            .into_iter()
            .enumerate()
            .map(|(slot, kind)| self.trip(rng, kind, slot, k))
            .collect()
    }

    fn trip(&self, rng: &mut ChaCha8Rng, kind: TripKind, slot: usize, k: usize) -> Trip {
        let two = match kind {
            TripKind::Rail | TripKind::Bus => rng.random_bool(self.cfg.transfer_prob),
            _ => true,
        };
        let legs = draw_legs(kind, two, self.net, rng);
        let snap = self.cfg.noise.rounding.is_none();
        let walk_max = i64::from(self.cfg.noise.walk_time_max_s);
        let grid = i64::from(DIARY_GRID_SECONDS);

        let len = (DAY_END - DAY_START) / k as i64;
        let dur = if snap {
            grid * rng.random_range(3..=15)
        } else {
            rng.random_range(720..=4500)
        };
        let walk = if legs[0].mode.is_rail() && walk_max > 0 {
            rng.random_range(0..=walk_max)
        } else {
            0
        };
        let lo = DAY_START + slot as i64 * len;
        let hi = lo + len - dur - 1200;
        let start = if snap {
            grid * rng.random_range((lo + grid - 1) / grid..=hi / grid)
        } else {
            rng.random_range(lo..=hi)
        };
        let tap_in = start + walk;
        let tap_out = tap_in + dur;
        let transfers = (1..legs.len())
            .map(|_| {
                let t = tap_in + (dur as f64 * rng.random_range(0.35..0.65)) as i64;
                if snap {
                    t - t % 60
                } else {
                    t
                }
            })
            .collect();
        Trip {
            kind,
            legs,
            start,
            tap_in,
            transfers,
            tap_out,
            tap_out_dropped: rng.random_bool(self.cfg.noise.missing_tap_out_prob),
        }
    }
}

struct Traveler {
    day: NaiveDate,
    gender: Gender,
    interview: InterviewType,
    schedule: ScheduleFlexibility,
    occupation: &'static str,
    family: FamilyPosition,
    trips: Vec<Trip>,
}

impl Traveler {
    fn eligible(&self) -> bool {
        matches!(self.trips.len(), 2 | 3)
    }

    fn has_level(&self, level: PlantedLevel) -> bool {
        match level {
            PlantedLevel::Gender(g) => self.gender == g,
            PlantedLevel::Interview(i) => self.interview == i,
            PlantedLevel::Schedule(s) => self.schedule == s,
            PlantedLevel::Family(f) => self.family == f,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct ReportedLeg {
    pub mode: LegMode,
    pub board_station: Option<String>,
    pub alight_station: Option<String>,
    pub board_line: Option<String>,
}

#[derive(Debug, Clone)]
pub(crate) struct ReportedTrip {
    pub legs: Vec<ReportedLeg>,
    pub first: Timestamp,
    pub last: Timestamp,
}

#[derive(Debug, Clone)]
pub(crate) struct Report {
    pub respondent_id: String,
    pub day: NaiveDate,
    pub gender: Gender,
    pub interview: InterviewType,
    pub occupation: &'static str,
    pub family: FamilyPosition,
    pub trips: Vec<ReportedTrip>,
}

/// Round to the nearest multiple of `grid`; exact midpoints go up.
pub(crate) fn round_to_grid(x: i64, grid: i64) -> i64 {
    (x + grid / 2).div_euclid(grid) * grid
}

/// Counts describing one generated dataset.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynthSummary {
    pub travelers: usize,
    pub decoy_cards: usize,
    pub twin_cards: usize,
    pub transactions: usize,
    pub diary_trips: usize,
    pub dropped_tap_outs: usize,
}

/// A generated dataset held in memory; see [`SynthDataset::write_dir`].
pub struct SynthDataset {
    pub(crate) stations: Vec<String>,
    pub(crate) lines: Vec<String>,
    /// Sorted by card id; taps in time order.
    pub(crate) cards: Vec<(Arc<str>, Vec<Tap>)>,
    pub(crate) reports: Vec<Report>,
    pub linkage: Vec<LinkRow>,
    pub tables: TableRows,
    pub summary: SynthSummary,
}

impl SynthDataset {
    pub(crate) fn stop_name(&self, s: Stop) -> &str {
        match s {
            Stop::Station(i) => &self.stations[i as usize],
            Stop::Line(i) => &self.lines[i as usize],
        }
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthDataset, SynthError> {
    let v = cfg.checked()?;
    let net = Network::new(v.stations.clone(), v.lines.clone(), cfg.network.popularity_exponent);
    let planner = DayPlanner {
        cfg,
        net: &net,
        trips_pick: WeightedIndex::new(cfg.trips_per_day.weights()).expect("validated"),
        mode_pick: WeightedIndex::new([cfg.modes.train, cfg.modes.bus, cfg.modes.mixed]).expect("validated"),
    };

    let mut travelers: Vec<Traveler> = (0..cfg.n_travelers)
        .into_par_iter()
        .map(|i| plan_traveler(cfg, &v, &planner, i))
        .collect();

    let reserved = if cfg.unique_first_trips {
        Some(reserve_first_trips(cfg, &net, &mut travelers)?)
    } else {
        None
    };

    let n_decoys = (cfg.noise.decoy_card_factor * cfg.n_travelers as f64).round() as usize;
    let decoys: Vec<(NaiveDate, Vec<Trip>)> = (0..n_decoys)
        .into_par_iter()
        .map(|j| plan_decoy(cfg, &v, &planner, reserved.as_ref(), j))
        .collect::<Result<_, _>>()?;

    let reports: Vec<Report> = travelers
        .par_iter()
        .enumerate()
        .map(|(i, t)| report(cfg, &v, &net, i, t))
        .collect();

    let mut cards: Vec<(Arc<str>, Vec<Tap>)> = Vec::with_capacity(travelers.len() * 2 + decoys.len());
    let mut linkage = Vec::new();
    let mut dropped = 0;
    for (i, (t, r)) in travelers.iter().zip(&reports).enumerate() {
        let id = card_id(cfg.seed, 3 * i as u64);
        let mut ordinal = 0;
        for (k, trip) in t.trips.iter().enumerate() {
            if trip.tap_out_dropped {
                dropped += 1;
                continue;
            }
            ordinal += 1;
            linkage.push(LinkRow {
                respondent_id: r.respondent_id.clone(),
                card_id: id.to_string(),
                trip_index: k as u32 + 1,
                journey_id: format!("{id}#{ordinal}"),
            });
        }
        cards.push((id, day_taps(t.day, &t.trips)));
    }

    let mut n_twins = 0;
    if cfg.twin_cards {
        let jitter = i64::from(cfg.twin_jitter_s);
        let twins: Vec<(Arc<str>, Vec<Tap>)> = cards
            .par_iter()
            .enumerate()
            .map(|(i, (_, taps))| {
                let mut rng = stream(cfg.seed, TWIN, i);
                let taps = taps
                    .iter()
                    .map(|tap| Tap {
                        ts: tap.ts + rng.random_range(-jitter..=jitter),
                        ..*tap
                    })
                    .collect();
                (card_id(cfg.seed, 3 * i as u64 + 1), taps)
            })
            .collect();
        n_twins = twins.len();
        cards.extend(twins);
    }

    for (j, (day, trips)) in decoys.iter().enumerate() {
        cards.push((card_id(cfg.seed, 3 * j as u64 + 2), day_taps(*day, trips)));
    }
    cards.par_sort_unstable_by(|a, b| a.0.cmp(&b.0));

    let summary = SynthSummary {
        travelers: travelers.len(),
        decoy_cards: decoys.len(),
        twin_cards: n_twins,
        transactions: cards.iter().map(|(_, t)| t.len()).sum(),
        diary_trips: travelers.iter().map(|t| t.trips.len()).sum(),
        dropped_tap_outs: dropped,
    };
    Ok(SynthDataset {
        tables: tables(cfg, &v),
        stations: v.stations,
        lines: v.lines,
        cards,
        reports,
        linkage,
        summary,
    })
}

fn day_epoch(day: NaiveDate) -> i64 {
    Timestamp::new(day, 0).expect("midnight").epoch_seconds()
}

fn day_taps(day: NaiveDate, trips: &[Trip]) -> Vec<Tap> {
    let day0 = day_epoch(day);
    let mut taps = Vec::new();
    for t in trips {
        t.taps(day0, &mut taps);
    }
    taps
}

fn draw_day(cfg: &SynthConfig, v: &Validated, rng: &mut ChaCha8Rng) -> NaiveDate {
    v.start + Days::new(rng.random_range(0..u64::from(cfg.days_span)))
}

fn plan_traveler(cfg: &SynthConfig, v: &Validated, planner: &DayPlanner, i: usize) -> Traveler {
    let mut rng = stream(cfg.seed, TRAVELER, i);
    let c = &cfg.covariates;
    let day = draw_day(cfg, v, &mut rng);
    let gender = if rng.random_bool(c.female) {
        Gender::Female
    } else {
        Gender::Male
    };
    let interview = [InterviewType::Internet, InterviewType::Telephone, InterviewType::Other]
        [WeightedIndex::new([c.interview.internet, c.interview.telephone, c.interview.other])
            .expect("validated")
            .sample(&mut rng)];
    let (schedule, occupation) = if rng.random_bool(c.flexible) {
        let k = rng.random_range(0..FLEXIBLE_OCCUPATIONS.len());
        (ScheduleFlexibility::Flexible, FLEXIBLE_OCCUPATIONS[k])
    } else {
        let k = rng.random_range(0..FIXED_OCCUPATIONS.len());
        (ScheduleFlexibility::Fixed, FIXED_OCCUPATIONS[k])
    };
    let f = &c.family;
    let family = [
        FamilyPosition::Single,
        FamilyPosition::OlderInCouple,
        FamilyPosition::YoungerInCouple,
        FamilyPosition::ChildUnder25,
    ][WeightedIndex::new([f.single, f.older_in_couple, f.younger_in_couple, f.child_under_25])
        .expect("validated")
        .sample(&mut rng)];
    let k = planner.trip_count(&mut rng);
    let trips = planner.plan(&mut rng, k);
    Traveler {
        day,
        gender,
        interview,
        schedule,
        occupation,
        family,
        trips,
    }
}

type Reserved = HashMap<NaiveDate, HashSet<(Stop, Stop)>>;

fn network_too_small() -> SynthError {
    SynthError::InvalidConfig {
        field: "unique_first_trips".into(),
        reason: "network too small to give every first trip its own endpoint pair".into(),
    }
}

/// Reserve each eligible traveler's first-trip endpoint pair for its day,
/// in traveler order, then move every other trip off the reserved pairs.
fn reserve_first_trips(
    cfg: &SynthConfig,
    net: &Network,
    travelers: &mut [Traveler],
) -> Result<Reserved, SynthError> {
    let mut reserved: Reserved = HashMap::new();
    for (i, t) in travelers.iter_mut().enumerate() {
        if !t.eligible() {
            continue;
        }
        let mut rng = stream(cfg.seed, FIXUP, i);
        let day = reserved.entry(t.day).or_default();
        let mut tries = 0;
        while !day.insert(t.trips[0].endpoints()) {
            tries += 1;
            if tries > MAX_REDRAWS {
                return Err(network_too_small());
            }
            redraw_legs(&mut t.trips[0], net, &mut rng);
        }
    }
    for (i, t) in travelers.iter_mut().enumerate() {
        let Some(day) = reserved.get(&t.day) else { continue };
        let own = t.eligible().then(|| t.trips[0].endpoints());
        let skip = usize::from(t.eligible());
        let mut rng = stream(cfg.seed, FIXUP_OTHER, i);
        for trip in &mut t.trips[skip..] {
            let mut tries = 0;
            while day.contains(&trip.endpoints()) && own != Some(trip.endpoints()) {
                tries += 1;
                if tries > MAX_REDRAWS {
                    return Err(network_too_small());
                }
                redraw_legs(trip, net, &mut rng);
            }
        }
    }
    Ok(reserved)
}

fn plan_decoy(
    cfg: &SynthConfig,
    v: &Validated,
    planner: &DayPlanner,
    reserved: Option<&Reserved>,
    j: usize,
) -> Result<(NaiveDate, Vec<Trip>), SynthError> {
    let mut rng = stream(cfg.seed, DECOY, j);
    let day = draw_day(cfg, v, &mut rng);
    let k = planner.trip_count(&mut rng);
    let mut trips = planner.plan(&mut rng, k);
    if let Some(day_set) = reserved.and_then(|r| r.get(&day)) {
        for trip in &mut trips {
            let mut tries = 0;
            while day_set.contains(&trip.endpoints()) {
                tries += 1;
                if tries > MAX_REDRAWS {
                    return Err(network_too_small());
                }
                redraw_legs(trip, planner.net, &mut rng);
            }
        }
    }
    Ok((day, trips))
}

fn report(cfg: &SynthConfig, v: &Validated, net: &Network, i: usize, t: &Traveler) -> Report {
    let mut rng = stream(cfg.seed, REPORT, i);
    let n = &cfg.noise;
    let grid_pick = n
        .rounding
        .as_ref()
        .map(|g| WeightedIndex::new([g.min5, g.min15, g.min30]).expect("validated"));
    let planted = match v.planted {
        Some((level, shift)) if t.has_level(level) => shift,
        _ => 0,
    };
    let normal = |rng: &mut ChaCha8Rng, sd: f64| {
        if sd > 0.0 {
            sd * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        }
    };
    let day0 = day_epoch(t.day);

    let trips = t
        .trips
        .iter()
        .map(|trip| {
            let shared = normal(&mut rng, n.trip_shift_std_s);
            let stop_time = |truth: i64, rng: &mut ChaCha8Rng| {
                let shift = shared + n.recall_shift_mean_s + normal(rng, n.recall_shift_std_s);
                let grid = match &grid_pick {
                    None => 300,
                    Some(w) => [300, 900, 1800][w.sample(rng)],
                };
                let x = (truth as f64 + shift).round() as i64 + planted;
                round_to_grid(x, grid)
            };
            let first = stop_time(day0 + trip.start, &mut rng);
            let last = stop_time(day0 + trip.tap_out, &mut rng).max(first);

            let mut legs = trip.legs.clone();
            let last_ix = legs.len() - 1;
            let moved_first = rng.random_bool(n.station_misreport_prob);
            let moved_last = rng.random_bool(n.station_misreport_prob);
            if moved_first {
                legs[0].from = net.other(&mut rng, legs[0].from);
                if legs[0].mode == LegMode::Bus {
                    legs[0].to = legs[0].from;
                }
            }
            // a single bus leg has one line field, already moved above
            let shared_field = last_ix == 0 && legs[0].mode == LegMode::Bus && moved_first;
            if moved_last && !shared_field {
                legs[last_ix].to = net.other(&mut rng, legs[last_ix].to);
                if legs[last_ix].mode == LegMode::Bus {
                    legs[last_ix].from = legs[last_ix].to;
                }
            }

            let station_name = |s: Stop, rng: &mut ChaCha8Rng| {
                let name = net.name(s);
                if rng.random_bool(cfg.network.alias_report_prob) {
                    alias_of(name)
                } else {
                    name.to_string()
                }
            };
            let legs = legs
                .iter()
                .map(|l| {
                    if l.mode.is_rail() {
                        ReportedLeg {
                            mode: l.mode,
                            board_station: Some(station_name(l.from, &mut rng)),
                            alight_station: Some(station_name(l.to, &mut rng)),
                            board_line: None,
                        }
                    } else {
                        ReportedLeg {
                            mode: l.mode,
                            board_station: None,
                            alight_station: None,
                            board_line: Some(net.name(l.from).to_string()),
                        }
                    }
                })
                .collect();
            ReportedTrip {
                legs,
                first: Timestamp::from_epoch_seconds(first),
                last: Timestamp::from_epoch_seconds(last),
            }
        })
        .collect();

    Report {
        respondent_id: format!("R{:07}", i + 1),
        day: t.day,
        gender: t.gender,
        interview: t.interview,
        occupation: t.occupation,
        family: t.family,
        trips,
    }
}

fn tables(cfg: &SynthConfig, v: &Validated) -> TableRows {
    let share = cfg.network.jutland_share;
    let region = |k: usize, n: usize| {
        if (k as f64) < (1.0 - share) * n as f64 {
            Region::ZealandFunen
        } else {
            Region::Jutland
        }
    };
    let mut regions: Vec<(String, Region)> = Vec::new();
    for (k, s) in v.stations.iter().enumerate() {
        regions.push((s.clone(), region(k, v.stations.len())));
    }
    for (k, l) in v.lines.iter().enumerate() {
        regions.push((l.clone(), region(k, v.lines.len())));
    }
    let schedule = FIXED_OCCUPATIONS
        .iter()
        .map(|c| (c.to_string(), ScheduleFlexibility::Fixed))
        .chain(FLEXIBLE_OCCUPATIONS.iter().map(|c| (c.to_string(), ScheduleFlexibility::Flexible)))
        .collect();
    TableRows {
        aliases: v.stations.iter().map(|s| (alias_of(s), s.clone())).collect(),
        holidays: v.holidays.clone(),
        regions,
        schedule,
    }
}
