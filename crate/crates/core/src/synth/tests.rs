use super::generate::round_to_grid;
use super::*;
use crate::ingest::reconstruct_journeys;

fn small() -> SynthConfig {
    SynthConfig {
        n_travelers: 300,
        days_span: 3,
        noise: NoiseConfig {
            decoy_card_factor: 2.0,
            ..Default::default()
        },
        ..Default::default()
    }
}

fn bytes(ds: &SynthDataset) -> (Vec<u8>, Vec<u8>, Vec<u8>) {
    let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
    ds.write_transactions(&mut a).unwrap();
    ds.write_diary(&mut b).unwrap();
    ds.write_linkage(&mut c).unwrap();
    (a, b, c)
}

fn truth(ds: &SynthDataset) -> Vec<TruthError> {
    let p = ds.parse().unwrap();
    let (journeys, _) = reconstruct_journeys(p.transactions);
    truth_error_distribution(&ds.linkage, &journeys, &p.respondents).unwrap()
}

#[test]
fn rounding_midpoint_goes_up() {
    assert_eq!(round_to_grid(150, 300), 300);
    assert_eq!(round_to_grid(149, 300), 0);
    assert_eq!(round_to_grid(-150, 300), 0);
    assert_eq!(round_to_grid(-151, 300), -300);
    assert_eq!(round_to_grid(450, 900), 900);
}

#[test]
fn same_seed_same_bytes() {
    let a = bytes(&generate(&small()).unwrap());
    let b = bytes(&generate(&small()).unwrap());
    assert!(a == b);
    let other = bytes(&generate(&SynthConfig { seed: 2, ..small() }).unwrap());
    assert!(a.1 != other.1);
}

#[test]
fn more_travelers_keep_earlier_ones() {
    let cfg = SynthConfig {
        noise: NoiseConfig {
            decoy_card_factor: 0.0,
            recall_shift_std_s: 200.0,
            rounding: Some(GridMix::default()),
            ..Default::default()
        },
        ..small()
    };
    let a = generate(&cfg).unwrap();
    let b = generate(&SynthConfig { n_travelers: 350, ..cfg }).unwrap();
    let (_, da, la) = bytes(&a);
    let (_, db, lb) = bytes(&b);
    assert!(db.starts_with(&da));
    assert!(lb.starts_with(&la));
}

#[test]
fn zero_noise_reports_equal_taps() {
    let ds = generate(&small()).unwrap();
    let t = truth(&ds);
    assert_eq!(t.len(), ds.summary.diary_trips);
    assert!(t.iter().all(|e| e.signed_first == 0 && e.signed_last == 0));
}

#[test]
fn point_recall_shift() {
    let cfg = SynthConfig {
        noise: NoiseConfig {
            recall_shift_mean_s: 600.0,
            decoy_card_factor: 0.0,
            ..Default::default()
        },
        ..small()
    };
    let t = truth(&generate(&cfg).unwrap());
    assert!(t.iter().all(|e| e.abs_first == 600 && e.signed_first == -600));
}

#[test]
fn noisy_reports_stay_on_grid() {
    let cfg = SynthConfig {
        noise: NoiseConfig {
            rounding: Some(GridMix {
                min5: 0.5,
                min15: 0.3,
                min30: 0.2,
            }),
            recall_shift_std_s: 400.0,
            trip_shift_std_s: 300.0,
            walk_time_max_s: 240,
            station_misreport_prob: 0.1,
            missing_tap_out_prob: 0.1,
            ..Default::default()
        },
        ..small()
    };
    let ds = generate(&cfg).unwrap();
    // parse() fails on any off-grid diary time
    let p = ds.parse().unwrap();
    for r in &p.respondents {
        for t in &r.trips {
            assert_eq!(t.first_ref_time.ts().seconds_of_day() % 300, 0);
            assert!(t.last_ref_time >= t.first_ref_time);
        }
    }
}

#[test]
fn linkage_conservation() {
    let cfg = SynthConfig {
        noise: NoiseConfig {
            missing_tap_out_prob: 0.3,
            ..Default::default()
        },
        ..small()
    };
    let ds = generate(&cfg).unwrap();
    assert!(ds.summary.dropped_tap_outs > 0);
    assert_eq!(ds.linkage.len(), ds.summary.diary_trips - ds.summary.dropped_tap_outs);
    // every linked journey survives reconstruction
    assert_eq!(truth(&ds).len(), ds.linkage.len());
}

#[test]
fn decoys_have_no_diary() {
    let ds = generate(&small()).unwrap();
    assert_eq!(ds.summary.decoy_cards, 600);
    assert_eq!(ds.cards.len(), 900);
    let linked: std::collections::HashSet<&str> = ds.linkage.iter().map(|l| l.card_id.as_str()).collect();
    assert!(linked.len() <= 300);
    let respondents: std::collections::HashSet<&str> =
        ds.linkage.iter().map(|l| l.respondent_id.as_str()).collect();
    assert_eq!(linked.len(), respondents.len());
}

#[test]
fn forced_misreport_on_two_stations() {
    let cfg = SynthConfig {
        network: NetworkConfig {
            stations: vec!["North".into(), "South".into()],
            lines: vec!["1A".into(), "2A".into()],
            alias_report_prob: 0.0,
            ..Default::default()
        },
        noise: NoiseConfig {
            station_misreport_prob: 1.0,
            decoy_card_factor: 0.0,
            ..Default::default()
        },
        ..small()
    };
    let ds = generate(&cfg).unwrap();
    let p = ds.parse().unwrap();
    let (journeys, _) = reconstruct_journeys(p.transactions);
    let by_label: std::collections::HashMap<String, _> = journeys.iter().map(|j| (j.label(), j)).collect();
    let mut checked = 0;
    for l in &ds.linkage {
        let r = p.respondents.iter().find(|r| *r.respondent_id == *l.respondent_id).unwrap();
        let trip = r.trips.iter().find(|t| t.index_in_day == l.trip_index).unwrap();
        let spec = crate::matcher::trip_spec(trip, &p.tables.aliases).unwrap();
        let j = by_label[&l.journey_id];
        assert_ne!(spec.first_key, j.first_endpoint);
        assert_ne!(spec.last_key, j.last_endpoint);
        checked += 1;
    }
    assert!(checked > 0);
}

#[test]
fn five_minute_rounding_error_law() {
    let cfg = SynthConfig {
        n_travelers: 3000,
        noise: NoiseConfig {
            rounding: Some(GridMix::default()),
            decoy_card_factor: 0.0,
            ..Default::default()
        },
        ..small()
    };
    let t = truth(&generate(&cfg).unwrap());
    assert!(t.iter().all(|e| e.abs_first <= 150));
    let mut v: Vec<u64> = t.iter().map(|e| e.abs_first).collect();
    v.sort_unstable();
    let med = v[v.len() / 2] as f64;
    assert!((med - 75.0).abs() < 10.0, "median {med}");
}

#[test]
fn twins_mirror_travelers() {
    let cfg = SynthConfig {
        twin_cards: true,
        ..small()
    };
    let ds = generate(&cfg).unwrap();
    assert_eq!(ds.summary.twin_cards, 300);
    assert_eq!(ds.cards.len(), 1200);
}

#[test]
fn invalid_configs_name_the_field() {
    let field = |cfg: SynthConfig| match cfg.validate() {
        Err(SynthError::InvalidConfig { field, .. }) => field,
        other => panic!("expected InvalidConfig, got {other:?}"),
    };
    assert_eq!(field(SynthConfig { n_travelers: 0, ..small() }), "n_travelers");
    let mut c = small();
    c.trips_per_day.two = 0.8;
    assert_eq!(field(c), "trips_per_day");
    let mut c = small();
    c.noise.missing_tap_out_prob = 1.5;
    assert_eq!(field(c), "noise.missing_tap_out_prob");
    let mut c = small();
    c.noise.rounding = Some(GridMix {
        min5: 0.5,
        min15: 0.5,
        min30: 0.1,
    });
    assert_eq!(field(c), "noise.rounding");
    let mut c = small();
    c.network.stations = vec!["A".into()];
    assert_eq!(field(c), "network.stations");
    let mut c = small();
    c.start_date = "2019-13-01".into();
    assert_eq!(field(c), "start_date");
    let mut c = small();
    c.planted = Some(PlantedShift {
        grouping: "gender".into(),
        level: "robot".into(),
        shift_s: 300,
    });
    assert_eq!(field(c), "planted.level");
    // near-one sums pass
    let mut c = small();
    c.modes = ModeMix {
        train: 0.1 + 0.2,
        bus: 0.7,
        mixed: 0.0,
    };
    assert!(c.validate().is_ok());
}

#[test]
fn broken_link_is_reported() {
    let ds = generate(&small()).unwrap();
    let p = ds.parse().unwrap();
    let (journeys, _) = reconstruct_journeys(p.transactions);
    let mut link = ds.linkage.clone();
    link[3].journey_id = "nope#1".into();
    match truth_error_distribution(&link, &journeys, &p.respondents) {
        Err(SynthError::BrokenLink { row, .. }) => assert_eq!(row, 4),
        other => panic!("expected BrokenLink, got {other:?}"),
    }
}

#[test]
fn linkage_csv_round_trips() {
    let ds = generate(&small()).unwrap();
    let mut buf = Vec::new();
    ds.write_linkage(&mut buf).unwrap();
    assert_eq!(read_linkage(buf.as_slice()).unwrap(), ds.linkage);
}
