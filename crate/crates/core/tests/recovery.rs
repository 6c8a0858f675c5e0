use std::collections::HashMap;

use taplink_core::ingest::reconstruct_journeys;
use taplink_core::matcher::{match_all, CandidateIndex, MatchOptions, MatchStatus};
use taplink_core::synth::{generate, NoiseConfig, SynthConfig};

fn recover(cfg: &SynthConfig) -> (usize, usize, usize) {
    let ds = generate(cfg).unwrap();
    let p = ds.parse().unwrap();
    let (journeys, _) = reconstruct_journeys(p.transactions);
    let index = CandidateIndex::build(journeys);
    let (set, summary) = match_all(&p.respondents, &index, &p.tables.aliases, MatchOptions::default());

    let mut truth: HashMap<&str, (&str, Vec<(u32, &str)>)> = HashMap::new();
    for l in &ds.linkage {
        let e = truth.entry(&l.respondent_id).or_insert((&l.card_id, Vec::new()));
        e.1.push((l.trip_index, &l.journey_id));
    }
    let mut exact = 0;
    for m in &set.results {
        assert_eq!(m.status, MatchStatus::Matched, "{}", m.respondent_id);
        let best = m.best.as_ref().unwrap();
        let (card, trips) = &truth[m.respondent_id.as_ref()];
        let got: Vec<(u32, &str)> = best.trips.iter().map(|t| (t.index_in_day, t.journey.as_str())).collect();
        if *best.card_id == **card && got == *trips && best.total_delta_t == 0 {
            exact += 1;
        }
    }
    (summary.total.eligible as usize, summary.total.matched as usize, exact)
}

#[test]
fn unique_first_trips_recover_the_linkage() {
    let cfg = SynthConfig {
        n_travelers: 2000,
        days_span: 3,
        unique_first_trips: true,
        network: taplink_core::synth::NetworkConfig {
            n_stations: 150,
            n_lines: 100,
            ..Default::default()
        },
        noise: NoiseConfig {
            decoy_card_factor: 10.0,
            ..Default::default()
        },
        ..Default::default()
    };
    let (eligible, matched, exact) = recover(&cfg);
    assert!(eligible > 1500);
    assert_eq!(matched, eligible);
    assert_eq!(exact, eligible);
}
