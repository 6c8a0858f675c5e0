use std::fs;
use std::path::Path;
use std::process::Command;

use taplink::config::{MatchInputs, MatcherConfig, StatsConfig};
use taplink::pipeline::{self, ReportFormat};
use taplink::render;
use taplink_core::model::tables::REGIONS_FILE;
use taplink_core::synth::{NoiseConfig, SynthConfig};

const BIN: &str = env!("CARGO_BIN_EXE_taplink");

fn small_config(noise: NoiseConfig) -> SynthConfig {
    SynthConfig {
        seed: 5,
        n_travelers: 300,
        days_span: 5,
        noise,
        ..Default::default()
    }
}

fn write_config(dir: &Path, cfg: &SynthConfig) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    let mut doc: toml::Table = toml::from_str("[paths]\nout = \"out\"\n").unwrap();
    doc.insert("synth".into(), toml::Value::try_from(cfg).unwrap());
    fs::write(&path, toml::to_string(&doc).unwrap()).unwrap();
    path
}

fn run(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).env("RUST_LOG", "warn").output().unwrap()
}

#[test]
fn noise_free_data_matches_everyone_with_zero_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("input");
    pipeline::run_synth(&small_config(NoiseConfig::default()), &input).unwrap();
    let inputs = MatchInputs {
        transactions: input.join("transactions.csv"),
        diary: input.join("diary.csv"),
        tables: input.join("tables"),
    };
    pipeline::run_match(&inputs, &MatcherConfig::default(), &dir.path().join("m")).unwrap();
    let (_, bundle) = pipeline::run_analyze(
        &dir.path().join("m/matches.csv"),
        &inputs.diary,
        &inputs.tables,
        &StatsConfig::default(),
        &dir.path().join("a"),
    )
    .unwrap();

    let total = bundle.ingest.as_ref().unwrap().match_rates.last().unwrap().clone();
    assert!(total.year.is_none());
    assert_eq!(render::fmt2(total.percent.unwrap()), "100.00");
    let overall = &bundle.overall;
    for d in [&overall.abs_first, &overall.abs_last] {
        let d = d.as_ref().unwrap();
        assert_eq!(render::fmt2(d.median), "0.00");
        assert_eq!(render::fmt2(d.max), "0.00");
    }

    pipeline::run_report(&dir.path().join("a"), &[ReportFormat::Csv], &dir.path().join("r")).unwrap();
    let t4 = fs::read_to_string(dir.path().join("r/table4_match_rate.csv")).unwrap();
    assert!(t4.lines().last().unwrap().ends_with(",100.00"), "{t4}");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let noise = NoiseConfig {
        rounding: Some(Default::default()),
        recall_shift_std_s: 300.0,
        decoy_card_factor: 2.0,
        ..Default::default()
    };
    let cfg = write_config(dir.path(), &small_config(noise));
    let cfg = cfg.to_str().unwrap();
    let mut snapshots = Vec::new();
    for _ in 0..2 {
        let out = run(&["all", "--config", cfg]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let mut files = Vec::new();
        for sub in ["match", "analysis", "report"] {
            let mut names: Vec<_> = fs::read_dir(dir.path().join("out").join(sub))
                .unwrap()
                .map(|e| e.unwrap().path())
                .filter(|p| p.is_file())
                .collect();
            names.sort();
            for p in names {
                files.push((p.clone(), fs::read(&p).unwrap()));
            }
        }
        assert!(!files.is_empty());
        snapshots.push(files);
    }
    assert!(snapshots[0] == snapshots[1]);
}

#[test]
fn missing_mapping_table_is_a_config_error_naming_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("input");
    pipeline::run_synth(&small_config(NoiseConfig::default()), &input).unwrap();
    let regions = input.join("tables").join(REGIONS_FILE);
    fs::remove_file(&regions).unwrap();

    let s = |p: &Path| p.to_str().unwrap().to_string();
    let out = run(&[
        "match",
        "--diary",
        &s(&input.join("diary.csv")),
        "--transactions",
        &s(&input.join("transactions.csv")),
        "--tables",
        &s(&input.join("tables")),
        "--out",
        &s(&dir.path().join("m")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains(REGIONS_FILE), "{stderr}");
    assert!(!dir.path().join("m").join(pipeline::MATCHES_FILE).exists());
}

#[test]
fn zero_threads_is_rejected() {
    let out = run(&["--threads", "0", "report", "--analysis", "nowhere", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(2));
}
