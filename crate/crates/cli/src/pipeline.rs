//! Stage runners. Each stage reads files, writes files, and logs its row
//! counts; outputs appear only when the stage succeeds.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use log::info;
use taplink_core::ingest::{
    card_trip_frequency, card_trip_frequency_by_day, diary_year_summary, od_daily_counts, parse_diary_file,
    parse_transactions_file, reconstruct_journeys, DiaryRespondent, IngestError, Rejection,
};
use taplink_core::matcher::{match_all, CandidateIndex, MatchSet, MatchStatus};
use taplink_core::metrics::{quadrant_counts, trip_errors};
use taplink_core::model::{MappingTables, TableError};
use taplink_core::synth::{
    generate, SynthConfig, SynthError, DIARY_FILE, LINKAGE_FILE, TABLES_DIR, TRANSACTIONS_FILE,
};

use crate::bundle::{
    build_bundle, rate_rows, CardFrequency, DiaryYearEntry, IngestSummary, OdEntry, ReportBundle, SweepTable,
    TestEntry,
};
use crate::config::{MatchInputs, MatcherConfig, PipelineConfig, StatsConfig};
use crate::error::CliError;
use crate::records::{read_matches, write_errors, write_matches};
use crate::render::{cutoff_label, tables, write_json};
use crate::staging::Staged;

pub const INPUT_DIR: &str = "input";
pub const MATCH_DIR: &str = "match";
pub const ANALYSIS_DIR: &str = "analysis";
pub const REPORT_DIR: &str = "report";

pub const MATCHES_FILE: &str = "matches.csv";
pub const MATCH_SUMMARY_FILE: &str = "match_summary.json";
pub const REJECTIONS_FILE: &str = "rejections.csv";
pub const STAGES_FILE: &str = "stages.csv";
pub const ERRORS_FILE: &str = "errors.csv";
pub const BUNDLE_FILE: &str = "bundle.json";
pub const TESTS_FILE: &str = "tests.csv";
pub const SECOND_CARD_TESTS_FILE: &str = "second_card_tests.csv";
pub const REPORT_JSON_FILE: &str = "report.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Row counts of one run, logged as they are recorded and written to
/// `stages.csv`.
#[derive(Debug, Default)]
pub struct StageLog {
    rows: Vec<(&'static str, &'static str, u64)>,
}

impl StageLog {
    pub fn record(&mut self, stage: &'static str, what: &'static str, n: impl TryInto<u64>) {
        let n = n.try_into().unwrap_or(u64::MAX);
        info!("{stage}: {what} = {n}");
        self.rows.push((stage, what, n));
    }

    pub fn get(&self, stage: &str, what: &str) -> Option<u64> {
        self.rows.iter().find(|r| r.0 == stage && r.1 == what).map(|r| r.2)
    }

    fn write(&self, staged: &Staged, stage: &'static str) -> Result<(), CliError> {
        let path = staged.path(STAGES_FILE);
        let mut w = csv::Writer::from_writer(staged.create(STAGES_FILE)?);
        let res = (|| {
            w.write_record(["stage", "metric", "rows"])?;
            for (s, m, n) in &self.rows {
                w.write_record([*s, *m, &n.to_string()])?;
            }
            w.flush()
        })();
        res.map_err(CliError::io(stage, path))
    }
}

fn csv_err(stage: &'static str, path: PathBuf) -> impl FnOnce(csv::Error) -> CliError {
    move |e| match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io { stage, path, source },
        other => CliError::invariant(stage, format!("{}: {other:?}", path.display())),
    }
}

fn ingest_err<'a>(stage: &'static str, path: &'a Path) -> impl FnOnce(IngestError) -> CliError + 'a {
    move |e| match e {
        IngestError::FileUnreadable { path, source } => CliError::Io { stage, path, source },
        IngestError::MalformedRow { .. } => CliError::schema(stage, format!("{}: {e}", path.display())),
    }
}

pub fn load_tables(stage: &'static str, dir: &Path) -> Result<MappingTables, CliError> {
    MappingTables::load_dir(dir).map_err(|e| match e {
        TableError::Missing(_) => CliError::Config(e.to_string()),
        TableError::Malformed { .. } => CliError::schema(stage, e),
        TableError::Io { path, source } => CliError::Io { stage, path, source },
    })
}

pub fn load_diary(stage: &'static str, path: &Path, tables: &MappingTables) -> Result<(Vec<DiaryRespondent>, Vec<Rejection>), CliError> {
    if !path.is_file() {
        return Err(CliError::Config(format!("diary file not found: {}", path.display())));
    }
    parse_diary_file(path, tables).map_err(ingest_err(stage, path))
}

fn write_json_file<T: serde::Serialize>(staged: &Staged, stage: &'static str, name: &str, v: &T) -> Result<(), CliError> {
    let path = staged.path(name);
    let mut w = staged.create(name)?;
    serde_json::to_writer_pretty(&mut w, v)
        .map_err(std::io::Error::from)
        .and_then(|_| writeln!(w))
        .and_then(|_| w.flush())
        .map_err(CliError::io(stage, path))
}

/// `synth`: generate a dataset and write it under `out`.
pub fn run_synth(cfg: &SynthConfig, out: &Path) -> Result<StageLog, CliError> {
    const STAGE: &str = "synth";
    let ds = generate(cfg).map_err(|e| match e {
        SynthError::InvalidConfig { .. } => CliError::Config(format!("synth: {e}")),
        other => CliError::invariant(STAGE, other),
    })?;
    let staged = Staged::new(STAGE, out)?;
    let synth_io = |name: &str| {
        let path = staged.path(name);
        move |e: SynthError| match e {
            SynthError::Io(source) => CliError::Io { stage: STAGE, path, source },
            other => CliError::invariant(STAGE, other),
        }
    };
    let flush = |name: &str, f: &dyn Fn(&mut std::io::BufWriter<File>) -> Result<(), SynthError>| {
        let mut w = staged.create(name)?;
        f(&mut w).map_err(synth_io(name))?;
        w.flush().map_err(CliError::io(STAGE, staged.path(name)))
    };
    flush(TRANSACTIONS_FILE, &|w| ds.write_transactions(w))?;
    flush(DIARY_FILE, &|w| ds.write_diary(w))?;
    flush(LINKAGE_FILE, &|w| ds.write_linkage(w))?;
    let tables = staged.path(TABLES_DIR);
    ds.tables.write_dir(&tables).map_err(CliError::io(STAGE, &tables))?;

    let mut log = StageLog::default();
    let s = &ds.summary;
    log.record(STAGE, "travelers", s.travelers);
    log.record(STAGE, "decoy_cards", s.decoy_cards);
    log.record(STAGE, "twin_cards", s.twin_cards);
    log.record(STAGE, "transactions", s.transactions);
    log.record(STAGE, "diary_trips", s.diary_trips);
    log.record(STAGE, "dropped_tap_outs", s.dropped_tap_outs);
    log.record(STAGE, "linkage_rows", ds.linkage.len());
    log.write(&staged, STAGE)?;
    staged.commit()?;
    Ok(log)
}

fn write_rejections(
    staged: &Staged,
    stage: &'static str,
    tx: &[Rejection],
    diary: &[Rejection],
) -> Result<(), CliError> {
    let path = staged.path(REJECTIONS_FILE);
    let mut w = csv::Writer::from_writer(staged.create(REJECTIONS_FILE)?);
    let res = (|| {
        w.write_record(["file", "line", "reason", "detail"])?;
        for (file, rows) in [("transactions", tx), ("diary", diary)] {
            for r in rows {
                w.write_record([file, &r.line.to_string(), r.reason.code(), &r.detail])?;
            }
        }
        w.flush()
    })();
    res.map_err(CliError::io(stage, path))
}

/// `match`: ingest, reconstruct journeys, and match every eligible
/// respondent. Writes `matches.csv`, `match_summary.json`, `rejections.csv`
/// and `stages.csv` under `out`.
pub fn run_match(inputs: &MatchInputs, matcher: &MatcherConfig, out: &Path) -> Result<StageLog, CliError> {
    const STAGE: &str = "match";
    inputs.validate()?;
    let mut log = StageLog::default();
    let tables = load_tables("ingest", &inputs.tables)?;

    let (transactions, tx_rejected) =
        parse_transactions_file(&inputs.transactions, &tables.aliases).map_err(ingest_err("ingest", &inputs.transactions))?;
    let n_tx = transactions.len();
    log.record("ingest", "transactions", n_tx);
    log.record("ingest", "transactions_rejected", tx_rejected.len());

    let (journeys, orphans) = reconstruct_journeys(transactions);
    let in_journeys: usize = journeys.iter().map(|j| j.taps.len()).sum();
    if in_journeys + orphans.len() != n_tx {
        return Err(CliError::invariant(
            "ingest",
            format!("{n_tx} taps in, {in_journeys} in journeys + {} orphans out", orphans.len()),
        ));
    }
    log.record("ingest", "journeys", journeys.len());
    log.record("ingest", "orphan_taps", orphans.len());

    let (respondents, diary_rejected) = load_diary("ingest", &inputs.diary, &tables)?;
    log.record("ingest", "respondents", respondents.len());
    log.record("ingest", "respondents_rejected", diary_rejected.len());

    let card_frequency = CardFrequency::new(card_trip_frequency(&journeys), &card_trip_frequency_by_day(&journeys));
    let od = OdEntry::new(&od_daily_counts(&journeys));
    let diary_years: Vec<DiaryYearEntry> = diary_year_summary(&respondents).iter().map(Into::into).collect();

    let index = CandidateIndex::build(journeys);
    log.record("index", "journeys", index.len());
    let (set, rates) = match_all(&respondents, &index, &tables.aliases, matcher.options());
    let matched = set.matched().count();
    log.record("classify", "eligible", set.results.len());
    log.record(STAGE, "matched", matched);
    log.record(STAGE, "no_candidate", set.results.len() - matched);
    log.record(STAGE, "ties", set.results.iter().filter(|m| m.tie).count());

    for m in set.matched() {
        for c in m.best.iter().chain(&m.second_best) {
            // the store is sorted by card, and only cards with a complete
            // journey from the transactions can be in it
            let store = index.journeys();
            if store.binary_search_by(|j| j.card_id.cmp(&c.card_id)).is_err() {
                return Err(CliError::invariant(STAGE, format!("matched card {} not in the transactions", c.card_id)));
            }
        }
    }
    if rates.total.eligible as usize != set.results.len() || rates.total.matched as usize != matched {
        return Err(CliError::invariant(STAGE, "match-rate totals disagree with the match set"));
    }

    let summary = IngestSummary {
        transactions: n_tx,
        transactions_rejected: tx_rejected.len(),
        journeys: index.len(),
        orphan_taps: orphans.len(),
        respondents: respondents.len(),
        respondents_rejected: diary_rejected.len(),
        eligible: set.results.len(),
        match_rates: rate_rows(&rates),
        card_frequency,
        od,
        diary_years,
    };

    let staged = Staged::new(STAGE, out)?;
    let path = staged.path(MATCHES_FILE);
    write_matches(staged.create(MATCHES_FILE)?, &set).map_err(csv_err(STAGE, path))?;
    write_json_file(&staged, STAGE, MATCH_SUMMARY_FILE, &summary)?;
    write_rejections(&staged, STAGE, &tx_rejected, &diary_rejected)?;
    log.write(&staged, STAGE)?;
    staged.commit()?;
    Ok(log)
}

pub fn read_matches_file(stage: &'static str, path: &Path) -> Result<MatchSet, CliError> {
    let f = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::Config(format!("matches file not found: {}", path.display())),
        _ => CliError::io(stage, path)(e),
    })?;
    read_matches(BufReader::new(f)).map_err(|e| CliError::schema(stage, format!("{}: {e}", path.display())))
}

fn read_summary(stage: &'static str, path: &Path) -> Result<Option<IngestSummary>, CliError> {
    if !path.is_file() {
        return Ok(None);
    }
    let f = File::open(path).map_err(CliError::io(stage, path))?;
    serde_json::from_reader(BufReader::new(f))
        .map(Some)
        .map_err(|e| CliError::schema(stage, format!("{}: {e}", path.display())))
}

fn write_tests(staged: &Staged, stage: &'static str, name: &str, sections: &[(&str, &[SweepTable])], paired: &[(Option<f64>, &TestEntry)]) -> Result<(), CliError> {
    let path = staged.path(name);
    let mut w = csv::Writer::from_writer(staged.create(name)?);
    let row = |w: &mut csv::Writer<_>, section: &str, grouping: &str, cutoff: Option<f64>, t: &TestEntry| {
        let num = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([
            section,
            grouping,
            &cutoff_label(cutoff),
            t.method.as_deref().unwrap_or(""),
            &num(t.statistic),
            &num(t.p_value),
            &num(t.p_bonferroni),
            &t.stars,
            t.mode.as_deref().unwrap_or(""),
            &t.n.iter().map(usize::to_string).collect::<Vec<_>>().join(";"),
            t.insufficient.as_deref().unwrap_or(""),
        ])
    };
    let res = (|| {
        w.write_record([
            "section",
            "grouping",
            "cutoff",
            "method",
            "statistic",
            "p_value",
            "p_bonferroni",
            "stars",
            "p_mode",
            "n",
            "note",
        ])?;
        for (section, tables) in sections {
            for t in *tables {
                for r in &t.rows {
                    row(&mut w, section, &t.grouping, r.cutoff_min, &r.test)?;
                }
            }
        }
        for (c, t) in paired {
            row(&mut w, "paired", "trip_order", *c, t)?;
        }
        w.flush().map_err(csv::Error::from)
    })();
    res.map_err(csv_err(stage, path))
}

/// `analyze`: per-trip errors, statistics and the second-card analysis.
/// Reads `match_summary.json` next to the matches file when present.
pub fn run_analyze(
    matches: &Path,
    diary: &Path,
    tables_dir: &Path,
    stats: &StatsConfig,
    out: &Path,
) -> Result<(StageLog, ReportBundle), CliError> {
    const STAGE: &str = "analyze";
    stats.validate()?;
    MappingTables::check_dir(tables_dir).map_err(|e| CliError::Config(e.to_string()))?;
    let mut log = StageLog::default();
    let set = read_matches_file(STAGE, matches)?;
    let tables = load_tables(STAGE, tables_dir)?;
    let (respondents, _) = load_diary(STAGE, diary, &tables)?;
    let summary_path = matches.with_file_name(MATCH_SUMMARY_FILE);
    let ingest = read_summary(STAGE, &summary_path)?;

    let records = trip_errors(&set, &respondents);
    log.record("errors", "respondents_matched", set.matched().count());
    log.record("errors", "trips", records.len());

    let matched: HashSet<&str> = set
        .results
        .iter()
        .filter(|m| m.status == MatchStatus::Matched)
        .map(|m| &*m.respondent_id)
        .collect();
    if let Some(r) = records.iter().find(|r| !matched.contains(&*r.respondent_id)) {
        return Err(CliError::invariant(STAGE, format!("error record for unmatched respondent {}", r.respondent_id)));
    }
    let q = quadrant_counts(&records);
    if q.total() != records.len() as u64 {
        return Err(CliError::invariant(
            STAGE,
            format!("quadrant tallies sum to {} over {} trips", q.total(), records.len()),
        ));
    }

    let bundle = build_bundle(&set, &respondents, &records, stats, ingest);
    log.record("stats", "two_level_tables", bundle.two_level.len());
    log.record("stats", "multi_level_tables", bundle.multi_level.len());
    log.record("stats", "second_card_substituted", bundle.second_card.substituted);

    let staged = Staged::new(STAGE, out)?;
    let path = staged.path(ERRORS_FILE);
    write_errors(staged.create(ERRORS_FILE)?, &records).map_err(csv_err(STAGE, path))?;
    write_json_file(&staged, STAGE, BUNDLE_FILE, &bundle)?;
    let paired: Vec<(Option<f64>, &TestEntry)> = bundle.paired.iter().map(|p| (p.cutoff_min, &p.test)).collect();
    write_tests(
        &staged,
        STAGE,
        TESTS_FILE,
        &[("two_level", &bundle.two_level), ("multi_level", &bundle.multi_level)],
        &paired,
    )?;
    let sc = &bundle.second_card;
    write_tests(
        &staged,
        STAGE,
        SECOND_CARD_TESTS_FILE,
        &[("two_level", &sc.two_level), ("multi_level", &sc.multi_level)],
        &[],
    )?;
    log.write(&staged, STAGE)?;
    staged.commit()?;
    Ok((log, bundle))
}

pub fn read_bundle(stage: &'static str, analysis_dir: &Path) -> Result<ReportBundle, CliError> {
    let path = analysis_dir.join(BUNDLE_FILE);
    let f = File::open(&path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::Config(format!("analysis bundle not found: {}", path.display())),
        _ => CliError::io(stage, &path)(e),
    })?;
    serde_json::from_reader(BufReader::new(f)).map_err(|e| CliError::schema(stage, format!("{}: {e}", path.display())))
}

/// `report`: render the bundle in `analysis_dir` into `out`.
pub fn run_report(analysis_dir: &Path, formats: &[ReportFormat], out: &Path) -> Result<(), CliError> {
    const STAGE: &str = "report";
    let bundle = read_bundle(STAGE, analysis_dir)?;
    let tables = tables(&bundle);
    let staged = Staged::new(STAGE, out)?;
    for f in formats {
        match f {
            ReportFormat::Csv => {
                for t in &tables {
                    let name = format!("{}.csv", t.name);
                    let path = staged.path(&name);
                    t.write_csv(staged.create(&name)?).map_err(csv_err(STAGE, path))?;
                }
            }
            ReportFormat::Json => {
                let path = staged.path(REPORT_JSON_FILE);
                write_json(staged.create(REPORT_JSON_FILE)?, &tables)
                    .map_err(|e| CliError::io(STAGE, path)(e.into()))?;
            }
        }
    }
    info!("{STAGE}: {} tables", tables.len());
    staged.commit()
}

/// `all`: optional synthesis, then match, analyze and report (CSV and JSON)
/// under `paths.out`.
pub fn run_all(cfg: &PipelineConfig) -> Result<ReportBundle, CliError> {
    let out = &cfg.paths.out;
    let inputs = cfg.match_inputs()?;
    if cfg.synth.is_none() {
        inputs.validate()?;
    }
    if let Some(s) = &cfg.synth {
        run_synth(s, &out.join(INPUT_DIR))?;
    }
    let match_dir = out.join(MATCH_DIR);
    run_match(&inputs, &cfg.matcher, &match_dir)?;
    let analysis_dir = out.join(ANALYSIS_DIR);
    let (_, bundle) = run_analyze(
        &match_dir.join(MATCHES_FILE),
        &inputs.diary,
        &inputs.tables,
        &cfg.stats,
        &analysis_dir,
    )?;
    run_report(&analysis_dir, &[ReportFormat::Csv, ReportFormat::Json], &out.join(REPORT_DIR))?;
    Ok(bundle)
}
