use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::ingest::{
    parse_diary, parse_transactions, CardTransaction, DiaryRespondent, DIARY_HEADER, TRANSACTIONS_HEADER,
};
use crate::model::{EndpointKind, MappingTables, Timestamp};

use super::generate::{Stop, SynthDataset};
use super::SynthError;

pub const TRANSACTIONS_FILE: &str = "transactions.csv";
pub const DIARY_FILE: &str = "diary.csv";
pub const LINKAGE_FILE: &str = "linkage.csv";
pub const TABLES_DIR: &str = "tables";
pub const LINKAGE_HEADER: [&str; 4] = ["respondent_id", "card_id", "trip_index", "journey_id"];

impl SynthDataset {
    pub fn write_transactions<W: Write>(&self, w: W) -> Result<(), SynthError> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(TRANSACTIONS_HEADER)?;
        let mut ts = String::new();
        for (card, taps) in &self.cards {
            for tap in taps {
                ts.clear();
                use std::fmt::Write as _;
                write!(ts, "{}", Timestamp::from_epoch_seconds(tap.ts)).expect("string write");
                let (kind, raw) = match tap.stop {
                    // card readers log station names in capitals
                    Stop::Station(_) => (EndpointKind::Station, self.stop_name(tap.stop).to_uppercase()),
                    Stop::Line(_) => (EndpointKind::BusLine, self.stop_name(tap.stop).to_string()),
                };
                w.write_record([card.as_ref(), &ts, tap.tx.code(), tap.mode.code(), kind.code(), &raw])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_diary<W: Write>(&self, w: W) -> Result<(), SynthError> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(DIARY_HEADER)?;
        for r in &self.reports {
            let day = r.day.format("%Y-%m-%d").to_string();
            for (t, trip) in r.trips.iter().enumerate() {
                let first = trip.first.to_string();
                let last = trip.last.to_string();
                let ti = (t + 1).to_string();
                for (l, leg) in trip.legs.iter().enumerate() {
                    let li = (l + 1).to_string();
                    let opt = |s: &Option<String>| s.clone().unwrap_or_default();
                    w.write_record([
                        r.respondent_id.as_str(),
                        &day,
                        &ti,
                        &li,
                        leg.mode.code(),
                        &opt(&leg.board_station),
                        &opt(&leg.alight_station),
                        &opt(&leg.board_line),
                        &first,
                        &last,
                        r.gender.code(),
                        r.interview.code(),
                        r.occupation,
                        r.family.code(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_linkage<W: Write>(&self, w: W) -> Result<(), SynthError> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(LINKAGE_HEADER)?;
        for l in &self.linkage {
            w.write_record([&l.respondent_id, &l.card_id, &l.trip_index.to_string(), &l.journey_id])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Write the three data files and the lookup tables (in a `tables`
    /// subdirectory) under `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<(), SynthError> {
        std::fs::create_dir_all(dir)?;
        let open = |name: &str| -> Result<BufWriter<File>, SynthError> {
            Ok(BufWriter::with_capacity(1 << 20, File::create(dir.join(name))?))
        };
        self.write_transactions(open(TRANSACTIONS_FILE)?)?;
        self.write_diary(open(DIARY_FILE)?)?;
        self.write_linkage(open(LINKAGE_FILE)?)?;
        self.tables.write_dir(&dir.join(TABLES_DIR))?;
        Ok(())
    }

    /// Round-trip the dataset through its CSV form and the ingest parsers,
    /// without touching the filesystem.
    pub fn parse(&self) -> Result<ParsedSynth, SynthError> {
        let tables = self
            .tables
            .to_tables()
            .map_err(|e| SynthError::Reparse(e.to_string()))?;
        let mut buf = Vec::new();
        self.write_transactions(&mut buf)?;
        let (transactions, rejected) = parse_transactions(buf.as_slice(), &tables.aliases)
            .map_err(|e| SynthError::Reparse(e.to_string()))?;
        if let Some(r) = rejected.first() {
            return Err(SynthError::Reparse(format!("transaction rejected: {r:?}")));
        }
        buf.clear();
        self.write_diary(&mut buf)?;
        let (respondents, rejected) =
            parse_diary(buf.as_slice(), &tables).map_err(|e| SynthError::Reparse(e.to_string()))?;
        if let Some(r) = rejected.first() {
            return Err(SynthError::Reparse(format!("diary respondent rejected: {r:?}")));
        }
        Ok(ParsedSynth {
            tables,
            transactions,
            respondents,
        })
    }
}

pub struct ParsedSynth {
    pub tables: MappingTables,
    pub transactions: Vec<CardTransaction>,
    pub respondents: Vec<DiaryRespondent>,
}
