//! External lookup tables: endpoint aliases, public holidays, endpoint
//! regions and occupation schedule flexibility.
//!
//! Each table is a headed CSV file in one directory:
//!
//! | file           | columns                               |
//! |----------------|---------------------------------------|
//! | `alias.csv`    | `raw,canonical`                       |
//! | `holidays.csv` | `date` (ISO-8601)                     |
//! | `regions.csv`  | `endpoint_key,region`                 |
//! | `schedule.csv` | `occupation_code,fixed\|flexible`     |

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use super::endpoint::{fold_name, AliasTable};
use super::time::parse_date;
use super::{Region, ScheduleFlexibility};

pub const ALIAS_FILE: &str = "alias.csv";
pub const HOLIDAYS_FILE: &str = "holidays.csv";
pub const REGIONS_FILE: &str = "regions.csv";
pub const SCHEDULE_FILE: &str = "schedule.csv";

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("missing mapping table {0}")]
    Missing(PathBuf),
    #[error("{path}:{line}: {reason}")]
    Malformed {
        path: PathBuf,
        line: u64,
        reason: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl TableError {
    pub fn path(&self) -> &Path {
        match self {
            TableError::Missing(p) => p,
            TableError::Malformed { path, .. } | TableError::Io { path, .. } => path,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct MappingTables {
    pub aliases: AliasTable,
    pub holidays: BTreeSet<NaiveDate>,
    /// Keyed by normalized endpoint key (stations and bus lines share one
    /// namespace here).
    pub regions: HashMap<String, Region>,
    pub schedule: HashMap<String, ScheduleFlexibility>,
}

impl MappingTables {
    pub fn region_of(&self, key: &str) -> Option<Region> {
        self.regions.get(key).copied()
    }

    pub fn schedule_of(&self, occupation_code: &str) -> Option<ScheduleFlexibility> {
        self.schedule.get(occupation_code.trim()).copied()
    }

    /// Check that all four files exist without reading them.
    pub fn check_dir(dir: &Path) -> Result<(), TableError> {
        for name in [ALIAS_FILE, HOLIDAYS_FILE, REGIONS_FILE, SCHEDULE_FILE] {
            let p = dir.join(name);
            if !p.is_file() {
                return Err(TableError::Missing(p));
            }
        }
        Ok(())
    }

    pub fn load_dir(dir: &Path) -> Result<Self, TableError> {
        Self::check_dir(dir)?;

        let alias_path = dir.join(ALIAS_FILE);
        let pairs = read_rows(&alias_path, 2)?;
        let aliases = AliasTable::from_pairs(pairs.iter().map(|(_, r)| (&r[0], &r[1]))).map_err(
            |e| TableError::Malformed {
                path: alias_path.clone(),
                line: 0,
                reason: e.to_string(),
            },
        )?;

        let hol_path = dir.join(HOLIDAYS_FILE);
        let mut holidays = BTreeSet::new();
        for (line, row) in read_rows(&hol_path, 1)? {
            let date = parse_date(&row[0]).map_err(|e| malformed(&hol_path, line, e))?;
            holidays.insert(date);
        }

        let reg_path = dir.join(REGIONS_FILE);
        let mut regions = HashMap::new();
        for (line, row) in read_rows(&reg_path, 2)? {
            let region = Region::parse(&row[1])
                .ok_or_else(|| malformed(&reg_path, line, format!("unknown region {:?}", row[1])))?;
            let folded = fold_name(&row[0]);
            let key = aliases
                .resolve(&folded)
                .map(|a| a.to_string())
                .unwrap_or(folded);
            regions.insert(key, region);
        }

        let sched_path = dir.join(SCHEDULE_FILE);
        let mut schedule = HashMap::new();
        for (line, row) in read_rows(&sched_path, 2)? {
            let flex = ScheduleFlexibility::parse(&row[1]).ok_or_else(|| {
                malformed(&sched_path, line, format!("expected fixed|flexible, got {:?}", row[1]))
            })?;
            schedule.insert(row[0].trim().to_string(), flex);
        }

        Ok(Self {
            aliases,
            holidays,
            regions,
            schedule,
        })
    }
}

fn malformed(path: &Path, line: u64, reason: impl ToString) -> TableError {
    TableError::Malformed {
        path: path.to_path_buf(),
        line,
        reason: reason.to_string(),
    }
}

fn read_rows(path: &Path, width: usize) -> Result<Vec<(u64, Vec<String>)>, TableError> {
    let file = File::open(path).map_err(|source| TableError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| malformed(path, e.position().map_or(0, |p| p.line()), e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != width {
            return Err(malformed(path, line, format!("expected {width} columns, got {}", rec.len())));
        }
        out.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok(out)
}

/// Plain-data description of the four tables, used by writers.
#[derive(Debug, Clone, Default)]
pub struct TableRows {
    pub aliases: Vec<(String, String)>,
    pub holidays: Vec<NaiveDate>,
    pub regions: Vec<(String, Region)>,
    pub schedule: Vec<(String, ScheduleFlexibility)>,
}

impl TableRows {
    /// Build lookup tables directly, folding and alias-resolving region keys
    /// the same way [`MappingTables::load_dir`] does.
    pub fn to_tables(&self) -> Result<MappingTables, super::ModelError> {
        let aliases = AliasTable::from_pairs(self.aliases.iter().map(|(a, b)| (a, b)))?;
        let regions = self
            .regions
            .iter()
            .map(|(k, r)| {
                let folded = fold_name(k);
                let key = aliases.resolve(&folded).map(|a| a.to_string()).unwrap_or(folded);
                (key, *r)
            })
            .collect();
        Ok(MappingTables {
            holidays: self.holidays.iter().copied().collect(),
            regions,
            schedule: self.schedule.iter().map(|(k, s)| (k.trim().to_string(), *s)).collect(),
            aliases,
        })
    }

    pub fn write_dir(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut f = File::create(dir.join(ALIAS_FILE))?;
        writeln!(f, "raw,canonical")?;
        let mut w = csv::Writer::from_writer(f);
        for (a, b) in &self.aliases {
            w.write_record([a, b])?;
        }
        w.flush()?;

        let mut f = File::create(dir.join(HOLIDAYS_FILE))?;
        writeln!(f, "date")?;
        for d in &self.holidays {
            writeln!(f, "{}", d.format("%Y-%m-%d"))?;
        }

        let mut f = File::create(dir.join(REGIONS_FILE))?;
        writeln!(f, "endpoint_key,region")?;
        let mut w = csv::Writer::from_writer(f);
        for (k, r) in &self.regions {
            w.write_record([k.as_str(), r.code()])?;
        }
        w.flush()?;

        let mut f = File::create(dir.join(SCHEDULE_FILE))?;
        writeln!(f, "occupation_code,schedule")?;
        let mut w = csv::Writer::from_writer(f);
        for (k, s) in &self.schedule {
            w.write_record([k.as_str(), s.code()])?;
        }
        w.flush()?;
        Ok(())
    }
}
