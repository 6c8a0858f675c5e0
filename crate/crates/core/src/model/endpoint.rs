use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EndpointKind {
    Station,
    BusLine,
}

impl EndpointKind {
    pub fn code(&self) -> &'static str {
        match self {
            EndpointKind::Station => "STATION",
            EndpointKind::BusLine => "LINE",
        }
    }
}

/// Canonical identity of a boarding/alighting point: a rail station name or a
/// bus line designation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EndpointKey {
    pub kind: EndpointKind,
    pub key: Arc<str>,
}

impl EndpointKey {
    pub fn station(key: &str) -> Self {
        Self {
            kind: EndpointKind::Station,
            key: Arc::from(key),
        }
    }

    pub fn line(key: &str) -> Self {
        Self {
            kind: EndpointKind::BusLine,
            key: Arc::from(key),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.key
    }
}

impl fmt::Display for EndpointKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LegMode {
    Train,
    Metro,
    Bus,
}

impl LegMode {
    pub fn is_rail(&self) -> bool {
        matches!(self, LegMode::Train | LegMode::Metro)
    }

    /// The endpoint kind a tap on this mode carries.
    pub fn endpoint_kind(&self) -> EndpointKind {
        if self.is_rail() {
            EndpointKind::Station
        } else {
            EndpointKind::BusLine
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            LegMode::Train => "TRAIN",
            LegMode::Metro => "METRO",
            LegMode::Bus => "BUS",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "TRAIN" | "train" | "Train" => Some(LegMode::Train),
            "METRO" | "metro" | "Metro" => Some(LegMode::Metro),
            "BUS" | "bus" | "Bus" => Some(LegMode::Bus),
            _ => None,
        }
    }
}

/// Trim, lowercase and collapse internal whitespace runs to one space.
pub fn fold_name(raw: &str) -> String {
    let lower = raw.to_lowercase();
    let mut out = String::with_capacity(lower.len());
    for (i, word) in lower.split_whitespace().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Raw-name to canonical-name mapping. Both sides are folded on insertion and
/// chains are resolved up front, so a lookup result is never itself a key.
#[derive(Debug, Clone, Default)]
pub struct AliasTable {
    map: HashMap<String, Arc<str>>,
}

impl AliasTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I, A, B>(pairs: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (A, B)>,
        A: AsRef<str>,
        B: AsRef<str>,
    {
        let mut raw: HashMap<String, String> = HashMap::new();
        for (from, to) in pairs {
            let from = fold_name(from.as_ref());
            let to = fold_name(to.as_ref());
            if from.is_empty() || to.is_empty() {
                return Err(ModelError::EmptyName);
            }
            if from != to {
                raw.insert(from, to);
            }
        }
        let mut map = HashMap::with_capacity(raw.len());
        for start in raw.keys() {
            let mut cur = start;
            let mut steps = 0;
            while let Some(next) = raw.get(cur) {
                cur = next;
                steps += 1;
                if steps > raw.len() {
                    return Err(ModelError::AliasCycle(start.clone()));
                }
            }
            map.insert(start.clone(), Arc::from(cur.as_str()));
        }
        Ok(Self { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn resolve(&self, folded: &str) -> Option<&Arc<str>> {
        self.map.get(folded)
    }
}

/// Canonicalize a raw endpoint name: trim, case-fold, collapse whitespace,
/// then apply the alias table.
pub fn normalize_endpoint(
    raw: &str,
    kind: EndpointKind,
    aliases: &AliasTable,
) -> Result<EndpointKey, ModelError> {
    let folded = fold_name(raw);
    if folded.is_empty() {
        return Err(ModelError::EmptyName);
    }
    let key = match aliases.resolve(&folded) {
        Some(canonical) => canonical.clone(),
        None => Arc::from(folded.as_str()),
    };
    Ok(EndpointKey { kind, key })
}

/// Memoizing wrapper around [`normalize_endpoint`] for bulk ingestion, where
/// the same raw names repeat millions of times. Returned keys share storage.
#[derive(Debug)]
pub struct EndpointNormalizer<'a> {
    aliases: &'a AliasTable,
    raw_stations: HashMap<String, EndpointKey>,
    raw_lines: HashMap<String, EndpointKey>,
    canonical: HashMap<(EndpointKind, Arc<str>), EndpointKey>,
}

impl<'a> EndpointNormalizer<'a> {
    pub fn new(aliases: &'a AliasTable) -> Self {
        Self {
            aliases,
            raw_stations: HashMap::new(),
            raw_lines: HashMap::new(),
            canonical: HashMap::new(),
        }
    }

    pub fn normalize(&mut self, raw: &str, kind: EndpointKind) -> Result<EndpointKey, ModelError> {
        let by_raw = match kind {
            EndpointKind::Station => &mut self.raw_stations,
            EndpointKind::BusLine => &mut self.raw_lines,
        };
        if let Some(k) = by_raw.get(raw) {
            return Ok(k.clone());
        }
        let key = normalize_endpoint(raw, kind, self.aliases)?;
        let shared = self
            .canonical
            .entry((kind, key.key.clone()))
            .or_insert(key)
            .clone();
        by_raw.insert(raw.to_string(), shared.clone());
        Ok(shared)
    }
}
