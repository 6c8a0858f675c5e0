use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;
use std::sync::Arc;

use crate::model::{AliasTable, EndpointKey, EndpointKind, EndpointNormalizer, LegMode, Timestamp};

use super::{IngestError, RejectReason, Rejection};

pub const TRANSACTIONS_HEADER: [&str; 6] = [
    "card_id",
    "timestamp",
    "tx_type",
    "mode",
    "endpoint_kind",
    "endpoint_raw",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TxType {
    TapIn,
    Transfer,
    TapOut,
}

impl TxType {
    pub fn code(&self) -> &'static str {
        match self {
            TxType::TapIn => "IN",
            TxType::Transfer => "TR",
            TxType::TapOut => "OUT",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "IN" => Some(TxType::TapIn),
            "TR" => Some(TxType::Transfer),
            "OUT" => Some(TxType::TapOut),
            _ => None,
        }
    }
}

/// A single validation event on a card.
///
/// Bus taps carry the line as their endpoint; rail taps carry the station.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CardTransaction {
    pub card_id: Arc<str>,
    pub ts: Timestamp,
    pub tx_type: TxType,
    pub endpoint: EndpointKey,
    pub mode: LegMode,
}

pub fn parse_transactions_file(
    path: &Path,
    aliases: &AliasTable,
) -> Result<(Vec<CardTransaction>, Vec<Rejection>), IngestError> {
    let file = File::open(path).map_err(|source| IngestError::FileUnreadable {
        path: path.to_path_buf(),
        source,
    })?;
    parse_transactions(BufReader::with_capacity(1 << 20, file), aliases)
}

/// Parse `transactions.csv`. Output preserves file order.
pub fn parse_transactions<R: Read>(
    reader: R,
    aliases: &AliasTable,
) -> Result<(Vec<CardTransaction>, Vec<Rejection>), IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .buffer_capacity(1 << 20)
        .from_reader(reader);
    let header = rdr.headers().map_err(IngestError::from_csv)?;
    if header.iter().map(str::trim).ne(TRANSACTIONS_HEADER.iter().copied()) {
        return Err(IngestError::MalformedRow {
            line: 1,
            reason: format!("expected header {}, got {:?}", TRANSACTIONS_HEADER.join(","), header),
        });
    }

    let mut normalizer = EndpointNormalizer::new(aliases);
    let mut cards: std::collections::HashMap<Box<str>, Arc<str>> = Default::default();
    let mut out = Vec::new();
    let mut rejected = Vec::new();
    let mut rec = csv::StringRecord::new();

    while rdr.read_record(&mut rec).map_err(IngestError::from_csv)? {
        let line = rec.position().map_or(0, |p| p.line());
        let mut reject = |reason: RejectReason, detail: &str| {
            rejected.push(Rejection {
                line,
                reason,
                detail: detail.to_string(),
            })
        };

        let card = rec[0].trim();
        if card.is_empty() {
            reject(RejectReason::EmptyCardId, "");
            continue;
        }
        let Ok(ts) = rec[1].parse::<Timestamp>() else {
            reject(RejectReason::BadTimestamp, &rec[1]);
            continue;
        };
        let Some(tx_type) = TxType::parse(&rec[2]) else {
            reject(RejectReason::UnknownTxType, &rec[2]);
            continue;
        };
        let Some(mode) = LegMode::parse(&rec[3]) else {
            reject(RejectReason::UnknownMode, &rec[3]);
            continue;
        };
        let kind = match rec[4].trim() {
            "STATION" => EndpointKind::Station,
            "LINE" => EndpointKind::BusLine,
            other => {
                reject(RejectReason::UnknownEndpointKind, other);
                continue;
            }
        };
        if kind != mode.endpoint_kind() {
            reject(
                RejectReason::ModeEndpointMismatch,
                &format!("{} tap with {} endpoint", mode.code(), kind.code()),
            );
            continue;
        }
        let Ok(endpoint) = normalizer.normalize(&rec[5], kind) else {
            reject(RejectReason::EmptyEndpoint, "");
            continue;
        };
        let card_id = match cards.get(card) {
            Some(c) => c.clone(),
            None => {
                let c: Arc<str> = Arc::from(card);
                cards.insert(Box::from(card), c.clone());
                c
            }
        };
        out.push(CardTransaction {
            card_id,
            ts,
            tx_type,
            endpoint,
            mode,
        });
    }
    Ok((out, rejected))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAD: &str = "card_id,timestamp,tx_type,mode,endpoint_kind,endpoint_raw\n";

    fn parse(body: &str) -> (Vec<CardTransaction>, Vec<Rejection>) {
        parse_transactions(format!("{HEAD}{body}").as_bytes(), &AliasTable::new()).unwrap()
    }

    #[test]
    fn well_formed_rows() {
        let (tx, rej) = parse(
            "c1,2024-03-05T08:00:00,IN,TRAIN,STATION,Nørreport\n\
             c1,2024-03-05T08:10:00,TR,BUS,LINE,5C\n\
             c1,2024-03-05T08:30:00,OUT,BUS,LINE,5C\n",
        );
        assert_eq!(tx.len(), 3);
        assert!(rej.is_empty());
        assert_eq!(tx[0].endpoint, EndpointKey::station("nørreport"));
        assert_eq!(tx[1].endpoint, EndpointKey::line("5c"));
        assert_eq!(tx[2].tx_type, TxType::TapOut);
        assert!(Arc::ptr_eq(&tx[0].card_id, &tx[2].card_id));
    }

    #[test]
    fn unknown_tx_type_is_rejected() {
        let (tx, rej) = parse("c1,2024-03-05T08:00:00,check,TRAIN,STATION,A\n");
        assert!(tx.is_empty());
        assert_eq!(rej[0].reason, RejectReason::UnknownTxType);
        assert_eq!(rej[0].line, 2);
    }

    #[test]
    fn bus_tap_on_station_is_rejected() {
        let (tx, rej) = parse(
            "c1,2024-03-05T08:00:00,IN,BUS,STATION,A\n\
             c1,2024-03-05T08:00:00,IN,TRAIN,LINE,A\n",
        );
        assert!(tx.is_empty());
        assert_eq!(rej.len(), 2);
        assert!(rej.iter().all(|r| r.reason == RejectReason::ModeEndpointMismatch));
    }

    #[test]
    fn every_bad_value_has_a_reason() {
        let (tx, rej) = parse(
            ",2024-03-05T08:00:00,IN,TRAIN,STATION,A\n\
             c,2024-03-05 8am,IN,TRAIN,STATION,A\n\
             c,2024-03-05T08:00:00,IN,TRAM,STATION,A\n\
             c,2024-03-05T08:00:00,IN,TRAIN,PLATFORM,A\n\
             c,2024-03-05T08:00:00,IN,TRAIN,STATION,  \n\
             c,2024-03-05T08:00:00,IN,TRAIN,STATION,A\n",
        );
        assert_eq!(tx.len(), 1);
        let reasons: Vec<_> = rej.iter().map(|r| r.reason).collect();
        assert_eq!(
            reasons,
            vec![
                RejectReason::EmptyCardId,
                RejectReason::BadTimestamp,
                RejectReason::UnknownMode,
                RejectReason::UnknownEndpointKind,
                RejectReason::EmptyEndpoint,
            ]
        );
    }

    #[test]
    fn wrong_header_or_width_is_an_error() {
        let err = parse_transactions("a,b,c\n".as_bytes(), &AliasTable::new()).unwrap_err();
        assert!(matches!(err, IngestError::MalformedRow { line: 1, .. }));
        let err = parse_transactions(format!("{HEAD}c1,2024-03-05T08:00:00,IN\n").as_bytes(), &AliasTable::new())
            .unwrap_err();
        assert!(matches!(err, IngestError::MalformedRow { line: 2, .. }), "{err}");
    }
}
