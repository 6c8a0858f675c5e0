use std::sync::Arc;

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::model::{EndpointKey, Timestamp};

use super::{CardTransaction, TxType};

/// Index of a journey in the reconstructed store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JourneyId(pub u32);

/// A complete card journey: tap-in, zero or more transfers, tap-out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Journey {
    pub id: JourneyId,
    pub card_id: Arc<str>,
    /// 1-based position among this card's complete journeys, in time order.
    pub ordinal: u32,
    pub service_day: NaiveDate,
    pub taps: Vec<CardTransaction>,
    pub first_endpoint: EndpointKey,
    pub last_endpoint: EndpointKey,
    pub tap_in_time: Timestamp,
    pub tap_out_time: Timestamp,
}

impl Journey {
    fn from_taps(card_id: Arc<str>, ordinal: u32, taps: Vec<CardTransaction>) -> Self {
        let first = taps.first().expect("journey has taps");
        let last = taps.last().expect("journey has taps");
        Self {
            id: JourneyId(0),
            card_id,
            ordinal,
            service_day: first.ts.date(),
            first_endpoint: first.endpoint.clone(),
            last_endpoint: last.endpoint.clone(),
            tap_in_time: first.ts,
            tap_out_time: last.ts,
            taps,
        }
    }

    /// Stable external name, `<card>#<ordinal>`.
    pub fn label(&self) -> String {
        format!("{}#{}", self.card_id, self.ordinal)
    }

    /// Re-check the structural invariants.
    pub fn is_well_formed(&self) -> bool {
        let n = self.taps.len();
        n >= 2
            && self.taps[0].tx_type == TxType::TapIn
            && self.taps[n - 1].tx_type == TxType::TapOut
            && self.taps[1..n - 1].iter().all(|t| t.tx_type == TxType::Transfer)
            && self.taps.windows(2).all(|w| w[0].ts < w[1].ts)
            && self.taps.iter().all(|t| t.card_id == self.card_id)
            && self.first_endpoint == self.taps[0].endpoint
            && self.last_endpoint == self.taps[n - 1].endpoint
            && self.tap_in_time == self.taps[0].ts
            && self.tap_out_time == self.taps[n - 1].ts
            && self.service_day == self.tap_in_time.date()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrphanReason {
    /// Transfer or tap-out with no open journey.
    NoOpenJourney,
    /// Part of a journey superseded by a new tap-in before it was closed.
    Superseded,
    /// Part of a journey still open when the card's stream ended.
    Unclosed,
    /// Same timestamp as the previous tap of the open journey.
    DuplicateTimestamp,
}

impl OrphanReason {
    pub fn code(&self) -> &'static str {
        match self {
            OrphanReason::NoOpenJourney => "NoOpenJourney",
            OrphanReason::Superseded => "Superseded",
            OrphanReason::Unclosed => "Unclosed",
            OrphanReason::DuplicateTimestamp => "DuplicateTimestamp",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orphan {
    pub tx: CardTransaction,
    pub reason: OrphanReason,
}

/// Chain taps into journeys, card by card.
///
/// Input order does not matter: transactions are regrouped by card id and
/// sorted by time (stable, so equal timestamps keep file order). Output is
/// ordered by card id, then tap-in time, and journey ids follow that order.
/// Every input tap ends up either in a returned journey or in the orphan log.
pub fn reconstruct_journeys(mut transactions: Vec<CardTransaction>) -> (Vec<Journey>, Vec<Orphan>) {
    transactions.par_sort_by(|a, b| a.card_id.cmp(&b.card_id).then(a.ts.cmp(&b.ts)));

    let mut ranges: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=transactions.len() {
        if i == transactions.len() || transactions[i].card_id != transactions[start].card_id {
            ranges.push((start, i));
            start = i;
        }
    }
    let per_card: Vec<(Vec<Journey>, Vec<Orphan>)> = ranges
        .into_par_iter()
        .map(|(a, b)| chain_card(&transactions[a..b]))
        .collect();
    drop(transactions);

    let mut journeys = Vec::with_capacity(per_card.iter().map(|p| p.0.len()).sum());
    let mut orphans = Vec::new();
    for (j, o) in per_card {
        journeys.extend(j);
        orphans.extend(o);
    }
    for (i, j) in journeys.iter_mut().enumerate() {
        j.id = JourneyId(i as u32);
    }
    (journeys, orphans)
}

/// Chain one card's taps, sorted by time. Journeys get exactly sized tap
/// vectors; at millions of journeys the slack of a growing vector adds up.
fn chain_card(taps: &[CardTransaction]) -> (Vec<Journey>, Vec<Orphan>) {
    let card_id = taps[0].card_id.clone();
    let mut journeys = Vec::new();
    let mut orphans = Vec::new();
    // taps of the open journey: indices into `taps`, not always contiguous
    // because duplicate-timestamp taps are skipped
    let mut open: Vec<usize> = Vec::new();

    let orphan_all = |open: &mut Vec<usize>, orphans: &mut Vec<Orphan>, reason| {
        orphans.extend(open.drain(..).map(|i| Orphan {
            tx: taps[i].clone(),
            reason,
        }));
    };

    for (i, tx) in taps.iter().enumerate() {
        if let Some(&prev) = open.last() {
            if taps[prev].ts == tx.ts && tx.tx_type != TxType::TapIn {
                orphans.push(Orphan {
                    tx: tx.clone(),
                    reason: OrphanReason::DuplicateTimestamp,
                });
                continue;
            }
        }
        match tx.tx_type {
            TxType::TapIn => {
                orphan_all(&mut open, &mut orphans, OrphanReason::Superseded);
                open.push(i);
            }
            TxType::Transfer | TxType::TapOut if open.is_empty() => orphans.push(Orphan {
                tx: tx.clone(),
                reason: OrphanReason::NoOpenJourney,
            }),
            TxType::Transfer => open.push(i),
            TxType::TapOut => {
                open.push(i);
                let chained: Vec<CardTransaction> = open.drain(..).map(|k| taps[k].clone()).collect();
                let ordinal = journeys.len() as u32 + 1;
                journeys.push(Journey::from_taps(card_id.clone(), ordinal, chained));
            }
        }
    }
    orphan_all(&mut open, &mut orphans, OrphanReason::Unclosed);
    (journeys, orphans)
}
