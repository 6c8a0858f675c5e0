use std::collections::HashMap;
use std::sync::Arc;

use chrono::NaiveDate;

use crate::ingest::{Journey, JourneyId};
use crate::model::EndpointKey;

/// Retrieval structure over complete journeys.
///
/// Journeys are owned by the index and renumbered so that `JourneyId(i)` is
/// the i-th stored journey. Store order is by card, then tap-in time, so a
/// card's journeys on one day form a contiguous slice.
#[derive(Debug, Default)]
pub struct CandidateIndex {
    journeys: Vec<Journey>,
    postings: HashMap<(NaiveDate, EndpointKey), Vec<JourneyId>>,
    od_postings: HashMap<(NaiveDate, EndpointKey, EndpointKey), Vec<JourneyId>>,
    card_days: HashMap<(Arc<str>, NaiveDate), (u32, u32)>,
}

impl CandidateIndex {
    pub fn build(mut journeys: Vec<Journey>) -> Self {
        let sorted = journeys
            .windows(2)
            .all(|w| (&w[0].card_id, w[0].tap_in_time) <= (&w[1].card_id, w[1].tap_in_time));
        if !sorted {
            journeys.sort_by(|a, b| {
                a.card_id
                    .cmp(&b.card_id)
                    .then(a.tap_in_time.cmp(&b.tap_in_time))
                    .then(a.id.cmp(&b.id))
            });
        }

        let mut postings: HashMap<(NaiveDate, EndpointKey), Vec<JourneyId>> = HashMap::new();
        let mut od_postings: HashMap<(NaiveDate, EndpointKey, EndpointKey), Vec<JourneyId>> = HashMap::new();
        let mut card_days: HashMap<(Arc<str>, NaiveDate), (u32, u32)> = HashMap::new();
        for (i, j) in journeys.iter_mut().enumerate() {
            let id = JourneyId(i as u32);
            j.id = id;
            postings
                .entry((j.service_day, j.first_endpoint.clone()))
                .or_default()
                .push(id);
            if j.last_endpoint != j.first_endpoint {
                postings
                    .entry((j.service_day, j.last_endpoint.clone()))
                    .or_default()
                    .push(id);
            }
            od_postings
                .entry((j.service_day, j.first_endpoint.clone(), j.last_endpoint.clone()))
                .or_default()
                .push(id);
            let span = card_days
                .entry((j.card_id.clone(), j.service_day))
                .or_insert((i as u32, i as u32));
            span.1 = i as u32 + 1;
        }
        Self {
            journeys,
            postings,
            od_postings,
            card_days,
        }
    }

    pub fn len(&self) -> usize {
        self.journeys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.journeys.is_empty()
    }

    pub fn journeys(&self) -> &[Journey] {
        &self.journeys
    }

    pub fn get(&self, id: JourneyId) -> &Journey {
        &self.journeys[id.0 as usize]
    }

    /// Journeys on `day` whose first or last endpoint is `key`.
    pub fn lookup(&self, day: NaiveDate, key: &EndpointKey) -> &[JourneyId] {
        // a borrowed-key lookup would need a custom Borrow impl; cloning the
        // Arc is a refcount bump
        self.postings
            .get(&(day, key.clone()))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Journeys on `day` running from `first` to `last`, in store order.
    pub fn lookup_od(&self, day: NaiveDate, first: &EndpointKey, last: &EndpointKey) -> &[JourneyId] {
        self.od_postings
            .get(&(day, first.clone(), last.clone()))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// A card's journeys on one service day, ordered by tap-in time.
    pub fn card_day(&self, card: &Arc<str>, day: NaiveDate) -> &[Journey] {
        match self.card_days.get(&(card.clone(), day)) {
            Some(&(a, b)) => &self.journeys[a as usize..b as usize],
            None => &[],
        }
    }
}
