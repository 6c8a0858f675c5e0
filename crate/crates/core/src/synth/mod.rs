//! Seeded synthetic travelers: card transactions, matching diary reports and
//! the ground-truth linkage between them.
//!
//! Randomness comes from ChaCha8 seeded with [`SynthConfig::seed`]. Each
//! traveler, decoy card and noise step draws from its own stream (purpose in
//! the high bits of the stream number, entity index in the low bits), so a
//! larger `n_travelers` leaves the first travelers' records unchanged.

mod config;
mod generate;
mod truth;
mod write;

pub use config::{
    CovariateMix, FamilyMix, GridMix, InterviewMix, ModeMix, NetworkConfig, NoiseConfig, PlantedShift,
    SynthConfig, TripsPerDay,
};
pub use generate::{generate, SynthDataset, SynthSummary};
pub use truth::{read_linkage, read_linkage_file, truth_error_distribution, TruthError};
pub use write::{
    ParsedSynth, DIARY_FILE, LINKAGE_FILE, LINKAGE_HEADER, TABLES_DIR, TRANSACTIONS_FILE,
};

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid config at {field}: {reason}")]
    InvalidConfig { field: String, reason: String },
    #[error("linkage row {row}: {reason}")]
    BrokenLink { row: usize, reason: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("generated data failed to parse: {0}")]
    Reparse(String),
}

/// Ground truth for one diary trip: the journey it was reported from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkRow {
    pub respondent_id: String,
    pub card_id: String,
    pub trip_index: u32,
    /// `<card>#<ordinal>`, as produced by journey reconstruction.
    pub journey_id: String,
}

#[cfg(test)]
mod tests;
