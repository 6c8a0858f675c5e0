//! Linkage of self-reported travel-diary trips to smart-card journeys, and
//! the reporting-error statistics computed on the linked sample.
//!
//! Stages, in pipeline order:
//!
//! * [`ingest`] parses card transactions and diaries, chains taps into
//!   journeys and classifies respondents by mode.
//! * [`matcher`] indexes journeys and finds, per respondent, the card whose
//!   day of journeys minimizes the summed absolute time difference.
//! * [`metrics`] turns matches into per-trip error records and descriptive
//!   summaries.
//! * [`stats`] holds the rank-test kernels and the cut-off sweep.
//!
//! [`synth`] generates seeded ground-truth datasets in the same file formats.

pub mod ingest;
pub mod matcher;
pub mod metrics;
pub mod model;
pub mod stats;
pub mod synth;
