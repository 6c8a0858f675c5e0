//! Batch pipeline around `taplink-core`: configuration, stage runners, the
//! match/analyze file formats and report rendering.

pub mod bundle;
pub mod config;
pub mod error;
pub mod gate;
pub mod pipeline;
pub mod records;
pub mod render;
pub mod staging;
