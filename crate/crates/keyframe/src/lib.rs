//! Batch keyframe selection: for every (video, question, answer) record,
//! pick the frames most similar to a text query built from the record, or
//! apply one of the baseline selectors, and report compression, success
//! rate and selection speed.
//!
//! The pure algorithms live in [`keyframe_core`]; this crate adds video IO,
//! embedding providers, the job pipeline, reports and the CLI.

pub mod bench;
pub mod config;
pub mod corpus;
pub mod embedder;
pub mod manifest;
pub mod pipeline;
pub mod report;
pub mod select;
pub mod videoio;

pub use keyframe_core as core;
