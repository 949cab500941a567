//! Experiment plumbing: game generators, the sampling baseline, the
//! check-solve-purify pipeline and its reports.

pub mod baseline;
pub mod generator;
pub mod pipeline;
pub mod report;
