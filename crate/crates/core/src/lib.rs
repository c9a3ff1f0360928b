//! Decomposition-based ensemble forecasting for traffic-flow series.
//!
//! The crate is organised along the forecasting pipeline:
//!
//! - [`signal`]: extrema, spline envelopes, sifting and plain EMD.
//! - [`noise`]: noise-assisted decompositions (EEMD, CEEMDAN).
//! - [`pipeline`]: ingestion, splitting, windowing, bagging, multi-resolution
//!   aggregation and the decompose-then-slice protocol.
//! - [`learners`]: linear, feed-forward and recurrent base forecasters with
//!   early stopping and random-search tuning.
//! - [`aggregation`]: baseline (mean/sum) and stacked (linear/neural) final
//!   learners.
//! - [`harness`]: experiment configuration, repeated runs, RMSE, significance
//!   marking, timing and reports.

pub mod aggregation;
pub mod error;
pub mod exec;
pub mod harness;
pub mod learners;
pub mod linalg;
pub mod noise;
pub mod pipeline;
pub mod rng;
pub mod signal;

pub use error::{Error, Result};
pub use exec::Execution;
