//! Agent-based simulation of how a fair-launch governance token
//! concentrates over time.
//!
//! The pipeline: [`scenario`] builds a population and initial allocation,
//! [`behavior`] turns market conditions into orders, [`market`] clears them
//! once per day, [`metrics`] measures concentration and [`engine`] drives
//! the loop and the Monte Carlo ensemble. [`calibration`] fits behavioural
//! parameters to an observed series.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod behavior;
pub mod calibration;
pub mod data_ingest;
pub mod distributions;
pub mod engine;
pub mod market;
pub mod metrics;
pub mod report;
pub mod scenario;

pub use behavior::{BehaviorParams, Preset};
pub use calibration::{grid_search, CalibrationError, GridSpec, Objective, TargetMetric};
pub use data_ingest::{CalendarAnchor, Day, MarketDay, ReferenceSeries, SyntheticMarket};
pub use distributions::RandomSource;
pub use engine::{
    run, run_ensemble, EngineError, EnsembleResult, MarketSource, RunConfig, RunResult,
};
pub use metrics::MetricPoint;
pub use scenario::{Agent, ScenarioKind, ScenarioSpec};
