//! Two Forecasters announce probability measures over an infinite sequence;
//! a Sceptic trades futures contracts against both. Either the forecasts
//! merge, or the Sceptic's geometric-mean capital grows without bound.
//!
//! Everything is generic over the scalar type ([`Scalar`], implemented for
//! `f32` and `f64`); the aliases below fix it to `f64`.

pub mod error;
pub mod harness;
pub mod logspace;
pub mod measure;
pub mod metrics;
pub mod protocol;
pub mod scalar;
pub mod scenarios;
pub mod strategy;

pub use error::{Error, Result};
pub use measure::{Alphabet, Measure, Symbol};
pub use scalar::Scalar;

pub type Measure64 = Measure<f64>;
pub type ForecastPair64 = protocol::ForecastPair<f64>;
pub type BetOrder64 = protocol::BetOrder<f64>;
pub type ProtocolState64 = protocol::ProtocolState<f64>;
pub type MixtureSceptic64 = strategy::MixtureSceptic<f64>;
pub type Trace64 = harness::Trace<f64>;

pub type Measure32 = Measure<f32>;
pub type ProtocolState32 = protocol::ProtocolState<f32>;
