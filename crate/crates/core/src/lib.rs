//! Analysis toolkit for LEO signals of opportunity.
//!
//! The crate answers three questions about a communication constellation
//! used as a navigation source:
//!
//! * how well a single link can be ranged: modified Cramér–Rao bounds for
//!   delay, phase, frequency and angle of arrival ([`mcrlb`]), fed by the
//!   physical-layer descriptions in [`catalog`] and the C/N0 ceilings from
//!   [`link_budget`];
//! * how good the geometry is: TLE ingestion, SGP4 propagation and
//!   visibility ([`orbits`]), then satellites-in-view and GDOP campaigns
//!   ([`gdop`], [`scenario`]);
//! * whether the delay bound is reachable in practice: a Starlink-structured
//!   OFDM acquisition Monte Carlo ([`acq`]).

// `!(x > 0.0)` is used on purpose so that NaN fails validation too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acq;
pub mod catalog;
pub mod config;
pub mod csvfmt;
mod error;
pub mod gdop;
pub mod link_budget;
pub mod mcrlb;
pub mod orbits;
pub mod quadrature;
pub mod scenario;

pub use error::{Error, Result};

/// Propagation speed used for every time/space conversion.
///
/// The rounded value keeps outputs comparable with published tables; the
/// exact value is available for users who need it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedOfLight {
    #[default]
    Rounded,
    Exact,
}

impl SpeedOfLight {
    pub const ROUNDED_MPS: f64 = 3.0e8;
    pub const EXACT_MPS: f64 = 299_792_458.0;

    pub fn mps(self) -> f64 {
        match self {
            SpeedOfLight::Rounded => Self::ROUNDED_MPS,
            SpeedOfLight::Exact => Self::EXACT_MPS,
        }
    }
}

/// Default propagation speed, 3e8 m/s.
pub const C: f64 = SpeedOfLight::ROUNDED_MPS;
