//! SGP4/SDP4 propagation of TLE mean elements to TEME states.

use chrono::{DateTime, Utc};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::frames::EARTH_RADIUS_M;
use super::{OrbitalElements, SatelliteState};
use crate::{Error, Result};

/// Altitude under which a propagated satellite counts as decayed.
pub const DECAY_ALTITUDE_M: f64 = 100e3;

/// How old elements may be before a result carries a staleness warning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StalenessGuard {
    pub max_age_days: f64,
}

impl Default for StalenessGuard {
    fn default() -> Self {
        Self { max_age_days: 14.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaleElements {
    pub age_days: f64,
    pub limit_days: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Propagated {
    pub state: SatelliteState,
    /// Set when the requested epoch is further from the element epoch than
    /// the guard allows. The state is still returned.
    pub stale: Option<StaleElements>,
}

/// Initialised SGP4 model for one element set. Uses the WGS-72 constants
/// and AFSPC-compatible sidereal time, as the reference implementation does,
/// but reduces the node angle modulo 2π on low-inclination deep-space
/// orbits (the "improved" Lyddane branch the published test vectors use).
#[derive(Clone)]
pub struct Propagator {
    elements: OrbitalElements,
    constants: sgp4::Constants,
    guard: StalenessGuard,
}

impl std::fmt::Debug for Propagator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Propagator").field("satellite_id", &self.elements.satellite_id).finish()
    }
}

fn to_sgp4(el: &OrbitalElements) -> sgp4::Elements {
    sgp4::Elements {
        object_name: el.name.clone(),
        international_designator: None,
        norad_id: el.satellite_id,
        classification: sgp4::Classification::Unclassified,
        datetime: el.epoch.naive_utc(),
        mean_motion_dot: el.mean_motion_dot,
        mean_motion_ddot: el.mean_motion_ddot,
        drag_term: el.bstar,
        element_set_number: el.element_set_number,
        inclination: el.inclination_deg,
        right_ascension: el.raan_deg,
        eccentricity: el.eccentricity,
        argument_of_perigee: el.arg_perigee_deg,
        mean_anomaly: el.mean_anomaly_deg,
        mean_motion: el.mean_motion_revday,
        revolution_number: el.revolution_number,
        ephemeris_type: el.ephemeris_type,
    }
}

impl Propagator {
    pub fn new(elements: &OrbitalElements) -> Result<Self> {
        Self::with_guard(elements, StalenessGuard::default())
    }

    pub fn with_guard(elements: &OrbitalElements, guard: StalenessGuard) -> Result<Self> {
        elements.validate()?;
        let constants = sgp4::Constants::from_elements_afspc_compatibility_mode(&to_sgp4(elements)).map_err(|e| {
            Error::Propagation { satellite_id: elements.satellite_id, reason: e.to_string() }
        })?;
        Ok(Self { elements: elements.clone(), constants, guard })
    }

    pub fn elements(&self) -> &OrbitalElements {
        &self.elements
    }

    /// Raw model output in km and km/s at `minutes` after the element epoch.
    /// No decay or staleness checks.
    pub fn propagate_minutes(&self, minutes: f64) -> Result<([f64; 3], [f64; 3])> {
        let p = self
            .constants
            .propagate_from_state(sgp4::MinutesSinceEpoch(minutes), self.constants.initial_state().as_mut(), false)
            .map_err(|e| match e {
                sgp4::Error::NegativeSemiLatusRectum { .. } => {
                    Error::Decayed { satellite_id: self.elements.satellite_id, reason: e.to_string() }
                }
                _ => Error::Propagation { satellite_id: self.elements.satellite_id, reason: e.to_string() },
            })?;
        Ok((p.position, p.velocity))
    }

    pub fn minutes_since_epoch(&self, epoch: DateTime<Utc>) -> f64 {
        let d = epoch - self.elements.epoch;
        match d.num_nanoseconds() {
            Some(ns) => ns as f64 / 6e10,
            None => d.num_milliseconds() as f64 / 6e4,
        }
    }

    /// TEME state at `epoch`.
    pub fn propagate(&self, epoch: DateTime<Utc>) -> Result<Propagated> {
        let minutes = self.minutes_since_epoch(epoch);
        let (r, v) = self.propagate_minutes(minutes)?;
        let position = Vector3::from(r) * 1e3;
        let velocity = Vector3::from(v) * 1e3;
        if !(position.iter().chain(velocity.iter()).all(|x| x.is_finite())) {
            return Err(Error::Propagation {
                satellite_id: self.elements.satellite_id,
                reason: "non-finite state".into(),
            });
        }
        let altitude = position.norm() - EARTH_RADIUS_M;
        if altitude < DECAY_ALTITUDE_M {
            return Err(Error::Decayed {
                satellite_id: self.elements.satellite_id,
                reason: format!("altitude {:.1} km at {epoch}", altitude / 1e3),
            });
        }
        let age_days = (minutes / 1440.0).abs();
        let stale = (age_days > self.guard.max_age_days)
            .then_some(StaleElements { age_days, limit_days: self.guard.max_age_days });
        Ok(Propagated {
            state: SatelliteState { epoch, position_eci_m: position, velocity_eci_mps: velocity },
            stale,
        })
    }
}

/// One-shot propagation with the default staleness guard.
pub fn propagate(elements: &OrbitalElements, epoch: DateTime<Utc>) -> Result<Propagated> {
    Propagator::new(elements)?.propagate(epoch)
}
