//! TLE ingestion, SGP4 propagation, Earth-fixed geometry and visibility
//! rules for ground sites.

pub mod frames;
pub mod propagate;
pub mod tle;
pub mod walker;

use chrono::{DateTime, Utc};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use frames::{eci_to_ecef, gmst_rad, look_angles, off_nadir_angle, LookAngles, Topocentric};
pub use propagate::{propagate, Propagated, Propagator, StalenessGuard};
pub use tle::{
    format_tle, format_tle_file, parse_tle, parse_tle_lenient, parse_tle_with, ChecksumPolicy, TleDiagnostic, TleParse,
};

/// Mean elements of one TLE record. Angles in degrees.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitalElements {
    pub satellite_id: u64,
    pub name: Option<String>,
    pub classification: char,
    pub international_designator: String,
    pub epoch: DateTime<Utc>,
    /// First derivative of mean motion / 2, rev/day².
    pub mean_motion_dot: f64,
    /// Second derivative of mean motion / 6, rev/day³.
    pub mean_motion_ddot: f64,
    pub bstar: f64,
    pub ephemeris_type: u8,
    pub element_set_number: u64,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    pub eccentricity: f64,
    pub arg_perigee_deg: f64,
    pub mean_anomaly_deg: f64,
    pub mean_motion_revday: f64,
    pub revolution_number: u64,
    pub line_checksums_ok: bool,
}

impl OrbitalElements {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.eccentricity) {
            return Err(Error::param("eccentricity", format!("must lie in [0, 1), got {}", self.eccentricity)));
        }
        if !(0.0..=180.0).contains(&self.inclination_deg) {
            return Err(Error::param("inclination_deg", format!("must lie in [0, 180], got {}", self.inclination_deg)));
        }
        if !(self.mean_motion_revday.is_finite() && self.mean_motion_revday > 0.0) {
            return Err(Error::param("mean_motion_revday", format!("must be positive, got {}", self.mean_motion_revday)));
        }
        for (name, v) in [
            ("raan_deg", self.raan_deg),
            ("arg_perigee_deg", self.arg_perigee_deg),
            ("mean_anomaly_deg", self.mean_anomaly_deg),
            ("bstar", self.bstar),
        ] {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        Ok(())
    }
}

/// TEME state in meters and meters per second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatelliteState {
    pub epoch: DateTime<Utc>,
    pub position_eci_m: Vector3<f64>,
    pub velocity_eci_mps: Vector3<f64>,
}

impl SatelliteState {
    /// Radius inside the LEO–MEO band [6.6e6, 5e7] m.
    pub fn is_plausible_orbit(&self) -> bool {
        let r = self.position_eci_m.norm();
        (6.6e6..=5e7).contains(&r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundSite {
    pub name: String,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    #[serde(default)]
    pub altitude_m: f64,
}

impl GroundSite {
    /// Validates latitude and folds longitude into (−180, 180].
    pub fn new(name: impl Into<String>, latitude_deg: f64, longitude_deg: f64, altitude_m: f64) -> Result<Self> {
        if !(latitude_deg.abs() <= 90.0) {
            return Err(Error::param("latitude_deg", format!("must lie in [-90, 90], got {latitude_deg}")));
        }
        if !longitude_deg.is_finite() || !altitude_m.is_finite() {
            return Err(Error::param("longitude_deg", "must be finite"));
        }
        let mut lon = longitude_deg.rem_euclid(360.0);
        if lon > 180.0 {
            lon -= 360.0;
        }
        Ok(Self { name: name.into(), latitude_deg, longitude_deg: lon, altitude_m })
    }

    pub fn ecef_m(&self) -> Vector3<f64> {
        frames::geodetic_to_ecef(self.latitude_deg, self.longitude_deg, self.altitude_m)
    }

    pub fn padova() -> Self {
        Self::new("Padova", 45.409, 11.894, 0.0).expect("valid")
    }

    pub fn svalbard() -> Self {
        Self::new("Svalbard", 78.224, 15.637, 0.0).expect("valid")
    }

    pub fn estec() -> Self {
        Self::new("ESTEC", 52.219, 4.419, 0.0).expect("valid")
    }

    pub fn la_reunion() -> Self {
        Self::new("La Reunion", -20.883, 55.450, 0.0).expect("valid")
    }

    pub fn reference_sites() -> Vec<Self> {
        vec![Self::padova(), Self::svalbard(), Self::estec(), Self::la_reunion()]
    }
}

pub const SITES_CSV_HEADER: &str = "name,lat_deg,lon_deg,alt_m";

/// Reads `name,lat_deg,lon_deg,alt_m` rows; a header row is skipped.
pub fn parse_sites_csv(text: &str) -> Result<Vec<GroundSite>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("name")) {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let field = |k: usize, what: &str| -> Result<f64> {
            cols.get(k)
                .ok_or_else(|| Error::config(format!("sites line {}", i + 1), format!("missing {what}")))?
                .parse::<f64>()
                .map_err(|_| Error::config(format!("sites line {}", i + 1), format!("bad {what} `{}`", cols[k])))
        };
        if cols.len() != 4 {
            return Err(Error::config(format!("sites line {}", i + 1), format!("expected 4 columns, found {}", cols.len())));
        }
        let site = GroundSite::new(cols[0], field(1, "lat_deg")?, field(2, "lon_deg")?, field(3, "alt_m")?)
            .map_err(|e| Error::config(format!("sites line {}", i + 1), e.to_string()))?;
        out.push(site);
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("site list"));
    }
    Ok(out)
}

/// How the beamwidth φ bounds the off-nadir angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamConvention {
    /// φ is the half-angle of the nadir cone.
    #[default]
    HalfAngle,
    /// φ is the full aperture; the cone half-angle is φ/2.
    FullAperture,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityRule {
    pub masking_angle_deg: f64,
    pub beamwidth_deg: f64,
    #[serde(default)]
    pub beam_convention: BeamConvention,
}

impl VisibilityRule {
    pub fn new(masking_angle_deg: f64, beamwidth_deg: f64) -> Result<Self> {
        let r = Self { masking_angle_deg, beamwidth_deg, beam_convention: BeamConvention::HalfAngle };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..90.0).contains(&self.masking_angle_deg) {
            return Err(Error::param("masking_angle_deg", format!("must lie in [0, 90), got {}", self.masking_angle_deg)));
        }
        if !(self.beamwidth_deg > 0.0 && self.beamwidth_deg <= 90.0) {
            return Err(Error::param("beamwidth_deg", format!("must lie in (0, 90], got {}", self.beamwidth_deg)));
        }
        Ok(())
    }

    pub fn cone_half_angle_deg(&self) -> f64 {
        match self.beam_convention {
            BeamConvention::HalfAngle => self.beamwidth_deg,
            BeamConvention::FullAperture => self.beamwidth_deg / 2.0,
        }
    }
}

/// Elevation at least θ and off-nadir angle within the beam cone.
pub fn is_visible(elevation_deg: f64, off_nadir_deg: f64, rule: &VisibilityRule) -> bool {
    elevation_deg >= rule.masking_angle_deg && off_nadir_deg <= rule.cone_half_angle_deg()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn visibility_examples() {
        let s1 = VisibilityRule::new(10.0, 90.0).unwrap();
        assert!(is_visible(45.0, 20.0, &s1));
        let r = VisibilityRule::new(40.0, 60.0).unwrap();
        assert!(!is_visible(35.0, 50.0, &r));
        assert!(is_visible(40.0, 60.0, &r));
        assert!(!is_visible(50.0, 60.1, &r));
        let full = VisibilityRule { beam_convention: BeamConvention::FullAperture, ..r };
        assert!(!is_visible(50.0, 40.0, &full));
        assert!(is_visible(50.0, 30.0, &full));
    }

    #[test]
    fn rule_invariants() {
        assert!(VisibilityRule::new(90.0, 10.0).is_err());
        assert!(VisibilityRule::new(-1.0, 10.0).is_err());
        assert!(VisibilityRule::new(10.0, 0.0).is_err());
        assert!(VisibilityRule::new(10.0, 90.5).is_err());
        assert!(VisibilityRule::new(0.0, 90.0).is_ok());
    }

    #[test]
    fn site_normalisation() {
        let s = GroundSite::new("x", 10.0, 190.0, 0.0).unwrap();
        assert_eq!(s.longitude_deg, -170.0);
        assert_eq!(GroundSite::new("x", 10.0, -180.0, 0.0).unwrap().longitude_deg, 180.0);
        assert!(GroundSite::new("x", 91.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn sites_csv() {
        let sites = parse_sites_csv("name,lat_deg,lon_deg,alt_m\nPadova,45.409,11.894,12\n# c\nQ,1,2,3\n").unwrap();
        assert_eq!(sites.len(), 2);
        assert_eq!(sites[0].altitude_m, 12.0);
        let e = parse_sites_csv("name,lat_deg,lon_deg,alt_m\nP,abc,1,2\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert!(parse_sites_csv("name,lat_deg,lon_deg,alt_m\n").is_err());
    }
}
