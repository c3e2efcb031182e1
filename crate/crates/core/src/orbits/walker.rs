//! Synthetic constellations laid out as Walker patterns and emitted as
//! element sets, for use when no catalogue snapshot is at hand.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::OrbitalElements;
use crate::{Error, Result};

/// WGS-72 gravitational parameter and radius, matching the propagator.
const MU_KM3_S2: f64 = 398_600.8;
const RE_KM: f64 = 6_378.135;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkerShell {
    pub altitude_km: f64,
    pub inclination_deg: f64,
    pub planes: u32,
    pub sats_per_plane: u32,
    /// Walker phasing factor F in [0, planes).
    pub phasing: u32,
    /// 360 for a delta pattern, 180 for a star (polar) pattern.
    pub raan_spread_deg: f64,
}

impl WalkerShell {
    pub const fn delta(altitude_km: f64, inclination_deg: f64, planes: u32, sats_per_plane: u32, phasing: u32) -> Self {
        Self { altitude_km, inclination_deg, planes, sats_per_plane, phasing, raan_spread_deg: 360.0 }
    }

    pub const fn star(altitude_km: f64, inclination_deg: f64, planes: u32, sats_per_plane: u32, phasing: u32) -> Self {
        Self { altitude_km, inclination_deg, planes, sats_per_plane, phasing, raan_spread_deg: 180.0 }
    }

    pub fn count(&self) -> u32 {
        self.planes * self.sats_per_plane
    }

    /// Circular-orbit mean motion in rev/day for the shell altitude.
    pub fn mean_motion_revday(&self) -> f64 {
        let a = RE_KM + self.altitude_km;
        (MU_KM3_S2 / a.powi(3)).sqrt() * 86_400.0 / (2.0 * std::f64::consts::PI)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConstellation {
    pub name: String,
    pub shells: Vec<WalkerShell>,
    pub first_catalog_number: u64,
}

impl SyntheticConstellation {
    pub fn count(&self) -> u32 {
        self.shells.iter().map(WalkerShell::count).sum()
    }

    /// Element sets at `epoch`: near-circular, no drag, one per slot.
    pub fn generate(&self, epoch: DateTime<Utc>) -> Result<Vec<OrbitalElements>> {
        let mut out = Vec::with_capacity(self.count() as usize);
        let mut id = self.first_catalog_number;
        for (s, shell) in self.shells.iter().enumerate() {
            if shell.planes == 0 || shell.sats_per_plane == 0 || shell.phasing >= shell.planes.max(1) {
                return Err(Error::param("shell", format!("{} shell {s}: invalid Walker pattern", self.name)));
            }
            let total = shell.count() as f64;
            let n = shell.mean_motion_revday();
            // Offset each shell so co-altitude shells do not share slots.
            let shell_offset = 360.0 * (s as f64 * 0.618_033_988_75).fract();
            for p in 0..shell.planes {
                let raan = (shell_offset + p as f64 * shell.raan_spread_deg / shell.planes as f64).rem_euclid(360.0);
                for k in 0..shell.sats_per_plane {
                    let m = k as f64 * 360.0 / shell.sats_per_plane as f64
                        + p as f64 * shell.phasing as f64 * 360.0 / total;
                    out.push(OrbitalElements {
                        satellite_id: id,
                        name: Some(format!("{}-S{}-P{:02}-{:02}", self.name.to_uppercase(), s + 1, p + 1, k + 1)),
                        classification: 'U',
                        international_designator: format!("24{:03}A", s + 1),
                        epoch,
                        mean_motion_dot: 0.0,
                        mean_motion_ddot: 0.0,
                        bstar: 0.0,
                        ephemeris_type: 0,
                        element_set_number: 999,
                        inclination_deg: shell.inclination_deg,
                        raan_deg: round4(raan),
                        eccentricity: 0.0001,
                        arg_perigee_deg: 0.0,
                        mean_anomaly_deg: round4(m.rem_euclid(360.0)),
                        mean_motion_revday: (n * 1e8).round() / 1e8,
                        revolution_number: 1,
                        line_checksums_ok: true,
                    });
                    id += 1;
                }
            }
        }
        Ok(out)
    }
}

fn round4(x: f64) -> f64 {
    let r = (x * 1e4).round() / 1e4;
    if r >= 360.0 {
        r - 360.0
    } else {
        r
    }
}

/// Built-in synthetic stand-ins, named after the systems they imitate.
pub fn builtin(name: &str) -> Option<SyntheticConstellation> {
    let (shells, first) = match name.to_ascii_lowercase().as_str() {
        // Gen-1 shells plus the first Gen-2 groups.
        "starlink" => (
            vec![
                WalkerShell::delta(550.0, 53.0, 72, 22, 17),
                WalkerShell::delta(540.0, 53.2, 72, 22, 17),
                WalkerShell::delta(570.0, 70.0, 36, 20, 11),
                WalkerShell::delta(560.0, 97.6, 6, 58, 1),
                WalkerShell::delta(530.0, 43.0, 28, 40, 5),
                WalkerShell::delta(525.0, 53.0, 28, 28, 5),
            ],
            80_001,
        ),
        "oneweb" => (vec![WalkerShell::star(1200.0, 87.9, 12, 53, 1)], 90_001),
        "iridium" => (vec![WalkerShell::star(780.0, 86.4, 6, 11, 2)], 91_001),
        // Second-generation fleet only.
        "orbcomm" => (vec![WalkerShell::delta(750.0, 47.0, 3, 6, 1)], 92_001),
        "galileo" => (vec![WalkerShell::delta(23_222.0, 56.0, 3, 8, 1)], 93_001),
        _ => return None,
    };
    Some(SyntheticConstellation { name: name.to_ascii_lowercase(), shells, first_catalog_number: first })
}

pub const BUILTIN_NAMES: [&str; 5] = ["starlink", "oneweb", "iridium", "orbcomm", "galileo"];
