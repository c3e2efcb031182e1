//! Free-space path loss and the maximum C/N0 a link can deliver.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::catalog::{catalog_get, SystemId};
use crate::csvfmt::{fmt_f64, fmt_opt};
use crate::{Error, Result, SpeedOfLight};

/// 10·log10 of Boltzmann's constant in dBW/(K·Hz).
pub const BOLTZMANN_DBWKHZ: f64 = -228.601;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudgetSpec {
    pub eirp_dbw: f64,
    pub g_over_t_dbk: f64,
    pub boltzmann_dbwkhz: f64,
    pub slant_range_m: f64,
    pub carrier_hz: f64,
    #[serde(default)]
    pub speed_of_light: SpeedOfLight,
}

impl LinkBudgetSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.slant_range_m.is_finite() && self.slant_range_m > 0.0) {
            return Err(Error::param("slant_range_m", format!("must be positive, got {}", self.slant_range_m)));
        }
        if !(self.carrier_hz.is_finite() && self.carrier_hz > 0.0) {
            return Err(Error::param("carrier_hz", format!("must be positive, got {}", self.carrier_hz)));
        }
        for (name, v) in [
            ("eirp_dbw", self.eirp_dbw),
            ("g_over_t_dbk", self.g_over_t_dbk),
            ("boltzmann_dbwkhz", self.boltzmann_dbwkhz),
        ] {
            if !v.is_finite() {
                return Err(Error::param(name, format!("must be finite, got {v}")));
            }
        }
        Ok(())
    }

    /// Same budget at another range, e.g. a slant range for low elevation.
    pub fn at_range(mut self, slant_range_m: f64) -> Self {
        self.slant_range_m = slant_range_m;
        self
    }
}

/// 20·log10(4π d f / c) with c = 3e8 m/s.
pub fn fspl_db(range_m: f64, carrier_hz: f64) -> Result<f64> {
    fspl_db_with(range_m, carrier_hz, SpeedOfLight::Rounded)
}

pub fn fspl_db_with(range_m: f64, carrier_hz: f64, c: SpeedOfLight) -> Result<f64> {
    if !(range_m.is_finite() && range_m > 0.0) {
        return Err(Error::param("range_m", format!("must be positive, got {range_m}")));
    }
    if !(carrier_hz.is_finite() && carrier_hz > 0.0) {
        return Err(Error::param("carrier_hz", format!("must be positive, got {carrier_hz}")));
    }
    Ok(20.0 * (4.0 * PI * range_m * carrier_hz / c.mps()).log10())
}

/// EIRP + G/T − FSPL − 10·log10(k), no other losses.
pub fn cn0_max_dbhz(spec: &LinkBudgetSpec) -> Result<f64> {
    spec.validate()?;
    let fspl = fspl_db_with(spec.slant_range_m, spec.carrier_hz, spec.speed_of_light)?;
    Ok(spec.eirp_dbw + spec.g_over_t_dbk - fspl - spec.boltzmann_dbwkhz)
}

/// Published (path loss, maximum C/N0) pair each default budget is solved from.
fn published_budget(system: SystemId) -> (f64, f64) {
    match system {
        SystemId::Starlink => (168.5, 109.3),
        SystemId::OneWeb => (174.9, 105.53),
        SystemId::Iridium => (154.5, 80.6),
        SystemId::Orbcomm => (132.7, 79.6),
    }
}

/// Default budget at the satellite altitude (the minimum range).
///
/// Only the sum EIRP + G/T is known for these systems. It is reverse-solved
/// from the published path loss and C/N0 as `C/N0 + FSPL + 10·log10(k)` and
/// carried entirely in `eirp_dbw`, with `g_over_t_dbk = 0`.
pub fn default_budget(system: SystemId) -> LinkBudgetSpec {
    let sig = catalog_get(system);
    let (fspl, cn0) = published_budget(system);
    LinkBudgetSpec {
        eirp_dbw: cn0 + fspl + BOLTZMANN_DBWKHZ,
        g_over_t_dbk: 0.0,
        boltzmann_dbwkhz: BOLTZMANN_DBWKHZ,
        slant_range_m: sig.altitude_m,
        carrier_hz: sig.carrier_frequency_hz,
        speed_of_light: SpeedOfLight::Rounded,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkBudgetRow {
    pub system: SystemId,
    pub altitude_m: f64,
    pub carrier_hz: f64,
    pub fspl_db: f64,
    pub cn0_max_dbhz: f64,
    pub cn0_literature_dbhz: Option<f64>,
}

pub fn link_budget_table() -> Result<Vec<LinkBudgetRow>> {
    SystemId::ALL
        .iter()
        .map(|&system| {
            let spec = default_budget(system);
            Ok(LinkBudgetRow {
                system,
                altitude_m: spec.slant_range_m,
                carrier_hz: spec.carrier_hz,
                fspl_db: fspl_db_with(spec.slant_range_m, spec.carrier_hz, spec.speed_of_light)?,
                cn0_max_dbhz: cn0_max_dbhz(&spec)?,
                cn0_literature_dbhz: catalog_get(system).literature_cn0_dbhz,
            })
        })
        .collect()
}

pub const LINK_BUDGET_CSV_HEADER: &str = "system,altitude_m,carrier_hz,fspl_db,cn0_max_dbhz,cn0_literature_dbhz";

pub fn link_budget_csv(rows: &[LinkBudgetRow]) -> String {
    let mut out = String::from(LINK_BUDGET_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.system,
            fmt_f64(r.altitude_m),
            fmt_f64(r.carrier_hz),
            fmt_f64(r.fspl_db),
            fmt_f64(r.cn0_max_dbhz),
            fmt_opt(r.cn0_literature_dbhz),
        ));
    }
    out
}
