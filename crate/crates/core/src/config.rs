//! TOML run configurations for the scenario and acquisition commands.
//!
//! Relative paths are resolved against the directory of the config file.
//! When `SOOP_TLE_DIR` is set, relative TLE paths are resolved against it
//! instead.

use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::Deserialize;

use crate::acq::AcqConfig;
use crate::orbits::{parse_sites_csv, BeamConvention, GroundSite, StalenessGuard, VisibilityRule};
use crate::scenario::{ConstellationSource, ScenarioConfig};
use crate::{Error, Result};

pub const TLE_DIR_ENV: &str = "SOOP_TLE_DIR";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    scenario: ScenarioSection,
    #[serde(default)]
    constellation: Vec<ConstellationEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioSection {
    start: String,
    end: String,
    step_s: f64,
    masking_angle_deg: f64,
    #[serde(default = "default_beamwidths")]
    beamwidth_deg: Vec<f64>,
    #[serde(default)]
    beam_convention: BeamConvention,
    sites_csv: Option<PathBuf>,
    #[serde(default)]
    rng_seed: u64,
    #[serde(default = "default_max_age")]
    max_tle_age_days: f64,
}

fn default_beamwidths() -> Vec<f64> {
    vec![90.0]
}

fn default_max_age() -> f64 {
    StalenessGuard::default().max_age_days
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstellationEntry {
    name: String,
    tle: Vec<PathBuf>,
}

fn toml_error(source: &str, e: toml::de::Error) -> Error {
    Error::config(source.to_string(), e.message().trim().to_string())
}

fn parse_time(field: &str, text: &str) -> Result<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(text)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| Error::config(field, format!("`{text}` is not an RFC 3339 time: {e}")))
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Parses a scenario config whose relative paths hang off `base_dir`.
/// `tle_dir` overrides the base for TLE paths.
pub fn parse_scenario_config(text: &str, base_dir: &Path, tle_dir: Option<&Path>) -> Result<ScenarioConfig> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| toml_error("scenario config", e))?;
    let s = file.scenario;
    let start = parse_time("scenario.start", &s.start)?;
    let end = parse_time("scenario.end", &s.end)?;
    if s.beamwidth_deg.is_empty() {
        return Err(Error::config("scenario.beamwidth_deg", "empty list"));
    }
    let mut rules = Vec::with_capacity(s.beamwidth_deg.len());
    for (i, &phi) in s.beamwidth_deg.iter().enumerate() {
        let rule = VisibilityRule { masking_angle_deg: s.masking_angle_deg, beamwidth_deg: phi, beam_convention: s.beam_convention };
        rule.validate().map_err(|e| {
            let field = match e {
                Error::InvalidParameter { name: "masking_angle_deg", .. } => "scenario.masking_angle_deg".to_string(),
                _ => format!("scenario.beamwidth_deg[{i}]"),
            };
            Error::config(field, e.to_string())
        })?;
        rules.push(rule);
    }
    if !(s.max_tle_age_days > 0.0) {
        return Err(Error::config("scenario.max_tle_age_days", "must be positive"));
    }
    let (sites, sites_path) = match &s.sites_csv {
        Some(p) => {
            let path = resolve(base_dir, p);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::config("scenario.sites_csv", format!("{}: {e}", path.display())))?;
            let sites = parse_sites_csv(&text).map_err(|e| Error::config("scenario.sites_csv", e.to_string()))?;
            (sites, Some(path))
        }
        None => (GroundSite::reference_sites(), None),
    };
    if file.constellation.is_empty() {
        return Err(Error::config("constellation", "at least one [[constellation]] table is required"));
    }
    let tle_base = tle_dir.unwrap_or(base_dir);
    let mut constellations = Vec::with_capacity(file.constellation.len());
    for (i, c) in file.constellation.into_iter().enumerate() {
        if c.name.trim().is_empty() {
            return Err(Error::config(format!("constellation[{i}].name"), "empty name"));
        }
        if c.tle.is_empty() {
            return Err(Error::config(format!("constellation[{i}].tle"), "no TLE file given"));
        }
        let mut paths = Vec::with_capacity(c.tle.len());
        for (j, p) in c.tle.iter().enumerate() {
            let path = resolve(tle_base, p);
            if !path.is_file() {
                return Err(Error::config(format!("constellation[{i}].tle[{j}]"), format!("{} not found", path.display())));
            }
            paths.push(path);
        }
        constellations.push(ConstellationSource { name: c.name, tle_paths: paths });
    }
    let config = ScenarioConfig {
        constellations,
        sites,
        sites_path,
        start,
        end,
        step_s: s.step_s,
        rules,
        rng_seed: s.rng_seed,
        staleness: StalenessGuard { max_age_days: s.max_tle_age_days },
    };
    config.validate().map_err(|e| match e {
        Error::Config { field, reason } => Error::Config { field: format!("scenario.{field}"), reason },
        other => other,
    })?;
    Ok(config)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::config("--config", format!("{}: {e}", path.display())))
}

fn parent(path: &Path) -> &Path {
    path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."))
}

/// Loads a scenario config file, honouring `SOOP_TLE_DIR`.
pub fn load_scenario_config(path: &Path) -> Result<ScenarioConfig> {
    let text = read(path)?;
    let tle_dir = std::env::var_os(TLE_DIR_ENV).map(PathBuf::from);
    parse_scenario_config(&text, parent(path), tle_dir.as_deref())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AcqFile {
    acqsim: AcqConfig,
}

/// Parses the `[acqsim]` table; absent keys take the defaults.
pub fn parse_acq_config(text: &str) -> Result<AcqConfig> {
    let file: AcqFile = toml::from_str(text).map_err(|e| toml_error("acqsim config", e))?;
    let cfg = file.acqsim;
    cfg.validate().map_err(|e| match e {
        Error::InvalidParameter { name, reason } => Error::config(format!("acqsim.{name}"), reason),
        other => Error::config("acqsim", other.to_string()),
    })?;
    Ok(cfg)
}

pub fn load_acq_config(path: &Path) -> Result<AcqConfig> {
    parse_acq_config(&read(path)?)
}
