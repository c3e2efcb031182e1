//! Satellites-in-view and GDOP campaigns over a grid of epochs and sites.

use std::path::PathBuf;

use chrono::{DateTime, Duration, SecondsFormat, Utc};
use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;

use crate::csvfmt::fmt_f64;
use crate::gdop::{ccdf, cdf, gdop, geometry_matrix_from_los, summarize};
use crate::orbits::frames::{gmst_rad, teme_to_ecef};
use crate::orbits::{
    parse_tle, GroundSite, OrbitalElements, Propagator, StalenessGuard, Topocentric, VisibilityRule,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstellationSource {
    pub name: String,
    pub tle_paths: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub constellations: Vec<ConstellationSource>,
    pub sites: Vec<GroundSite>,
    /// Where `sites` came from, when read from a file.
    pub sites_path: Option<PathBuf>,
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
    pub step_s: f64,
    /// One campaign is run per rule; propagation is shared between them.
    pub rules: Vec<VisibilityRule>,
    /// Reserved for randomised sub-sampling; the campaign itself is
    /// deterministic.
    pub rng_seed: u64,
    pub staleness: StalenessGuard,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.start < self.end) {
            return Err(Error::config("end", format!("end {} is not after start {}", self.end, self.start)));
        }
        if !(self.step_s.is_finite() && self.step_s > 0.0) {
            return Err(Error::config("step_s", format!("must be positive, got {}", self.step_s)));
        }
        if self.sites.is_empty() {
            return Err(Error::config("sites", "at least one site is required"));
        }
        if self.constellations.is_empty() {
            return Err(Error::config("constellation", "at least one constellation is required"));
        }
        for (i, c) in self.constellations.iter().enumerate() {
            if c.tle_paths.is_empty() {
                return Err(Error::config(format!("constellation[{i}].tle"), "no TLE file given"));
            }
        }
        if self.rules.is_empty() {
            return Err(Error::config("beamwidth_deg", "at least one visibility rule is required"));
        }
        for r in &self.rules {
            r.validate().map_err(|e| Error::config("rule", e.to_string()))?;
        }
        Ok(())
    }
}

/// Propagators for one constellation.
#[derive(Debug, Clone)]
pub struct Constellation {
    pub name: String,
    pub satellites: Vec<Propagator>,
    /// Element sets that could not be initialised, with the reason.
    pub rejected: Vec<(u64, String)>,
}

impl Constellation {
    pub fn from_elements(name: impl Into<String>, elements: &[OrbitalElements], guard: StalenessGuard) -> Self {
        let mut satellites = Vec::with_capacity(elements.len());
        let mut rejected = Vec::new();
        for el in elements {
            match Propagator::with_guard(el, guard) {
                Ok(p) => satellites.push(p),
                Err(e) => rejected.push((el.satellite_id, e.to_string())),
            }
        }
        Self { name: name.into(), satellites, rejected }
    }

    pub fn load(source: &ConstellationSource, guard: StalenessGuard) -> Result<Self> {
        let mut elements = Vec::new();
        for path in &source.tle_paths {
            let text = std::fs::read_to_string(path)?;
            let parsed = parse_tle(&text)?;
            for d in &parsed.diagnostics {
                log::warn!("{}: {d}", path.display());
            }
            elements.extend(parsed.records);
        }
        let c = Self::from_elements(&source.name, &elements, guard);
        for (id, why) in &c.rejected {
            log::warn!("{}: satellite {id} skipped: {why}", source.name);
        }
        Ok(c)
    }
}

/// `start, start + step, …` up to and including `end`.
pub fn epoch_grid(start: DateTime<Utc>, end: DateTime<Utc>, step_s: f64) -> Result<Vec<DateTime<Utc>>> {
    if !(step_s.is_finite() && step_s > 0.0) {
        return Err(Error::param("step_s", format!("must be positive, got {step_s}")));
    }
    if end < start {
        return Err(Error::param("end", "before start"));
    }
    let step_ns = (step_s * 1e9).round() as i64;
    if step_ns <= 0 {
        return Err(Error::param("step_s", "below one nanosecond"));
    }
    let span_ns = (end - start).num_nanoseconds().ok_or_else(|| Error::param("end", "span too long"))?;
    Ok((0..=span_ns / step_ns).map(|k| start + Duration::nanoseconds(k * step_ns)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GdopSample {
    pub epoch: DateTime<Utc>,
    pub site: String,
    pub constellation: String,
    pub visible_count: u32,
    pub gdop: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CampaignStats {
    pub propagation_failures: usize,
    pub stale_propagations: usize,
}

#[derive(Debug, Clone)]
pub struct CampaignResult {
    /// One sample list per rule, ordered constellation → site → epoch.
    pub samples: Vec<Vec<GdopSample>>,
    pub stats: CampaignStats,
}

/// `[constellation][site][rule]` → (count, gdop).
type Cells = Vec<Vec<Vec<(u32, Option<f64>)>>>;

struct EpochOutcome {
    cells: Cells,
    failures: usize,
    stale: usize,
}

fn evaluate_epoch(
    epoch: DateTime<Utc>,
    constellations: &[Constellation],
    sites: &[Topocentric],
    rules: &[VisibilityRule],
) -> EpochOutcome {
    let gmst = gmst_rad(epoch);
    let mut failures = 0;
    let mut stale = 0;
    let min_sin_el = rules
        .iter()
        .map(|r| r.masking_angle_deg)
        .fold(f64::INFINITY, f64::min)
        .to_radians()
        .sin();
    let mut cells = Vec::with_capacity(constellations.len());
    let mut ecef: Vec<Vector3<f64>> = Vec::new();
    let mut candidates: Vec<(Vector3<f64>, f64, f64)> = Vec::new();
    let mut los: Vec<Vector3<f64>> = Vec::new();
    for c in constellations {
        ecef.clear();
        for sat in &c.satellites {
            match sat.propagate(epoch) {
                Ok(p) => {
                    if p.stale.is_some() {
                        stale += 1;
                    }
                    ecef.push(teme_to_ecef(&p.state.position_eci_m, gmst));
                }
                Err(e) => {
                    log::debug!("{}: {e}", c.name);
                    failures += 1;
                }
            }
        }
        let mut per_site = Vec::with_capacity(sites.len());
        for topo in sites {
            // (unit ENU line of sight, elevation, off-nadir)
            candidates.clear();
            for r in &ecef {
                let Ok((u, range)) = topo.line_of_sight(r) else { continue };
                if u.z < min_sin_el - 1e-12 {
                    continue;
                }
                let to_site = topo.ecef_m - r;
                let cos_nadir = (-r).dot(&to_site) / (r.norm() * range);
                let off_nadir = cos_nadir.clamp(-1.0, 1.0).acos().to_degrees();
                candidates.push((u, u.z.clamp(-1.0, 1.0).asin().to_degrees(), off_nadir));
            }
            let per_rule = rules
                .iter()
                .map(|rule| {
                    los.clear();
                    los.extend(
                        candidates
                            .iter()
                            .filter(|(_, el, nadir)| crate::orbits::is_visible(*el, *nadir, rule))
                            .map(|c| c.0),
                    );
                    let count = los.len() as u32;
                    let g = if count >= 4 {
                        geometry_matrix_from_los(&los).and_then(|h| gdop(&h)).ok()
                    } else {
                        None
                    };
                    (count, g)
                })
                .collect();
            per_site.push(per_rule);
        }
        cells.push(per_site);
    }
    EpochOutcome { cells, failures, stale }
}

/// Runs every rule over the same propagated geometry.
pub fn run_campaign(
    constellations: &[Constellation],
    sites: &[GroundSite],
    epochs: &[DateTime<Utc>],
    rules: &[VisibilityRule],
) -> Result<CampaignResult> {
    if sites.is_empty() {
        return Err(Error::EmptyInput("sites"));
    }
    if rules.is_empty() {
        return Err(Error::EmptyInput("visibility rules"));
    }
    let topo: Vec<Topocentric> = sites.iter().map(Topocentric::new).collect();
    let outcomes: Vec<EpochOutcome> =
        epochs.par_iter().map(|&t| evaluate_epoch(t, constellations, &topo, rules)).collect();

    let mut stats = CampaignStats::default();
    for o in &outcomes {
        stats.propagation_failures += o.failures;
        stats.stale_propagations += o.stale;
    }
    if stats.stale_propagations > 0 {
        log::warn!("{} propagations used elements older than the staleness limit", stats.stale_propagations);
    }
    let mut samples = vec![Vec::with_capacity(constellations.len() * sites.len() * epochs.len()); rules.len()];
    for (ci, c) in constellations.iter().enumerate() {
        for (si, s) in sites.iter().enumerate() {
            for (ei, &epoch) in epochs.iter().enumerate() {
                for (ri, out) in samples.iter_mut().enumerate() {
                    let (visible_count, gdop) = outcomes[ei].cells[ci][si][ri];
                    out.push(GdopSample {
                        epoch,
                        site: s.name.clone(),
                        constellation: c.name.clone(),
                        visible_count,
                        gdop,
                    });
                }
            }
        }
    }
    Ok(CampaignResult { samples, stats })
}

/// Loads the TLE sources and runs all rules of the configuration.
pub fn run_scenario_multi(config: &ScenarioConfig) -> Result<CampaignResult> {
    config.validate()?;
    let constellations = config
        .constellations
        .iter()
        .map(|s| Constellation::load(s, config.staleness))
        .collect::<Result<Vec<_>>>()?;
    let epochs = epoch_grid(config.start, config.end, config.step_s)?;
    run_campaign(&constellations, &config.sites, &epochs, &config.rules)
}

/// Single-rule form: uses the first rule of the configuration.
pub fn run_scenario(config: &ScenarioConfig) -> Result<Vec<GdopSample>> {
    let mut cfg = config.clone();
    cfg.rules.truncate(1);
    Ok(run_scenario_multi(&cfg)?.samples.remove(0))
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Groups of samples sharing (constellation, site), in first-seen order.
pub fn groups(samples: &[GdopSample]) -> Vec<(String, String, Vec<&GdopSample>)> {
    let mut out: Vec<(String, String, Vec<&GdopSample>)> = Vec::new();
    for s in samples {
        match out.iter_mut().find(|g| g.0 == s.constellation && g.1 == s.site) {
            Some(g) => g.2.push(s),
            None => out.push((s.constellation.clone(), s.site.clone(), vec![s])),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub site: String,
    pub constellation: String,
    pub mean_gdop: Option<f64>,
    pub std_gdop: Option<f64>,
    pub pct_epochs_with_fix: f64,
    pub mean_visible: f64,
    pub min_visible: u32,
    /// Fraction of epochs with at least `threshold` satellites in view.
    pub epochs: usize,
}

impl GroupSummary {
    pub fn fraction_at_least(samples: &[&GdopSample], threshold: u32) -> f64 {
        samples.iter().filter(|s| s.visible_count >= threshold).count() as f64 / samples.len().max(1) as f64
    }
}

pub fn summaries(samples: &[GdopSample]) -> Vec<GroupSummary> {
    groups(samples)
        .into_iter()
        .map(|(constellation, site, g)| {
            let values: Vec<f64> = g.iter().filter_map(|s| s.gdop).collect();
            let stats = summarize(&values).ok();
            let n = g.len();
            GroupSummary {
                site,
                constellation,
                mean_gdop: stats.map(|s| s.mean),
                std_gdop: stats.map(|s| s.std),
                pct_epochs_with_fix: 100.0 * values.len() as f64 / n as f64,
                mean_visible: g.iter().map(|s| s.visible_count as f64).sum::<f64>() / n as f64,
                min_visible: g.iter().map(|s| s.visible_count).min().unwrap_or(0),
                epochs: n,
            }
        })
        .collect()
}

pub const SAMPLES_CSV_HEADER: &str = "epoch_utc,site,constellation,visible_count,gdop";
pub const CCDF_CSV_HEADER: &str = "site,constellation,N,p_exceed";
pub const GDOP_CDF_CSV_HEADER: &str = "site,constellation,gdop,cdf";
pub const SUMMARY_CSV_HEADER: &str = "site,constellation,mean_gdop,std_gdop,pct_epochs_with_fix";

pub fn samples_csv(samples: &[GdopSample]) -> String {
    let mut out = String::with_capacity(64 * (samples.len() + 1));
    out.push_str(SAMPLES_CSV_HEADER);
    out.push('\n');
    for s in samples {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            s.epoch.to_rfc3339_opts(SecondsFormat::Secs, true),
            s.site,
            s.constellation,
            s.visible_count,
            s.gdop.map(fmt_f64).unwrap_or_default()
        ));
    }
    out
}

pub fn ccdf_csv(samples: &[GdopSample]) -> String {
    let mut out = String::from(CCDF_CSV_HEADER);
    out.push('\n');
    for (c, s, g) in groups(samples) {
        let counts: Vec<u32> = g.iter().map(|x| x.visible_count).collect();
        for (n, p) in ccdf(&counts).expect("groups are non-empty") {
            out.push_str(&format!("{s},{c},{n},{}\n", fmt_f64(p)));
        }
    }
    out
}

pub fn gdop_cdf_csv(samples: &[GdopSample]) -> String {
    let mut out = String::from(GDOP_CDF_CSV_HEADER);
    out.push('\n');
    for (c, s, g) in groups(samples) {
        let values: Vec<f64> = g.iter().filter_map(|x| x.gdop).collect();
        if let Ok(table) = cdf(&values) {
            for (x, p) in table {
                out.push_str(&format!("{s},{c},{},{}\n", fmt_f64(x), fmt_f64(p)));
            }
        }
    }
    out
}

pub fn summary_csv(samples: &[GdopSample]) -> String {
    let mut out = String::from(SUMMARY_CSV_HEADER);
    out.push('\n');
    for g in summaries(samples) {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            g.site,
            g.constellation,
            g.mean_gdop.map(fmt_f64).unwrap_or_default(),
            g.std_gdop.map(fmt_f64).unwrap_or_default(),
            fmt_f64(g.pct_epochs_with_fix)
        ));
    }
    out
}
