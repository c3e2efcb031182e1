//! Python module `soop`: bounds, link budgets, TLE propagation, GDOP
//! campaigns and the acquisition Monte Carlo.

use chrono::{DateTime, Utc};
use nalgebra::Vector3;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use soop_core::acq::{run_acq_montecarlo, AcqConfig};
use soop_core::catalog::{catalog_get, SystemId};
use soop_core::config::{load_scenario_config, parse_acq_config};
use soop_core::link_budget::default_budget;
use soop_core::mcrlb::{self, ArrayGeometry, CnDensity};
use soop_core::orbits::walker::builtin;
use soop_core::orbits::{format_tle_file, OrbitalElements};
use soop_core::scenario::{run_scenario_multi, summaries};
use soop_core::{gdop as core_gdop, link_budget, orbits, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter { .. }
        | Error::InvalidSignalSpec { .. }
        | Error::InconsistentOfdm(_)
        | Error::EndfireSingularity(_)
        | Error::NoTleRecords(_)
        | Error::EmptyInput(_)
        | Error::Config { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn system(name: &str) -> PyResult<SystemId> {
    name.parse().map_err(py_err)
}

fn utc(text: &str) -> PyResult<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(text)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| PyValueError::new_err(format!("`{text}` is not an RFC 3339 time: {e}")))
}

/// Physical-layer parameters of one system.
#[pyclass(frozen, get_all, skip_from_py_object, module = "soop")]
#[derive(Clone)]
struct Signal {
    system: String,
    modulation: String,
    carrier_hz: f64,
    bandwidth_hz: f64,
    channel_count: u32,
    symbol_period_s: f64,
    rolloff: Option<f64>,
    altitude_m: f64,
    literature_cn0_dbhz: Option<f64>,
}

#[pymethods]
impl Signal {
    #[new]
    fn new(system_name: &str) -> PyResult<Self> {
        let s = catalog_get(system(system_name)?);
        Ok(Self {
            system: s.system_id.name().into(),
            modulation: format!("{:?}", s.modulation),
            carrier_hz: s.carrier_frequency_hz,
            bandwidth_hz: s.channel_bandwidth_hz,
            channel_count: s.channel_count,
            symbol_period_s: s.symbol_period_s,
            rolloff: s.rolloff,
            altitude_m: s.altitude_m,
            literature_cn0_dbhz: s.literature_cn0_dbhz,
        })
    }

    /// Normalized mean-square bandwidth of the signal spectrum.
    fn nmsb(&self) -> PyResult<f64> {
        mcrlb::system_nmsb(&catalog_get(system(&self.system)?)).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Signal('{}', carrier_hz={:e}, bandwidth_hz={:e})", self.system, self.carrier_hz, self.bandwidth_hz)
    }
}

/// One bound evaluation; `std_range_m` is set for delay and
/// `std_rangerate_mps` for frequency with a carrier.
#[pyclass(frozen, get_all, skip_from_py_object, name = "Bound", module = "soop")]
#[derive(Clone)]
struct BoundValue {
    observable: String,
    variance: f64,
    std_native: f64,
    std_range_m: Option<f64>,
    std_rangerate_mps: Option<f64>,
}

impl From<mcrlb::BoundResult> for BoundValue {
    fn from(b: mcrlb::BoundResult) -> Self {
        Self {
            observable: b.observable.to_string(),
            variance: b.variance,
            std_native: b.std_native,
            std_range_m: b.std_range_m,
            std_rangerate_mps: b.std_rangerate_mps,
        }
    }
}

#[pymethods]
impl BoundValue {
    fn __repr__(&self) -> String {
        format!("Bound('{}', variance={:e})", self.observable, self.variance)
    }
}

fn cn0(dbhz: f64) -> PyResult<CnDensity> {
    CnDensity::new(dbhz).map_err(py_err)
}

#[pyfunction]
fn systems() -> Vec<&'static str> {
    SystemId::ALL.iter().map(|s| s.name()).collect()
}

#[pyfunction]
fn catalog_csv() -> String {
    soop_core::catalog::catalog_csv()
}

#[pyfunction]
fn fspl_db(range_m: f64, carrier_hz: f64) -> PyResult<f64> {
    link_budget::fspl_db(range_m, carrier_hz).map_err(py_err)
}

/// Maximum C/N0 of a system at its nominal altitude, or at `range_m`.
#[pyfunction]
#[pyo3(signature = (system_name, range_m=None))]
fn cn0_max_dbhz(system_name: &str, range_m: Option<f64>) -> PyResult<f64> {
    let mut spec = default_budget(system(system_name)?);
    if let Some(r) = range_m {
        spec = spec.at_range(r);
    }
    link_budget::cn0_max_dbhz(&spec).map_err(py_err)
}

#[pyfunction]
fn link_budget_csv() -> PyResult<String> {
    Ok(link_budget::link_budget_csv(&link_budget::link_budget_table().map_err(py_err)?))
}

/// Delay bound of a catalogued system.
#[pyfunction]
fn mcrlb_delay(system_name: &str, cn0_dbhz: f64, obs_time_s: f64) -> PyResult<BoundValue> {
    let sig = catalog_get(system(system_name)?);
    let xi = mcrlb::system_nmsb(&sig).map_err(py_err)?;
    mcrlb::mcrlb_delay(xi, sig.symbol_period_s, obs_time_s, cn0(cn0_dbhz)?).map(BoundValue::from).map_err(py_err)
}

#[pyfunction]
fn mcrlb_phase(cn0_dbhz: f64, obs_time_s: f64) -> PyResult<BoundValue> {
    mcrlb::mcrlb_phase(obs_time_s, cn0(cn0_dbhz)?).map(BoundValue::from).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (cn0_dbhz, obs_time_s, carrier_hz=None))]
fn mcrlb_freq(cn0_dbhz: f64, obs_time_s: f64, carrier_hz: Option<f64>) -> PyResult<BoundValue> {
    mcrlb::mcrlb_freq(obs_time_s, cn0(cn0_dbhz)?, carrier_hz).map(BoundValue::from).map_err(py_err)
}

/// Angle-of-arrival bound for a uniform linear array; `beta_deg` is
/// measured from the array axis.
#[pyfunction]
fn mcrlb_aoa(
    element_count: u32,
    length_m: f64,
    carrier_hz: f64,
    beta_deg: f64,
    cn0_dbhz: f64,
    obs_time_s: f64,
) -> PyResult<BoundValue> {
    let array = ArrayGeometry::from_length(element_count, length_m).map_err(py_err)?;
    mcrlb::mcrlb_aoa(&array, carrier_hz, beta_deg.to_radians(), obs_time_s, cn0(cn0_dbhz)?)
        .map(BoundValue::from)
        .map_err(py_err)
}

/// GDOP of satellites given as `(elevation_deg, azimuth_deg)` pairs.
#[pyfunction]
fn gdop(sky: Vec<(f64, f64)>) -> PyResult<f64> {
    let los: Vec<Vector3<f64>> = sky
        .iter()
        .map(|&(el, az)| {
            let (se, ce) = el.to_radians().sin_cos();
            let (sa, ca) = az.to_radians().sin_cos();
            Vector3::new(ce * sa, ce * ca, se)
        })
        .collect();
    let h = core_gdop::geometry_matrix_from_los(&los).map_err(py_err)?;
    core_gdop::gdop(&h).map_err(py_err)
}

/// `(n, P(count > n))` pairs of a satellites-in-view series.
#[pyfunction]
fn ccdf(counts: Vec<u32>) -> PyResult<Vec<(u32, f64)>> {
    core_gdop::ccdf(&counts).map_err(py_err)
}

/// Mean elements of one satellite.
#[pyclass(frozen, skip_from_py_object, module = "soop")]
#[derive(Clone)]
struct Tle {
    inner: OrbitalElements,
}

#[pymethods]
impl Tle {
    #[getter]
    fn satellite_id(&self) -> u64 {
        self.inner.satellite_id
    }
    #[getter]
    fn name(&self) -> Option<String> {
        self.inner.name.clone()
    }
    #[getter]
    fn epoch(&self) -> String {
        self.inner.epoch.to_rfc3339()
    }
    #[getter]
    fn inclination_deg(&self) -> f64 {
        self.inner.inclination_deg
    }
    #[getter]
    fn eccentricity(&self) -> f64 {
        self.inner.eccentricity
    }
    #[getter]
    fn mean_motion_revday(&self) -> f64 {
        self.inner.mean_motion_revday
    }
    #[getter]
    fn checksums_ok(&self) -> bool {
        self.inner.line_checksums_ok
    }

    /// TEME position (km) and velocity (km/s) `minutes` after the epoch.
    fn propagate_minutes(&self, minutes: f64) -> PyResult<([f64; 3], [f64; 3])> {
        orbits::Propagator::new(&self.inner).map_err(py_err)?.propagate_minutes(minutes).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Tle({}, epoch={})", self.inner.satellite_id, self.inner.epoch.to_rfc3339())
    }
}

/// Parses TLE text; malformed records are skipped.
#[pyfunction]
fn parse_tle(text: &str) -> PyResult<Vec<Tle>> {
    let parsed = orbits::parse_tle(text).map_err(py_err)?;
    Ok(parsed.records.into_iter().map(|inner| Tle { inner }).collect())
}

/// TLE text of a built-in synthetic Walker constellation.
#[pyfunction]
#[pyo3(signature = (name, epoch="2024-04-19T00:00:00Z"))]
fn synth_tle(name: &str, epoch: &str) -> PyResult<String> {
    let c = builtin(name).ok_or_else(|| PyValueError::new_err(format!("unknown constellation `{name}`")))?;
    format_tle_file(&c.generate(utc(epoch)?).map_err(py_err)?).map_err(py_err)
}

/// Runs a scenario config file and returns one summary per visibility
/// rule, site and constellation.
#[pyfunction]
fn run_scenario(py: Python<'_>, config_path: &str) -> PyResult<Vec<Py<PyAny>>> {
    let cfg = load_scenario_config(config_path.as_ref()).map_err(py_err)?;
    let result = py.detach(|| run_scenario_multi(&cfg)).map_err(py_err)?;
    let mut out = Vec::new();
    for (rule, samples) in cfg.rules.iter().zip(&result.samples) {
        for g in summaries(samples) {
            let d = pyo3::types::PyDict::new(py);
            d.set_item("masking_angle_deg", rule.masking_angle_deg)?;
            d.set_item("beamwidth_deg", rule.beamwidth_deg)?;
            d.set_item("site", &g.site)?;
            d.set_item("constellation", &g.constellation)?;
            d.set_item("mean_gdop", g.mean_gdop)?;
            d.set_item("std_gdop", g.std_gdop)?;
            d.set_item("pct_epochs_with_fix", g.pct_epochs_with_fix)?;
            d.set_item("mean_visible", g.mean_visible)?;
            d.set_item("min_visible", g.min_visible)?;
            out.push(d.into_any().unbind());
        }
    }
    Ok(out)
}

/// Acquisition Monte Carlo. `config` is the text of an `[acqsim]` TOML
/// table; `seed` overrides its master seed.
#[pyfunction]
#[pyo3(signature = (config=None, seed=None))]
fn run_acquisition(py: Python<'_>, config: Option<&str>, seed: Option<u64>) -> PyResult<Vec<Py<PyAny>>> {
    let mut cfg = match config {
        Some(text) => parse_acq_config(text).map_err(py_err)?,
        None => AcqConfig::default(),
    };
    if let Some(s) = seed {
        cfg.rng_seed = s;
    }
    let report = py.detach(|| run_acq_montecarlo(&cfg)).map_err(py_err)?;
    let mut out = Vec::new();
    for p in report.points {
        let d = pyo3::types::PyDict::new(py);
        d.set_item("cn0_dbhz", p.cn0_dbhz)?;
        d.set_item("trials", p.trials)?;
        d.set_item("failed", p.failed)?;
        d.set_item("bias_s", p.bias_s)?;
        d.set_item("std_m", p.std_m)?;
        d.set_item("mcrlb_std_m", p.mcrlb_std_m)?;
        out.push(d.into_any().unbind());
    }
    Ok(out)
}

#[pymodule]
fn soop(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Signal>()?;
    m.add_class::<BoundValue>()?;
    m.add_class::<Tle>()?;
    m.add_function(wrap_pyfunction!(systems, m)?)?;
    m.add_function(wrap_pyfunction!(catalog_csv, m)?)?;
    m.add_function(wrap_pyfunction!(fspl_db, m)?)?;
    m.add_function(wrap_pyfunction!(cn0_max_dbhz, m)?)?;
    m.add_function(wrap_pyfunction!(link_budget_csv, m)?)?;
    m.add_function(wrap_pyfunction!(mcrlb_delay, m)?)?;
    m.add_function(wrap_pyfunction!(mcrlb_phase, m)?)?;
    m.add_function(wrap_pyfunction!(mcrlb_freq, m)?)?;
    m.add_function(wrap_pyfunction!(mcrlb_aoa, m)?)?;
    m.add_function(wrap_pyfunction!(gdop, m)?)?;
    m.add_function(wrap_pyfunction!(ccdf, m)?)?;
    m.add_function(wrap_pyfunction!(parse_tle, m)?)?;
    m.add_function(wrap_pyfunction!(synth_tle, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(run_acquisition, m)?)?;
    Ok(())
}
