//! Modified Cramér–Rao lower bounds for delay, phase, frequency and angle of
//! arrival, the normalised mean-square bandwidth that drives the delay bound,
//! and conversion of the bounds to ranging units.
//!
//! Every bound is a variance of the form `(N0/2) / E_u[∫|∂s/∂λ|² dt]`
//! evaluated in closed form. C/N0 enters in dB-Hz and is converted once.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::catalog::{psd_model, Modulation, OfdmSpec, SignalSpec, SpectrumModel};
use crate::csvfmt::fmt_f64;
use crate::quadrature::{integrate, QuadratureOptions};
use crate::{Error, Result, SpeedOfLight};

/// Carrier-to-noise density ratio in dB-Hz.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct CnDensity {
    pub value_dbhz: f64,
}

impl CnDensity {
    pub fn new(value_dbhz: f64) -> Result<Self> {
        if !value_dbhz.is_finite() {
            return Err(Error::param("cn0_dbhz", format!("must be finite, got {value_dbhz}")));
        }
        Ok(Self { value_dbhz })
    }

    pub fn dbhz(value_dbhz: f64) -> Self {
        Self { value_dbhz }
    }

    /// C/N0 in Hz.
    pub fn linear(&self) -> f64 {
        10f64.powf(self.value_dbhz / 10.0)
    }

    fn checked_linear(&self) -> Result<f64> {
        let lin = self.linear();
        if !(self.value_dbhz.is_finite() && lin > 0.0 && lin.is_finite()) {
            return Err(Error::param("cn0_dbhz", format!("out of range: {}", self.value_dbhz)));
        }
        Ok(lin)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Observable {
    Delay,
    Phase,
    Frequency,
    Aoa,
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Observable::Delay => "delay",
            Observable::Phase => "phase",
            Observable::Frequency => "frequency",
            Observable::Aoa => "aoa",
        })
    }
}

impl std::str::FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "delay" | "tau" => Ok(Observable::Delay),
            "phase" | "theta" => Ok(Observable::Phase),
            "frequency" | "freq" | "upsilon" => Ok(Observable::Frequency),
            "aoa" | "beta" => Ok(Observable::Aoa),
            other => Err(Error::param("observable", format!("unknown observable `{other}`"))),
        }
    }
}

/// One bound evaluation. `variance` is in s², rad², Hz² or rad² (AoA).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub observable: Observable,
    pub variance: f64,
    pub std_native: f64,
    /// Ranging std in meters (delay only).
    pub std_range_m: Option<f64>,
    /// Range-rate std in m/s (frequency only, needs a carrier).
    pub std_rangerate_mps: Option<f64>,
}

impl BoundResult {
    fn new(observable: Observable, variance: f64) -> Self {
        Self { observable, variance, std_native: variance.sqrt(), std_range_m: None, std_rangerate_mps: None }
    }
}

/// Uniform linear array. `length_m = spacing_m · (M − 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub element_count: u32,
    pub length_m: f64,
    pub spacing_m: f64,
}

impl ArrayGeometry {
    pub fn from_spacing(element_count: u32, spacing_m: f64) -> Result<Self> {
        Self::check(element_count, spacing_m)?;
        Ok(Self { element_count, length_m: spacing_m * (element_count - 1) as f64, spacing_m })
    }

    pub fn from_length(element_count: u32, length_m: f64) -> Result<Self> {
        if element_count < 2 {
            return Err(Error::param("element_count", format!("need M >= 2, got {element_count}")));
        }
        let spacing_m = length_m / (element_count - 1) as f64;
        Self::check(element_count, spacing_m)?;
        Ok(Self { element_count, length_m, spacing_m })
    }

    fn check(element_count: u32, spacing_m: f64) -> Result<()> {
        if element_count < 2 {
            return Err(Error::param("element_count", format!("need M >= 2, got {element_count}")));
        }
        if !(spacing_m.is_finite() && spacing_m > 0.0) {
            return Err(Error::param("spacing_m", format!("must be positive, got {spacing_m}")));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        Self::check(self.element_count, self.spacing_m)?;
        let expect = self.spacing_m * (self.element_count - 1) as f64;
        if (self.length_m - expect).abs() > 1e-12 * expect {
            return Err(Error::param("length_m", format!("L = {} but d(M-1) = {expect}", self.length_m)));
        }
        Ok(())
    }
}

fn positive(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::param(name, format!("must be positive and finite, got {v}")))
    }
}

/// Default tolerances for the NMSB integrals.
pub const NMSB_QUADRATURE: QuadratureOptions = QuadratureOptions { rel_tol: 1e-9, abs_tol: 0.0, max_intervals: 400_000 };

/// ξ = T² ∫f²|G|²df / ∫|G|²df by adaptive quadrature over the support hint.
pub fn nmsb_numeric(spectrum: &SpectrumModel, symbol_period_s: f64) -> Result<f64> {
    nmsb_numeric_with(spectrum, symbol_period_s, &NMSB_QUADRATURE)
}

pub fn nmsb_numeric_with(spectrum: &SpectrumModel, symbol_period_s: f64, opts: &QuadratureOptions) -> Result<f64> {
    let t = positive("symbol_period_s", symbol_period_s)?;
    let moments = integrate(
        |f| {
            let g = spectrum.evaluate(f);
            [g, f * f * g]
        },
        spectrum.breakpoints(),
        opts,
    )
    .map_err(|e| Error::DegenerateSpectrum(e.to_string()))?;
    let [energy, second] = moments.value;
    if !(energy > 0.0) {
        return Err(Error::DegenerateSpectrum(format!("spectrum energy is {energy}")));
    }
    Ok(t * t * second / energy)
}

/// Closed-form ξ of the OFDM trapezoidal model, with T = T_sym:
///
/// ξ = T_sym² · ( (2/T_C) / ((2π)² (T_sym − T_C/3)) + (F·N)²/12 + F²/6 )
///
/// The first term is the sub-pulse's own second moment, ∫|g₀'|²/(4π²∫|g₀|²);
/// the other two come from spreading N copies of it on the subcarrier grid.
pub fn nmsb_ofdm_closed_form(ofdm: &OfdmSpec) -> Result<f64> {
    ofdm.validate()?;
    let t = ofdm.symbol_period_s;
    let tc = ofdm.chip_period_s;
    let f = ofdm.subcarrier_spacing_hz;
    let n = ofdm.subcarrier_count as f64;
    let pulse = 1.0 / (2.0 * PI).powi(2) * (2.0 / tc) / (t - tc / 3.0);
    let xi = t * t * (pulse + (f * n).powi(2) / 12.0 + f * f / 6.0);
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::InconsistentOfdm(xi));
    }
    Ok(xi)
}

/// ξ for a catalogued system: closed form for OFDM, quadrature otherwise.
pub fn system_nmsb(spec: &SignalSpec) -> Result<f64> {
    match (spec.modulation, &spec.ofdm) {
        (Modulation::Ofdm, Some(ofdm)) => nmsb_ofdm_closed_form(ofdm),
        _ => nmsb_numeric(&psd_model(spec)?, spec.symbol_period_s),
    }
}

/// var(τ) = T² / (8π² ξ T0 C/N0) in s².
pub fn mcrlb_delay(xi: f64, symbol_period_s: f64, obs_time_s: f64, cn0: CnDensity) -> Result<BoundResult> {
    mcrlb_delay_with(xi, symbol_period_s, obs_time_s, cn0, SpeedOfLight::Rounded)
}

pub fn mcrlb_delay_with(
    xi: f64,
    symbol_period_s: f64,
    obs_time_s: f64,
    cn0: CnDensity,
    c: SpeedOfLight,
) -> Result<BoundResult> {
    let xi = positive("xi", xi)?;
    let t = positive("symbol_period_s", symbol_period_s)?;
    let t0 = positive("obs_time_s", obs_time_s)?;
    let cn0 = cn0.checked_linear()?;
    let variance = t * t / (8.0 * PI * PI * xi * t0 * cn0);
    let mut out = BoundResult::new(Observable::Delay, variance);
    out.std_range_m = Some(c.mps() * out.std_native);
    Ok(out)
}

/// var(θ) = 1 / (2 T0 C/N0) in rad².
pub fn mcrlb_phase(obs_time_s: f64, cn0: CnDensity) -> Result<BoundResult> {
    let t0 = positive("obs_time_s", obs_time_s)?;
    let cn0 = cn0.checked_linear()?;
    Ok(BoundResult::new(Observable::Phase, 1.0 / (2.0 * t0 * cn0)))
}

/// var(υ) = 3 / (2π² T0³ C/N0) in Hz². With a carrier, the std is also
/// expressed as a range rate c·σ/f_c.
pub fn mcrlb_freq(obs_time_s: f64, cn0: CnDensity, carrier_hz: Option<f64>) -> Result<BoundResult> {
    mcrlb_freq_with(obs_time_s, cn0, carrier_hz, SpeedOfLight::Rounded)
}

pub fn mcrlb_freq_with(
    obs_time_s: f64,
    cn0: CnDensity,
    carrier_hz: Option<f64>,
    c: SpeedOfLight,
) -> Result<BoundResult> {
    let t0 = positive("obs_time_s", obs_time_s)?;
    let cn0 = cn0.checked_linear()?;
    let mut out = BoundResult::new(Observable::Frequency, 3.0 / (2.0 * PI * PI * t0.powi(3) * cn0));
    if let Some(fc) = carrier_hz {
        let fc = positive("carrier_hz", fc)?;
        out.std_rangerate_mps = Some(c.mps() * out.std_native / fc);
    }
    Ok(out)
}

/// Angle-of-arrival bound for an M-element uniform linear array:
///
/// var(β) = 12 / [ (2π)² M (C/N0) T0 ((M+1)/(M−1)) (L f_c / c)² sin²β ]
pub fn mcrlb_aoa(
    array: &ArrayGeometry,
    carrier_hz: f64,
    beta_rad: f64,
    obs_time_s: f64,
    cn0: CnDensity,
) -> Result<BoundResult> {
    mcrlb_aoa_with(array, carrier_hz, beta_rad, obs_time_s, cn0, SpeedOfLight::Rounded)
}

pub fn mcrlb_aoa_with(
    array: &ArrayGeometry,
    carrier_hz: f64,
    beta_rad: f64,
    obs_time_s: f64,
    cn0: CnDensity,
    c: SpeedOfLight,
) -> Result<BoundResult> {
    array.validate()?;
    let fc = positive("carrier_hz", carrier_hz)?;
    let t0 = positive("obs_time_s", obs_time_s)?;
    let cn0 = cn0.checked_linear()?;
    if !beta_rad.is_finite() || !(0.0..=PI).contains(&beta_rad) {
        return Err(Error::param("beta_rad", format!("must lie in (0, π), got {beta_rad}")));
    }
    let sin_b = beta_rad.sin();
    if sin_b.abs() < 1e-9 {
        return Err(Error::EndfireSingularity(beta_rad));
    }
    let m = array.element_count as f64;
    let aperture = array.length_m * fc / c.mps();
    let denom = (2.0 * PI).powi(2) * m * cn0 * t0 * ((m + 1.0) / (m - 1.0)) * aperture * aperture * sin_b * sin_b;
    let variance = 12.0 / denom;
    if !variance.is_finite() {
        return Err(Error::EndfireSingularity(beta_rad));
    }
    Ok(BoundResult::new(Observable::Aoa, variance))
}

/// σ_pos = σ_UERE · GDOP.
pub fn position_accuracy(sigma_uere_m: f64, gdop: f64) -> f64 {
    sigma_uere_m * gdop
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AoaParams {
    pub element_count: u32,
    pub length_m: f64,
    pub beta_deg: f64,
}

impl Default for AoaParams {
    fn default() -> Self {
        Self { element_count: 2, length_m: 0.5, beta_deg: 50.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub observable: Observable,
    pub systems: Vec<crate::catalog::SystemId>,
    pub cn0_dbhz: Vec<f64>,
    pub obs_time_s: Vec<f64>,
    pub aoa: AoaParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub observable: Observable,
    pub system: crate::catalog::SystemId,
    pub cn0_dbhz: f64,
    pub obs_time_s: f64,
    pub bound: BoundResult,
    /// Delay → m, frequency → m/s, phase → m of carrier-phase range,
    /// AoA → degrees.
    pub std_converted: f64,
}

pub const SWEEP_CSV_HEADER: &str = "observable,system,cn0_dbhz,obs_time_s,variance,std_native,std_converted";

/// Evaluates the bound on the full (system × T0 × C/N0) grid.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.cn0_dbhz.is_empty() || spec.obs_time_s.is_empty() || spec.systems.is_empty() {
        return Err(Error::EmptyInput("sweep grid"));
    }
    let mut rows = Vec::with_capacity(spec.systems.len() * spec.cn0_dbhz.len() * spec.obs_time_s.len());
    for &system in &spec.systems {
        let sig = crate::catalog::catalog_get(system);
        let xi = match spec.observable {
            Observable::Delay => Some(system_nmsb(&sig)?),
            _ => None,
        };
        let array = ArrayGeometry::from_length(spec.aoa.element_count, spec.aoa.length_m)?;
        let lambda = crate::C / sig.carrier_frequency_hz;
        for &t0 in &spec.obs_time_s {
            for &cn0 in &spec.cn0_dbhz {
                let cn = CnDensity::new(cn0)?;
                let (bound, converted) = match spec.observable {
                    Observable::Delay => {
                        let b = mcrlb_delay(xi.expect("computed above"), sig.symbol_period_s, t0, cn)?;
                        (b, b.std_range_m.expect("delay has range"))
                    }
                    Observable::Phase => {
                        let b = mcrlb_phase(t0, cn)?;
                        (b, b.std_native * lambda / (2.0 * PI))
                    }
                    Observable::Frequency => {
                        let b = mcrlb_freq(t0, cn, Some(sig.carrier_frequency_hz))?;
                        (b, b.std_rangerate_mps.expect("carrier given"))
                    }
                    Observable::Aoa => {
                        let b = mcrlb_aoa(&array, sig.carrier_frequency_hz, spec.aoa.beta_deg.to_radians(), t0, cn)?;
                        (b, b.std_native.to_degrees())
                    }
                };
                rows.push(SweepRow {
                    observable: spec.observable,
                    system,
                    cn0_dbhz: cn0,
                    obs_time_s: t0,
                    bound,
                    std_converted: converted,
                });
            }
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.observable,
            r.system,
            fmt_f64(r.cn0_dbhz),
            fmt_f64(r.obs_time_s),
            fmt_f64(r.bound.variance),
            fmt_f64(r.bound.std_native),
            fmt_f64(r.std_converted),
        ));
    }
    out
}
