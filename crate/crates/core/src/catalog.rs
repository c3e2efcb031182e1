//! Physical-layer parameters of the LEO signal-of-opportunity candidates and
//! their spectral shapes.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::csvfmt::{fmt_f64, fmt_opt};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemId {
    Starlink,
    OneWeb,
    Iridium,
    Orbcomm,
}

impl SystemId {
    pub const ALL: [SystemId; 4] = [SystemId::Starlink, SystemId::OneWeb, SystemId::Iridium, SystemId::Orbcomm];

    pub fn name(self) -> &'static str {
        match self {
            SystemId::Starlink => "Starlink",
            SystemId::OneWeb => "OneWeb",
            SystemId::Iridium => "Iridium",
            SystemId::Orbcomm => "Orbcomm",
        }
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SystemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "starlink" => Ok(SystemId::Starlink),
            "oneweb" => Ok(SystemId::OneWeb),
            "iridium" | "iridium-next" | "iridium_next" => Ok(SystemId::Iridium),
            "orbcomm" => Ok(SystemId::Orbcomm),
            other => Err(Error::param("system", format!("unknown system `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Modulation {
    Ofdm,
    Qpsk,
    SdQpsk,
    FlatSpectrum,
}

/// OFDM numerology. `symbol_period_s` includes the cyclic prefix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OfdmSpec {
    pub subcarrier_count: usize,
    pub symbol_period_s: f64,
    pub chip_period_s: f64,
    pub subcarrier_spacing_hz: f64,
}

impl OfdmSpec {
    pub const STARLINK: OfdmSpec = OfdmSpec {
        subcarrier_count: 1024,
        symbol_period_s: 4.4e-6,
        chip_period_s: 4.167e-9,
        subcarrier_spacing_hz: 234_375.0,
    };

    pub fn validate(&self) -> Result<()> {
        let n = self.subcarrier_count;
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::param("subcarrier_count", format!("must be even and >= 2, got {n}")));
        }
        for (name, v) in [
            ("symbol_period_s", self.symbol_period_s),
            ("chip_period_s", self.chip_period_s),
            ("subcarrier_spacing_hz", self.subcarrier_spacing_hz),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be positive and finite, got {v}")));
            }
        }
        // Cyclic prefix cannot be negative. A few ppm of slack absorbs the
        // rounding in published chip periods.
        if self.symbol_period_s * self.subcarrier_spacing_hz < 1.0 - 1e-9 {
            return Err(Error::param(
                "symbol_period_s",
                format!(
                    "T_sym * F = {} < 1 (negative cyclic prefix)",
                    self.symbol_period_s * self.subcarrier_spacing_hz
                ),
            ));
        }
        Ok(())
    }

    /// Occupied bandwidth N·F.
    pub fn occupied_bandwidth_hz(&self) -> f64 {
        self.subcarrier_count as f64 * self.subcarrier_spacing_hz
    }

    pub fn useful_duration_s(&self) -> f64 {
        1.0 / self.subcarrier_spacing_hz
    }

    pub fn cyclic_prefix_s(&self) -> f64 {
        self.symbol_period_s - self.useful_duration_s()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub system_id: SystemId,
    pub modulation: Modulation,
    pub carrier_frequency_hz: f64,
    pub channel_bandwidth_hz: f64,
    pub channel_count: u32,
    pub symbol_period_s: f64,
    pub rolloff: Option<f64>,
    pub ofdm: Option<OfdmSpec>,
    pub altitude_m: f64,
    pub beacon_length_s: f64,
    pub max_duty_cycle: f64,
    /// C/N0 reported by measurement campaigns, when one exists.
    pub literature_cn0_dbhz: Option<f64>,
    pub notes: String,
}

impl SignalSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::InvalidSignalSpec { system: self.system_id.to_string(), reason };
        for (name, v) in [
            ("carrier_frequency_hz", self.carrier_frequency_hz),
            ("channel_bandwidth_hz", self.channel_bandwidth_hz),
            ("altitude_m", self.altitude_m),
            ("symbol_period_s", self.symbol_period_s),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(bad(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.max_duty_cycle > 0.0 && self.max_duty_cycle <= 1.0) {
            return Err(bad(format!("max_duty_cycle must lie in (0, 1], got {}", self.max_duty_cycle)));
        }
        match (self.modulation, &self.ofdm) {
            (Modulation::Ofdm, None) => return Err(bad("OFDM modulation without OFDM parameters".into())),
            (Modulation::Ofdm, Some(o)) => o.validate()?,
            (_, Some(_)) => return Err(bad("OFDM parameters on a non-OFDM signal".into())),
            _ => {}
        }
        let psk = matches!(self.modulation, Modulation::Qpsk | Modulation::SdQpsk);
        match (psk, self.rolloff) {
            (true, None) => return Err(bad("PSK signal without a roll-off factor".into())),
            (false, Some(_)) => return Err(bad("roll-off given for a non-PSK signal".into())),
            (true, Some(r)) if !(0.0..=1.0).contains(&r) => {
                return Err(bad(format!("roll-off must lie in [0, 1], got {r}")))
            }
            _ => {}
        }
        Ok(())
    }
}

/// Built-in parameter set for one system. Values are constants.
pub fn catalog_get(system: SystemId) -> SignalSpec {
    match system {
        SystemId::Starlink => SignalSpec {
            system_id: system,
            modulation: Modulation::Ofdm,
            carrier_frequency_hz: 11.57e9,
            channel_bandwidth_hz: 240e6,
            channel_count: 8,
            symbol_period_s: OfdmSpec::STARLINK.symbol_period_s,
            rolloff: None,
            ofdm: Some(OfdmSpec::STARLINK),
            altitude_m: 550e3,
            beacon_length_s: 1.33e-3,
            max_duty_cycle: 0.997,
            literature_cn0_dbhz: Some(42.6),
            notes: "Carrier quoted for the 4th channel. Unmodulated tones near 11.325 GHz spaced by 44 kHz; \
                    tone C/N0 between 24 dB-Hz and 36 dB-Hz."
                .into(),
        },
        SystemId::OneWeb => SignalSpec {
            system_id: system,
            // Inner OFDM structure unpublished; modelled as flat over the channel.
            modulation: Modulation::FlatSpectrum,
            carrier_frequency_hz: 11.075e9,
            channel_bandwidth_hz: 250e6,
            channel_count: 8,
            symbol_period_s: 1.0 / 250e6,
            rolloff: None,
            ofdm: None,
            altitude_m: 1200e3,
            beacon_length_s: 10e-3,
            max_duty_cycle: 1.0,
            literature_cn0_dbhz: Some(31.9),
            notes: "OFDM with unknown inner structure; delay bound uses a flat-spectrum model. \
                    Symbol period set to 1/B and duty cycle unreported."
                .into(),
        },
        SystemId::Iridium => SignalSpec {
            system_id: system,
            modulation: Modulation::Qpsk,
            carrier_frequency_hz: 1.621e9,
            channel_bandwidth_hz: 31.5e3,
            channel_count: 240,
            symbol_period_s: 40e-6,
            rolloff: Some(0.40),
            ofdm: None,
            altitude_m: 780e3,
            beacon_length_s: 90e-3,
            max_duty_cycle: 0.368,
            literature_cn0_dbhz: None,
            notes: "Carrier quoted for the 120th channel.".into(),
        },
        SystemId::Orbcomm => SignalSpec {
            system_id: system,
            modulation: Modulation::SdQpsk,
            carrier_frequency_hz: 137.5e6,
            channel_bandwidth_hz: 4.8e3,
            channel_count: 1,
            symbol_period_s: 208.33e-6,
            rolloff: Some(0.40),
            ofdm: None,
            altitude_m: 750e3,
            beacon_length_s: 1.0,
            max_duty_cycle: 0.50,
            literature_cn0_dbhz: None,
            notes: "Duty cycle commonly between 6 % and 10 %.".into(),
        },
    }
}

/// Starlink tone C/N0 range in dB-Hz, stored as reported.
pub const STARLINK_TONE_CN0_RANGE_DBHZ: (f64, f64) = (24.0, 36.0);
pub const STARLINK_TONE_CENTER_HZ: f64 = 11.325e9;
pub const STARLINK_TONE_SPACING_HZ: f64 = 44e3;

/// `count` unmodulated Starlink tone frequencies centred on 11.325 GHz.
pub fn starlink_tone_grid(count: usize) -> Vec<f64> {
    let centre = (count as f64 - 1.0) / 2.0;
    (0..count)
        .map(|k| STARLINK_TONE_CENTER_HZ + (k as f64 - centre) * STARLINK_TONE_SPACING_HZ)
        .collect()
}

pub const CATALOG_CSV_HEADER: &str =
    "system,carrier_hz,bandwidth_hz,channels,symbol_period_s,rolloff,altitude_m,beacon_s,max_duty";

pub fn catalog_csv() -> String {
    let mut out = String::from(CATALOG_CSV_HEADER);
    out.push('\n');
    for s in SystemId::ALL.map(catalog_get) {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            s.system_id,
            fmt_f64(s.carrier_frequency_hz),
            fmt_f64(s.channel_bandwidth_hz),
            s.channel_count,
            fmt_f64(s.symbol_period_s),
            fmt_opt(s.rolloff),
            fmt_f64(s.altitude_m),
            fmt_f64(s.beacon_length_s),
            fmt_f64(s.max_duty_cycle),
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Spectral models
// ---------------------------------------------------------------------------

/// Target bound on the relative NMSB error caused by truncating the OFDM
/// spectrum at its support hint.
const OFDM_TAIL_TRUNCATION_REL: f64 = 1e-8;

#[derive(Clone)]
enum Shape {
    Flat { bandwidth_hz: f64 },
    RaisedCosineSquared { rolloff: f64, symbol_period_s: f64 },
    OfdmTrapezoid { ofdm: OfdmSpec },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// Unnormalised magnitude-squared spectrum |G(f)|² at baseband.
///
/// The evaluator is treated as zero outside `support_hint`. `breakpoints`
/// lists the frequencies where the shape has kinks or fine structure and is
/// used to seed numerical integration.
#[derive(Clone)]
pub struct SpectrumModel {
    shape: Shape,
    scale: f64,
    support: (f64, f64),
    breakpoints: Vec<f64>,
}

impl fmt::Debug for SpectrumModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.shape {
            Shape::Flat { bandwidth_hz } => return write!(f, "SpectrumModel(flat {bandwidth_hz} Hz)"),
            Shape::RaisedCosineSquared { .. } => "raised-cosine²",
            Shape::OfdmTrapezoid { .. } => "ofdm-trapezoid",
            Shape::Custom(_) => "custom",
        };
        f.debug_struct("SpectrumModel")
            .field("shape", &kind)
            .field("scale", &self.scale)
            .field("support", &self.support)
            .field("breakpoints", &self.breakpoints.len())
            .finish()
    }
}

impl SpectrumModel {
    pub fn flat(bandwidth_hz: f64) -> Result<Self> {
        if !(bandwidth_hz.is_finite() && bandwidth_hz > 0.0) {
            return Err(Error::param("bandwidth_hz", format!("must be positive, got {bandwidth_hz}")));
        }
        let h = bandwidth_hz / 2.0;
        Ok(Self { shape: Shape::Flat { bandwidth_hz }, scale: 1.0, support: (-h, h), breakpoints: vec![-h, h] })
    }

    pub fn raised_cosine_squared(rolloff: f64, symbol_period_s: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rolloff) {
            return Err(Error::param("rolloff", format!("must lie in [0, 1], got {rolloff}")));
        }
        if !(symbol_period_s.is_finite() && symbol_period_s > 0.0) {
            return Err(Error::param("symbol_period_s", format!("must be positive, got {symbol_period_s}")));
        }
        let inner = (1.0 - rolloff) / (2.0 * symbol_period_s);
        let outer = (1.0 + rolloff) / (2.0 * symbol_period_s);
        let mut breakpoints = vec![-outer, -inner, inner, outer];
        breakpoints.dedup();
        Ok(Self {
            shape: Shape::RaisedCosineSquared { rolloff, symbol_period_s },
            scale: 1.0,
            support: (-outer, outer),
            breakpoints,
        })
    }

    /// Sum of N subcarrier spectra, each the magnitude-squared spectrum of a
    /// trapezoidal pulse (plateau `T_sym − T_C`, linear ramps of `T_C`).
    pub fn ofdm_trapezoid(ofdm: OfdmSpec) -> Result<Self> {
        ofdm.validate()?;
        let f_sub = ofdm.subcarrier_spacing_hz;
        let n = ofdm.subcarrier_count as f64;
        let half_n = ofdm.subcarrier_count as i64 / 2;

        // Each sub-pulse tail decays as 1/(π⁴ T_C² f⁴) on average, so the
        // second moment beyond |f| = X contributes about N/(π⁴ T_C² X).
        let energy = n * (ofdm.symbol_period_s - ofdm.chip_period_s / 3.0);
        let band_moment = energy * (f_sub * n).powi(2) / 12.0;
        let x_tail = n / (PI.powi(4) * ofdm.chip_period_s.powi(2) * band_moment * OFDM_TAIL_TRUNCATION_REL);
        let band_edge = (half_n as f64 + 0.5) * f_sub;
        let outer = band_edge + x_tail.max(50.0 / ofdm.chip_period_s);

        // Panels one subcarrier wide across the band, growing geometrically
        // outside it up to a few chip-rate periods.
        let mut right = Vec::new();
        let mut x = f_sub / 2.0;
        while x < band_edge {
            right.push(x);
            x += f_sub;
        }
        // Past a few hundred chip-rate lobes only the envelope matters and the
        // panels keep growing, so small N with a far cutoff stays cheap.
        let max_width = (4.0 / ofdm.chip_period_s).max(f_sub);
        let capped_until = band_edge + 256.0 / ofdm.chip_period_s;
        let mut width = f_sub;
        let mut x = band_edge;
        while x < outer {
            right.push(x);
            width *= 1.5;
            if x < capped_until {
                width = width.min(max_width);
            }
            x += width;
        }
        right.push(outer);
        let mut breakpoints: Vec<f64> = right.iter().rev().map(|v| -v).collect();
        breakpoints.extend(right);

        Ok(Self { shape: Shape::OfdmTrapezoid { ofdm }, scale: 1.0, support: (-outer, outer), breakpoints })
    }

    /// Arbitrary evaluator; `breakpoints` must include both support edges.
    pub fn from_fn<F>(f: F, support: (f64, f64), mut breakpoints: Vec<f64>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(support.0 < support.1) {
            return Err(Error::param("support", "empty interval"));
        }
        breakpoints.retain(|b| *b >= support.0 && *b <= support.1);
        breakpoints.push(support.0);
        breakpoints.push(support.1);
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        Ok(Self { shape: Shape::Custom(Arc::new(f)), scale: 1.0, support, breakpoints })
    }

    /// Same shape multiplied by a positive constant.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.scale *= factor;
        out
    }

    pub fn support_hint(&self) -> (f64, f64) {
        self.support
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn evaluate(&self, f: f64) -> f64 {
        if f < self.support.0 || f > self.support.1 {
            return 0.0;
        }
        self.scale
            * match &self.shape {
                Shape::Flat { .. } => 1.0,
                Shape::RaisedCosineSquared { rolloff, symbol_period_s } => {
                    raised_cosine(f, *rolloff, *symbol_period_s).powi(2)
                }
                Shape::OfdmTrapezoid { ofdm } => ofdm_sum(f, ofdm),
                Shape::Custom(g) => g(f),
            }
    }
}

/// Raised-cosine spectrum normalised to 1 in the pass band.
pub fn raised_cosine(f: f64, rolloff: f64, t: f64) -> f64 {
    let af = f.abs();
    let inner = (1.0 - rolloff) / (2.0 * t);
    let outer = (1.0 + rolloff) / (2.0 * t);
    if af <= inner {
        1.0
    } else if af > outer {
        0.0
    } else {
        0.5 * (1.0 + (PI * t / rolloff * (af - inner)).cos())
    }
}

#[inline]
fn sinc_of(arg: f64, sin_arg: f64) -> f64 {
    if arg.abs() < 1e-4 {
        1.0 - arg * arg / 6.0
    } else {
        sin_arg / arg
    }
}

/// Σ_{i=-N/2+1}^{N/2} |G₀(f − iF)|² with
/// |G₀(x)|² = [T_sym · sinc(π x T_sym) · sinc(π x T_C)]².
///
/// The sines for successive subcarriers come from a phasor recurrence
/// instead of fresh trig calls.
fn ofdm_sum(f: f64, o: &OfdmSpec) -> f64 {
    let a = o.symbol_period_s;
    let tc = o.chip_period_s;
    let sp = o.subcarrier_spacing_hz;
    let half_n = o.subcarrier_count as i64 / 2;
    let first = -half_n + 1;

    let x0 = f - first as f64 * sp;
    let (mut sa, mut ca) = (PI * a * x0).sin_cos();
    let (mut sb, mut cb) = (PI * tc * x0).sin_cos();
    // x decreases by F at each step.
    let (rsa, rca) = (-PI * a * sp).sin_cos();
    let (rsb, rcb) = (-PI * tc * sp).sin_cos();

    let mut acc = 0.0;
    for i in first..=half_n {
        let x = f - i as f64 * sp;
        let g = a * sinc_of(PI * a * x, sa) * sinc_of(PI * tc * x, sb);
        acc += g * g;
        let nsa = sa * rca + ca * rsa;
        ca = ca * rca - sa * rsa;
        sa = nsa;
        let nsb = sb * rcb + cb * rsb;
        cb = cb * rcb - sb * rsb;
        sb = nsb;
    }
    acc
}

/// Spectral shape for a catalogued system.
pub fn psd_model(spec: &SignalSpec) -> Result<SpectrumModel> {
    spec.validate()?;
    match spec.modulation {
        Modulation::Ofdm => SpectrumModel::ofdm_trapezoid(spec.ofdm.expect("validated")),
        Modulation::Qpsk | Modulation::SdQpsk => {
            SpectrumModel::raised_cosine_squared(spec.rolloff.expect("validated"), spec.symbol_period_s)
        }
        Modulation::FlatSpectrum => SpectrumModel::flat(spec.channel_bandwidth_hz),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_matches_published_table() {
        let s = catalog_get(SystemId::Starlink);
        assert_eq!(s.carrier_frequency_hz, 11.57e9);
        assert_eq!(s.channel_bandwidth_hz, 240e6);
        assert_eq!(s.altitude_m, 550e3);
        assert_eq!(s.beacon_length_s, 1.33e-3);
        assert_eq!(s.ofdm, Some(OfdmSpec::STARLINK));
        let o = OfdmSpec::STARLINK;
        assert_eq!((o.subcarrier_count, o.symbol_period_s, o.chip_period_s, o.subcarrier_spacing_hz), (1024, 4.4e-6, 4.167e-9, 234375.0));

        let s = catalog_get(SystemId::Orbcomm);
        assert_eq!((s.channel_bandwidth_hz, s.carrier_frequency_hz, s.altitude_m), (4.8e3, 137.5e6, 750e3));

        let s = catalog_get(SystemId::Iridium);
        assert_eq!((s.symbol_period_s, s.rolloff, s.carrier_frequency_hz), (40e-6, Some(0.40), 1.621e9));

        let s = catalog_get(SystemId::OneWeb);
        assert_eq!(s.modulation, Modulation::FlatSpectrum);
        assert_eq!(s.channel_bandwidth_hz, 250e6);
    }

    #[test]
    fn every_catalog_entry_is_valid() {
        for id in SystemId::ALL {
            catalog_get(id).validate().unwrap();
            psd_model(&catalog_get(id)).unwrap();
        }
    }

    #[test]
    fn pairing_violations_are_rejected() {
        let mut s = catalog_get(SystemId::Starlink);
        s.ofdm = None;
        assert!(psd_model(&s).is_err());

        let mut s = catalog_get(SystemId::Iridium);
        s.rolloff = None;
        assert!(psd_model(&s).is_err());

        let mut s = catalog_get(SystemId::OneWeb);
        s.rolloff = Some(0.2);
        assert!(psd_model(&s).is_err());

        let mut s = catalog_get(SystemId::Iridium);
        s.ofdm = Some(OfdmSpec::STARLINK);
        assert!(psd_model(&s).is_err());
    }

    #[test]
    fn ofdm_spec_invariants() {
        let mut o = OfdmSpec::STARLINK;
        o.subcarrier_count = 1023;
        assert!(o.validate().is_err());
        let mut o = OfdmSpec::STARLINK;
        o.symbol_period_s = 4.0e-6; // shorter than 1/F
        assert!(o.validate().is_err());
        assert!((OfdmSpec::STARLINK.cyclic_prefix_s() - (4.4e-6 - 1.0 / 234375.0)).abs() < 1e-18);
    }

    #[test]
    fn flat_support_definition() {
        let m = SpectrumModel::flat(4.8e3).unwrap();
        assert!(m.evaluate(0.0) > 0.0);
        assert_eq!(m.evaluate(0.0), m.evaluate(2e3));
        assert_eq!(m.evaluate(3e3), 0.0);
    }

    #[test]
    fn raised_cosine_support_edge() {
        let m = SpectrumModel::raised_cosine_squared(0.4, 40e-6).unwrap();
        let edge: f64 = 1.4 / (2.0 * 40e-6);
        assert!((edge - 17.5e3).abs() < 1e-9);
        assert!(m.evaluate(17.4e3) > 0.0);
        assert_eq!(m.evaluate(17.5e3 + 1e-6), 0.0);
        assert_eq!(m.evaluate(-20e3), 0.0);
        assert_eq!(m.evaluate(0.0), 1.0);
        // half-amplitude point of the raised cosine at 1/(2T)
        assert!((m.evaluate(1.0 / 80e-6) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn spectra_are_even() {
        for id in SystemId::ALL {
            let m = psd_model(&catalog_get(id)).unwrap();
            let (_, hi) = m.support_hint();
            let peak = m.evaluate(0.0);
            for k in 0..200 {
                let f = hi * (k as f64 / 173.0).fract() * 1.01;
                let (p, n) = (m.evaluate(f), m.evaluate(-f));
                assert!(p >= 0.0);
                assert!((p - n).abs() <= 1e-9 * p + 1e-12 * peak, "{id} at {f}: {p} vs {n}");
            }
        }
    }

    #[test]
    fn ofdm_sum_matches_direct_evaluation() {
        let o = OfdmSpec::STARLINK;
        let direct = |f: f64| {
            let mut acc = 0.0;
            for i in -511..=512i64 {
                let x = f - i as f64 * o.subcarrier_spacing_hz;
                let g = if x == 0.0 {
                    o.symbol_period_s
                } else {
                    (PI * x * o.symbol_period_s).sin() * (PI * x * o.chip_period_s).sin()
                        / (PI * PI * x * x * o.chip_period_s)
                };
                acc += g * g;
            }
            acc
        };
        let m = SpectrumModel::ofdm_trapezoid(o).unwrap();
        for f in [0.0, 1234.5, 60e6, 119.9e6, 121e6, 400e6, 3.3e9] {
            let (a, b) = (m.evaluate(f), direct(f));
            assert!((a - b).abs() <= 1e-9 * b, "{f}: {a} vs {b}");
        }
    }

    #[test]
    fn ofdm_support_covers_the_occupied_band() {
        let m = SpectrumModel::ofdm_trapezoid(OfdmSpec::STARLINK).unwrap();
        let peak = m.evaluate(0.0);
        let nf = OfdmSpec::STARLINK.occupied_bandwidth_hz();
        // -3 dB edges of the occupied band lie within one subcarrier of ±NF/2
        let mut f = 0.0;
        while m.evaluate(f) > 0.5 * peak {
            f += 1e3;
        }
        assert!((2.0 * f - nf).abs() < 2.0 * OfdmSpec::STARLINK.subcarrier_spacing_hz, "edge {f}");
        assert!(m.support_hint().1 > nf / 2.0);
    }

    #[test]
    fn tone_grid_is_centred() {
        let g = starlink_tone_grid(5);
        assert_eq!(g[2], 11.325e9);
        assert!((g[1] - g[0] - 44e3).abs() < 1e-3);
    }

    #[test]
    fn catalog_csv_has_four_rows() {
        let csv = catalog_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], CATALOG_CSV_HEADER);
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("Starlink,"));
        assert_eq!(lines[1].split(',').nth(5), Some(""));
    }
}
