//! Starlink-structured OFDM synchronisation signals, a delayed AWGN channel
//! and a correlation delay estimator, plus the Monte Carlo that compares the
//! estimator against the delay bound.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::catalog::OfdmSpec;
use crate::csvfmt::fmt_f64;
use crate::mcrlb::{mcrlb_delay, nmsb_ofdm_closed_form, CnDensity};
use crate::{Error, Result, SpeedOfLight};

/// Nominal frame length and the silent tail that closes it.
pub const FRAME_DURATION_S: f64 = 1.33e-3;
pub const FRAME_SILENCE_S: f64 = 5.33e-6;

/// Sample counts of one OFDM symbol at a given rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolLayout {
    /// IFFT size, i.e. samples in the useful part 1/F.
    pub fft_len: usize,
    pub cp_len: usize,
}

impl SymbolLayout {
    pub fn new(ofdm: &OfdmSpec, sample_rate_hz: f64) -> Result<Self> {
        ofdm.validate()?;
        let occupied = ofdm.subcarrier_count as f64 * ofdm.subcarrier_spacing_hz;
        if !(sample_rate_hz.is_finite() && sample_rate_hz >= occupied * (1.0 - 1e-12)) {
            return Err(Error::param(
                "sample_rate_hz",
                format!("{sample_rate_hz} Hz is below the occupied bandwidth {occupied} Hz"),
            ));
        }
        let useful = sample_rate_hz / ofdm.subcarrier_spacing_hz;
        let cp = (ofdm.symbol_period_s - 1.0 / ofdm.subcarrier_spacing_hz) * sample_rate_hz;
        if (useful - useful.round()).abs() > 1e-6 || (cp - cp.round()).abs() > 1e-3 || cp < -1e-3 {
            return Err(Error::param(
                "sample_rate_hz",
                format!("{sample_rate_hz} Hz gives a non-integer symbol ({useful} + {cp} samples)"),
            ));
        }
        Ok(Self { fft_len: useful.round() as usize, cp_len: cp.round().max(0.0) as usize })
    }

    pub fn symbol_len(&self) -> usize {
        self.fft_len + self.cp_len
    }
}

fn ofdm_symbols(ofdm: &OfdmSpec, layout: SymbolLayout, count: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let n = ofdm.subcarrier_count as i64;
    let l = layout.fft_len;
    let ifft = FftPlanner::new().plan_fft_inverse(l);
    let scale = 1.0 / (n as f64).sqrt();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(count * layout.symbol_len());
    let mut buf = vec![Complex64::new(0.0, 0.0); l];
    for _ in 0..count {
        buf.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        // Subcarriers −N/2+1 ..= N/2, DC included.
        for k in (-n / 2 + 1)..=(n / 2) {
            let bits: u8 = rng.random_range(0..4);
            let sym = Complex64::new(if bits & 1 == 0 { h } else { -h }, if bits & 2 == 0 { h } else { -h });
            buf[k.rem_euclid(l as i64) as usize] = sym;
        }
        ifft.process(&mut buf);
        buf.iter_mut().for_each(|x| *x *= scale);
        out.extend_from_slice(&buf[l - layout.cp_len..]);
        out.extend_from_slice(&buf);
    }
    out
}

/// `count` sync symbols with seed-derived QPSK on every subcarrier, each
/// preceded by its cyclic prefix. Unit mean power over the useful part.
pub fn generate_sync_symbols(ofdm: &OfdmSpec, count: usize, sample_rate_hz: f64, seed: u64) -> Result<Vec<Complex64>> {
    if count == 0 {
        return Err(Error::param("sync_symbol_count", "must be at least 1"));
    }
    let layout = SymbolLayout::new(ofdm, sample_rate_hz)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(ofdm_symbols(ofdm, layout, count, &mut rng))
}

/// A full frame: the sync symbols, pseudo-random payload symbols, and a
/// zeroed tail of at least `FRAME_SILENCE_S`.
pub fn generate_frame(ofdm: &OfdmSpec, sync_symbol_count: usize, sample_rate_hz: f64, seed: u64) -> Result<Vec<Complex64>> {
    let layout = SymbolLayout::new(ofdm, sample_rate_hz)?;
    let frame_len = (FRAME_DURATION_S * sample_rate_hz).round() as usize;
    let silence_len = (FRAME_SILENCE_S * sample_rate_hz).ceil() as usize;
    let sym = layout.symbol_len();
    if frame_len < silence_len + sync_symbol_count * sym {
        return Err(Error::param("sample_rate_hz", "frame too short for the sync symbols"));
    }
    let payload = (frame_len - silence_len - sync_symbol_count * sym) / sym;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = ofdm_symbols(ofdm, layout, sync_symbol_count, &mut rng);
    out.extend(ofdm_symbols(ofdm, layout, payload, &mut rng));
    out.resize(frame_len, Complex64::new(0.0, 0.0));
    Ok(out)
}

pub fn mean_power(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len().max(1) as f64
}

fn check_delay(delay_s: f64, window_s: f64) -> Result<()> {
    if !(delay_s >= 0.0 && delay_s <= window_s) {
        return Err(Error::DelayOutOfWindow { delay_s, window_s });
    }
    Ok(())
}

fn window_samples(window_s: f64, sample_rate_hz: f64) -> Result<usize> {
    let w = window_s * sample_rate_hz;
    if !(w.is_finite() && w >= 4.0) {
        return Err(Error::param("search_window_s", format!("must span at least 4 samples, got {w:.3}")));
    }
    Ok(w.floor() as usize)
}

/// Multiplies a spectrum of length `nfft` by the phase ramp of a delay of
/// `d` samples.
fn apply_ramp(spec: &mut [Complex64], d: f64) {
    let nfft = spec.len();
    let step = -2.0 * std::f64::consts::PI * d / nfft as f64;
    for (k, v) in spec.iter_mut().enumerate() {
        let f = if k <= nfft / 2 { k as f64 } else { k as f64 - nfft as f64 };
        *v *= Complex64::from_polar(1.0, step * f);
    }
}

fn add_noise(x: &mut [Complex64], variance: f64, rng: &mut ChaCha8Rng) {
    let s = (variance / 2.0).sqrt();
    for v in x.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *v += Complex64::new(s * re, s * im);
    }
}

/// Noise variance per complex sample for a signal of power `carrier_power`.
pub fn noise_variance(carrier_power: f64, cn0: CnDensity, sample_rate_hz: f64) -> f64 {
    carrier_power * sample_rate_hz / cn0.linear()
}

/// Delays `samples` by `true_delay_s` (phase-ramp interpolation), places
/// them in a buffer `window_s` longer than the input and adds white
/// Gaussian noise for the given C/N0, with C the measured input power.
pub fn apply_channel(
    samples: &[Complex64],
    true_delay_s: f64,
    cn0: CnDensity,
    sample_rate_hz: f64,
    window_s: f64,
    seed: u64,
) -> Result<Vec<Complex64>> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("channel input"));
    }
    check_delay(true_delay_s, window_s)?;
    let w = window_samples(window_s, sample_rate_hz)?;
    let len = samples.len() + w + 1;
    let nfft = (len + samples.len()).next_power_of_two();
    let mut planner = FftPlanner::new();
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    buf[..samples.len()].copy_from_slice(samples);
    planner.plan_fft_forward(nfft).process(&mut buf);
    apply_ramp(&mut buf, true_delay_s * sample_rate_hz);
    planner.plan_fft_inverse(nfft).process(&mut buf);
    let inv = 1.0 / nfft as f64;
    buf.truncate(len);
    buf.iter_mut().for_each(|v| *v *= inv);
    let var = noise_variance(mean_power(samples), cn0, sample_rate_hz);
    if var > 0.0 && var.is_finite() {
        add_noise(&mut buf, var, &mut ChaCha8Rng::seed_from_u64(seed));
    }
    Ok(buf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// 3-point parabola through |c| around the discrete peak.
    #[default]
    Parabolic,
    Nearest,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayEstimate {
    pub delay_s: f64,
    /// |c| at the discrete peak, normalised by the reference energy.
    pub peak_metric: f64,
}

fn refine(mag: &[f64], k: usize, mode: Interpolation) -> f64 {
    if mode == Interpolation::Nearest || k == 0 || k + 1 >= mag.len() {
        return k as f64;
    }
    let (a, b, c) = (mag[k - 1], mag[k], mag[k + 1]);
    let den = a - 2.0 * b + c;
    if den >= 0.0 {
        return k as f64;
    }
    k as f64 + (0.5 * (a - c) / den).clamp(-0.5, 0.5)
}

/// Cross-correlation delay search reusing FFT plans and the reference
/// spectrum across calls.
pub struct Correlator {
    nfft: usize,
    window: usize,
    ref_len: usize,
    ref_energy: f64,
    ref_spectrum: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    sample_rate_hz: f64,
    interpolation: Interpolation,
}

impl Correlator {
    pub fn new(reference: &[Complex64], window_s: f64, sample_rate_hz: f64, interpolation: Interpolation) -> Result<Self> {
        if reference.is_empty() {
            return Err(Error::EmptyInput("reference"));
        }
        let ref_energy: f64 = reference.iter().map(|v| v.norm_sqr()).sum();
        if !(ref_energy > 0.0) {
            return Err(Error::ZeroSignal);
        }
        let window = window_samples(window_s, sample_rate_hz)?;
        let nfft = (reference.len() * 2 + window + 2).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(nfft);
        let inv = planner.plan_fft_inverse(nfft);
        let mut ref_spectrum = vec![Complex64::new(0.0, 0.0); nfft];
        ref_spectrum[..reference.len()].copy_from_slice(reference);
        fwd.process(&mut ref_spectrum);
        Ok(Self {
            nfft,
            window,
            ref_len: reference.len(),
            ref_energy,
            ref_spectrum,
            fwd,
            inv,
            sample_rate_hz,
            interpolation,
        })
    }

    pub fn window_samples(&self) -> usize {
        self.window
    }

    /// Received length expected by [`Correlator::estimate`].
    pub fn received_len(&self) -> usize {
        self.ref_len + self.window + 1
    }

    pub fn nfft(&self) -> usize {
        self.nfft
    }

    /// FFT of the zero-padded reference.
    pub fn reference_spectrum(&self) -> &[Complex64] {
        &self.ref_spectrum
    }

    /// Estimates the delay of `received` against the reference over lags
    /// 0 ..= window. `received` may be shorter than `received_len`; it is
    /// zero-padded.
    pub fn estimate(&self, received: &[Complex64]) -> Result<DelayEstimate> {
        if received.iter().all(|v| v.re == 0.0 && v.im == 0.0) {
            return Err(Error::ZeroSignal);
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); self.nfft];
        let n = received.len().min(self.nfft);
        buf[..n].copy_from_slice(&received[..n]);
        self.estimate_in_place(&mut buf)
    }

    /// As [`Correlator::estimate`] for a buffer already of length `nfft`,
    /// which is overwritten.
    pub fn estimate_in_place(&self, buf: &mut [Complex64]) -> Result<DelayEstimate> {
        assert_eq!(buf.len(), self.nfft);
        self.fwd.process(buf);
        for (v, s) in buf.iter_mut().zip(&self.ref_spectrum) {
            *v *= s.conj();
        }
        self.inv.process(buf);
        let scale = 1.0 / (self.nfft as f64 * self.ref_energy);
        // One lag beyond each end so the parabola has neighbours.
        let mag: Vec<f64> = (0..=self.window + 1).map(|k| buf[k].norm() * scale).collect();
        let (k, peak) = mag[..=self.window]
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &m)| if m > best.1 { (i, m) } else { best });
        if !(peak > 0.0) || !peak.is_finite() {
            return Err(Error::ZeroSignal);
        }
        let d = refine(&mag, k, self.interpolation).clamp(0.0, self.window as f64);
        Ok(DelayEstimate { delay_s: d / self.sample_rate_hz, peak_metric: peak })
    }
}

/// One-shot form of [`Correlator`].
pub fn acquire_delay(
    received: &[Complex64],
    reference: &[Complex64],
    search_window_s: f64,
    sample_rate_hz: f64,
    interpolation: Interpolation,
) -> Result<DelayEstimate> {
    if received.len() < reference.len() {
        return Err(Error::param("received", "shorter than the reference"));
    }
    let c = Correlator::new(reference, search_window_s, sample_rate_hz, interpolation)?;
    if received.len() > c.received_len() + reference.len() {
        log::debug!("received samples beyond window + reference are ignored");
    }
    c.estimate(&received[..received.len().min(c.received_len())])
}

/// Where the true delays of the Monte Carlo are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrueDelayDistribution {
    /// Uniform in the middle of the window, `W/2 ± half_width_s`.
    CenteredJitter { half_width_s: f64 },
    /// Uniform over the whole window.
    UniformWindow,
}

impl Default for TrueDelayDistribution {
    fn default() -> Self {
        TrueDelayDistribution::CenteredJitter { half_width_s: 5e-9 }
    }
}

impl TrueDelayDistribution {
    fn draw(&self, window_s: f64, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.random();
        match *self {
            TrueDelayDistribution::CenteredJitter { half_width_s } => window_s / 2.0 + (2.0 * u - 1.0) * half_width_s,
            TrueDelayDistribution::UniformWindow => u * window_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcqConfig {
    pub ofdm: OfdmSpec,
    pub sync_symbol_count: usize,
    pub sample_rate_hz: f64,
    pub cn0_grid_dbhz: Vec<f64>,
    pub trials_per_point: usize,
    pub search_window_s: f64,
    pub true_delay_distribution: TrueDelayDistribution,
    pub interpolation: Interpolation,
    /// Seed of the sync-symbol contents.
    pub sync_seed: u64,
    /// Master seed of delays and noise.
    pub rng_seed: u64,
    pub speed_of_light: SpeedOfLight,
}

impl Default for AcqConfig {
    fn default() -> Self {
        Self {
            ofdm: OfdmSpec::STARLINK,
            sync_symbol_count: 2,
            sample_rate_hz: 960e6,
            cn0_grid_dbhz: (40..=90).map(f64::from).collect(),
            trials_per_point: 300,
            search_window_s: 20.83e-6,
            true_delay_distribution: TrueDelayDistribution::default(),
            interpolation: Interpolation::Parabolic,
            sync_seed: 0x005E_ED0F_5A7C,
            rng_seed: 1,
            speed_of_light: SpeedOfLight::Rounded,
        }
    }
}

impl AcqConfig {
    pub fn validate(&self) -> Result<()> {
        SymbolLayout::new(&self.ofdm, self.sample_rate_hz)?;
        if self.sync_symbol_count == 0 {
            return Err(Error::param("sync_symbol_count", "must be at least 1"));
        }
        if self.trials_per_point == 0 {
            return Err(Error::param("trials_per_point", "must be at least 1"));
        }
        if self.cn0_grid_dbhz.is_empty() {
            return Err(Error::param("cn0_grid_dbhz", "empty grid"));
        }
        if let Some(bad) = self.cn0_grid_dbhz.iter().find(|v| !v.is_finite()) {
            return Err(Error::param("cn0_grid_dbhz", format!("non-finite value {bad}")));
        }
        window_samples(self.search_window_s, self.sample_rate_hz)?;
        if let TrueDelayDistribution::CenteredJitter { half_width_s } = self.true_delay_distribution {
            if !(half_width_s >= 0.0 && half_width_s <= self.search_window_s / 2.0) {
                return Err(Error::param("true_delay_distribution", "jitter exceeds half the window"));
            }
        }
        Ok(())
    }

    /// Sync duration, the observation time of the comparison bound.
    pub fn sync_duration_s(&self) -> f64 {
        self.sync_symbol_count as f64 * self.ofdm.symbol_period_s
    }

    /// Delay bound std (s) at `cn0_dbhz` for the sync duration.
    pub fn mcrlb_std_s(&self, cn0_dbhz: f64) -> Result<f64> {
        let xi = nmsb_ofdm_closed_form(&self.ofdm)?;
        Ok(mcrlb_delay(xi, self.ofdm.symbol_period_s, self.sync_duration_s(), CnDensity::new(cn0_dbhz)?)?.std_native)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AcqTrial {
    pub cn0_dbhz: f64,
    pub true_delay_s: f64,
    pub est_delay_s: f64,
    pub peak_metric: f64,
    /// Random stream of the trial under the master seed.
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AcqPoint {
    pub cn0_dbhz: f64,
    pub trials: usize,
    pub failed: usize,
    pub bias_s: f64,
    pub std_s: f64,
    pub std_m: f64,
    pub mcrlb_std_s: f64,
    pub mcrlb_std_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcqReport {
    pub points: Vec<AcqPoint>,
    pub trials: Vec<AcqTrial>,
}

fn stream_id(point: usize, trial: usize) -> u64 {
    ((point as u64) << 32) | trial as u64
}

/// Runs `trials_per_point` trials at each grid C/N0. Each trial draws its
/// delay and noise from its own stream, so results do not depend on
/// scheduling.
pub fn run_acq_montecarlo(config: &AcqConfig) -> Result<AcqReport> {
    config.validate()?;
    let fs = config.sample_rate_hz;
    let reference = generate_sync_symbols(&config.ofdm, config.sync_symbol_count, fs, config.sync_seed)?;
    let power = mean_power(&reference);
    let corr = Correlator::new(&reference, config.search_window_s, fs, config.interpolation)?;
    let nfft = corr.nfft();
    let rx_len = corr.received_len();
    let c = config.speed_of_light.mps();
    let window_s = corr.window_samples() as f64 / fs;

    let mut points = Vec::with_capacity(config.cn0_grid_dbhz.len());
    let mut all_trials = Vec::new();
    for (pi, &cn0_dbhz) in config.cn0_grid_dbhz.iter().enumerate() {
        let cn0 = CnDensity::new(cn0_dbhz)?;
        let var = noise_variance(power, cn0, fs);
        let outcomes: Vec<Result<AcqTrial>> = (0..config.trials_per_point)
            .into_par_iter()
            .map(|t| {
                let id = stream_id(pi, t);
                let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
                rng.set_stream(id);
                let true_delay_s = config.true_delay_distribution.draw(window_s, &mut rng);
                check_delay(true_delay_s, window_s)?;
                let mut buf = corr.reference_spectrum().to_vec();
                apply_ramp(&mut buf, true_delay_s * fs);
                corr.inv.process(&mut buf);
                let inv = 1.0 / nfft as f64;
                for (i, v) in buf.iter_mut().enumerate() {
                    *v = if i < rx_len { *v * inv } else { Complex64::new(0.0, 0.0) };
                }
                add_noise(&mut buf[..rx_len], var, &mut rng);
                let est = corr.estimate_in_place(&mut buf)?;
                Ok(AcqTrial { cn0_dbhz, true_delay_s, est_delay_s: est.delay_s, peak_metric: est.peak_metric, seed: id })
            })
            .collect();
        let mut trials = Vec::with_capacity(outcomes.len());
        let mut failed = 0;
        for o in outcomes {
            match o {
                Ok(t) => trials.push(t),
                Err(e) => {
                    log::warn!("trial at {cn0_dbhz} dB-Hz failed: {e}");
                    failed += 1;
                }
            }
        }
        if trials.is_empty() {
            return Err(Error::AllTrialsFailed(failed));
        }
        let n = trials.len() as f64;
        let errors: Vec<f64> = trials.iter().map(|t| t.est_delay_s - t.true_delay_s).collect();
        let bias_s = errors.iter().sum::<f64>() / n;
        let std_s = if trials.len() > 1 {
            (errors.iter().map(|e| (e - bias_s).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let mcrlb_std_s = config.mcrlb_std_s(cn0_dbhz)?;
        points.push(AcqPoint {
            cn0_dbhz,
            trials: trials.len(),
            failed,
            bias_s,
            std_s,
            std_m: std_s * c,
            mcrlb_std_s,
            mcrlb_std_m: mcrlb_std_s * c,
        });
        all_trials.extend(trials);
    }
    Ok(AcqReport { points, trials: all_trials })
}

pub const ACQ_RESULTS_CSV_HEADER: &str = "cn0_dbhz,trials,bias_s,std_s,std_m,mcrlb_std_s,mcrlb_std_m";
pub const ACQ_TRIALS_CSV_HEADER: &str = "cn0_dbhz,true_delay_s,est_delay_s,peak_metric,seed";

pub fn acq_results_csv(points: &[AcqPoint]) -> String {
    let mut out = String::from(ACQ_RESULTS_CSV_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f64(p.cn0_dbhz),
            p.trials,
            fmt_f64(p.bias_s),
            fmt_f64(p.std_s),
            fmt_f64(p.std_m),
            fmt_f64(p.mcrlb_std_s),
            fmt_f64(p.mcrlb_std_m)
        ));
    }
    out
}

pub fn acq_trials_csv(trials: &[AcqTrial]) -> String {
    let mut out = String::from(ACQ_TRIALS_CSV_HEADER);
    out.push('\n');
    for t in trials {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(t.cn0_dbhz),
            fmt_f64(t.true_delay_s),
            fmt_f64(t.est_delay_s),
            fmt_f64(t.peak_metric),
            t.seed
        ));
    }
    out
}
