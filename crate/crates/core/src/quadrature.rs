//! Globally adaptive Gauss–Kronrod (7/15) quadrature for vector integrands.
//!
//! Several moments of the same spectrum are integrated in one pass so that
//! every evaluation of an expensive integrand is shared between them.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

// Nodes and weights as tabulated, beyond f64 precision.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Relative tolerance applied to each component of the integral.
    pub rel_tol: f64,
    /// Absolute tolerance applied to each component of the integral.
    pub abs_tol: f64,
    /// Hard cap on the number of live subintervals.
    pub max_intervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-9, abs_tol: 0.0, max_intervals: 400_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Integral<const D: usize> {
    pub value: [f64; D],
    pub error: [f64; D],
    pub evaluations: usize,
    pub intervals: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("need at least two increasing breakpoints")]
    BadBreakpoints,
    #[error("integrand is not finite at f = {0}")]
    NonFinite(f64),
    #[error("no convergence after {intervals} intervals (relative error {rel_error:.3e})")]
    NoConvergence { intervals: usize, rel_error: f64 },
}

struct Panel<const D: usize> {
    a: f64,
    b: f64,
    value: [f64; D],
    error: [f64; D],
    key: f64,
}

impl<const D: usize> PartialEq for Panel<D> {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}
impl<const D: usize> Eq for Panel<D> {}
impl<const D: usize> PartialOrd for Panel<D> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const D: usize> Ord for Panel<D> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.total_cmp(&other.key)
    }
}

fn gk15<const D: usize, F>(f: &F, a: f64, b: f64) -> Result<([f64; D], [f64; D]), QuadratureError>
where
    F: Fn(f64) -> [f64; D],
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = [0.0; D];
    let mut gauss = [0.0; D];

    let fc = eval(f, centre)?;
    for k in 0..D {
        kronrod[k] = WGK[7] * fc[k];
        gauss[k] = WG[3] * fc[k];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(f, centre - dx)?;
        let f2 = eval(f, centre + dx)?;
        for k in 0..D {
            let s = f1[k] + f2[k];
            kronrod[k] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * s;
            }
        }
    }
    let mut value = [0.0; D];
    let mut error = [0.0; D];
    for k in 0..D {
        value[k] = kronrod[k] * half;
        error[k] = ((kronrod[k] - gauss[k]) * half).abs();
    }
    Ok((value, error))
}

fn eval<const D: usize, F: Fn(f64) -> [f64; D]>(f: &F, x: f64) -> Result<[f64; D], QuadratureError> {
    let y = f(x);
    if y.iter().all(|v| v.is_finite()) {
        Ok(y)
    } else {
        Err(QuadratureError::NonFinite(x))
    }
}

/// Integrates `f` over `[breakpoints[0], breakpoints[last]]`.
///
/// Every consecutive pair of breakpoints seeds one panel, so discontinuities
/// and fine structure should be placed on panel edges. The panel with the
/// largest tolerance-normalised error is bisected until every component
/// meets `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<const D: usize, F>(
    f: F,
    breakpoints: &[f64],
    opts: &QuadratureOptions,
) -> Result<Integral<D>, QuadratureError>
where
    F: Fn(f64) -> [f64; D],
{
    if breakpoints.len() < 2 || breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(QuadratureError::BadBreakpoints);
    }

    let mut panels = Vec::with_capacity(breakpoints.len() - 1);
    let mut total = [0.0; D];
    let mut total_err = [0.0; D];
    for w in breakpoints.windows(2) {
        let (value, error) = gk15(&f, w[0], w[1])?;
        for k in 0..D {
            total[k] += value[k];
            total_err[k] += error[k];
        }
        panels.push((w[0], w[1], value, error));
    }
    let mut evaluations = 15 * panels.len();

    // Normalisation for the priority key, frozen after the first pass.
    let scale: [f64; D] = std::array::from_fn(|k| total[k].abs().max(opts.abs_tol).max(f64::MIN_POSITIVE));
    let key_of = |e: &[f64; D]| (0..D).map(|k| e[k] / scale[k]).fold(0.0, f64::max);

    let mut heap: BinaryHeap<Panel<D>> = panels
        .into_iter()
        .map(|(a, b, value, error)| Panel { a, b, value, error, key: key_of(&error) })
        .collect();

    let converged = |total: &[f64; D], err: &[f64; D]| {
        (0..D).all(|k| err[k] <= opts.abs_tol.max(opts.rel_tol * total[k].abs()))
    };

    let mut finished: Vec<Panel<D>> = Vec::new();
    while !converged(&total, &total_err) {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        // Panel too narrow to split further at double precision.
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) <= 1e-13 * mid.abs().max(1.0) {
            finished.push(worst);
            continue;
        }
        if heap.len() + finished.len() + 2 > opts.max_intervals {
            heap.push(worst);
            break;
        }
        let (lv, le) = gk15(&f, worst.a, mid)?;
        let (rv, re) = gk15(&f, mid, worst.b)?;
        evaluations += 30;
        for k in 0..D {
            total[k] += lv[k] + rv[k] - worst.value[k];
            total_err[k] += le[k] + re[k] - worst.error[k];
        }
        heap.push(Panel { a: worst.a, b: mid, value: lv, error: le, key: key_of(&le) });
        heap.push(Panel { a: mid, b: worst.b, value: rv, error: re, key: key_of(&re) });
    }

    // Re-sum from the live panels to shed accumulated cancellation error.
    let mut value = [0.0; D];
    let mut error = [0.0; D];
    for p in heap.iter().chain(finished.iter()) {
        for k in 0..D {
            value[k] += p.value[k];
            error[k] += p.error[k];
        }
    }
    let intervals = heap.len() + finished.len();
    if !converged(&value, &error) {
        let rel_error = (0..D).map(|k| error[k] / value[k].abs().max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
        return Err(QuadratureError::NoConvergence { intervals, rel_error });
    }
    Ok(Integral { value, error, evaluations, intervals })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_moments_are_exact() {
        let r = integrate(|x| [1.0, x * x, x.powi(4)], &[-1.0, 1.0], &QuadratureOptions::default()).unwrap();
        assert!((r.value[0] - 2.0).abs() < 1e-14);
        assert!((r.value[1] - 2.0 / 3.0).abs() < 1e-14);
        assert!((r.value[2] - 0.4).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_integrand_converges() {
        // ∫_0^{50π} sin²(x) dx = 25π
        let bp: Vec<f64> = (0..=10).map(|i| i as f64 * 5.0 * std::f64::consts::PI).collect();
        let r = integrate(|x| [x.sin().powi(2)], &bp, &QuadratureOptions::default()).unwrap();
        assert!((r.value[0] / (25.0 * std::f64::consts::PI) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn peaked_integrand_needs_refinement() {
        // Lorentzian with width 1e-4: ∫ = atan(1/w)*2*w / w
        let w = 1e-4;
        let r = integrate(|x| [w / (x * x + w * w)], &[-1.0, 1.0], &QuadratureOptions::default()).unwrap();
        let exact = 2.0 * (1.0 / w).atan();
        assert!((r.value[0] / exact - 1.0).abs() < 1e-9);
        assert!(r.intervals > 1);
    }

    #[test]
    fn rejects_bad_breakpoints() {
        assert_eq!(
            integrate(|x| [x], &[1.0, 1.0], &QuadratureOptions::default()).unwrap_err(),
            QuadratureError::BadBreakpoints
        );
    }

    #[test]
    fn reports_non_finite_integrand() {
        assert!(matches!(
            integrate(|x| [if x > 0.5 { f64::NAN } else { x }], &[-1.0, 1.0], &QuadratureOptions::default()),
            Err(QuadratureError::NonFinite(_))
        ));
    }

    #[test]
    fn gives_up_when_interval_budget_is_exhausted() {
        let opts = QuadratureOptions { rel_tol: 1e-15, abs_tol: 0.0, max_intervals: 4 };
        let r = integrate(|x| [(1.0 / (x + 1e-3)).sin()], &[0.0, 1.0], &opts);
        assert!(matches!(r, Err(QuadratureError::NoConvergence { .. })));
    }
}
