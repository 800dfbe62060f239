//! Adaptive Gauss-Kronrod integration of complex-valued functions of a real
//! variable: finite intervals, half lines (plain and oscillatory) and double
//! integrals over rectangles and triangles.
//!
//! Subdivision is global: the interval with the largest error estimate is
//! always bisected next, so results depend only on the integrand and config.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use num_complex::Complex64;
use num_traits::Float;

use crate::{Error, Result};

/// Kronrod abscissae of the 21-point rule (QUADPACK qk21); odd entries are the
/// 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_931_837_990,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const RULE_POINTS: usize = 21;

/// Segment budget for half-line integration.
const MAX_GEOMETRIC_SEGMENTS: usize = 400;
const MAX_PERIOD_SEGMENTS: usize = 20_000;
/// Number of trailing partial sums fed to the iterated-mean accelerator.
const EULER_DEPTH: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evaluations: usize,
    /// Oscillation period of the integrand on half lines, when known.
    pub oscillation_period_hint: Option<f64>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_evaluations: 1_000_000,
            oscillation_period_hint: None,
        }
    }
}

impl QuadratureConfig {
    pub fn new(rel_tol: f64, abs_tol: f64, max_evaluations: usize) -> Result<Self> {
        let cfg = Self {
            rel_tol,
            abs_tol,
            max_evaluations,
            oscillation_period_hint: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.rel_tol.is_finite()
            && self.abs_tol.is_finite())
        {
            return Err(Error::invalid(
                "quadrature tolerances must be finite and > 0",
            ));
        }
        if self.max_evaluations < 15 {
            return Err(Error::invalid("max_evaluations must be >= 15"));
        }
        if let Some(p) = self.oscillation_period_hint {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::invalid(
                    "oscillation period hint must be finite and > 0",
                ));
            }
        }
        Ok(())
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_period_hint(mut self, period: Option<f64>) -> Self {
        self.oscillation_period_hint = period;
        self
    }

    fn target(&self, value: Complex64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl QuadratureResult {
    fn zero() -> Self {
        Self {
            value: Complex64::new(0.0, 0.0),
            error_estimate: 0.0,
            evaluations: 0,
            converged: true,
        }
    }

    fn absorb(&mut self, other: &QuadratureResult) {
        self.value += other.value;
        self.error_estimate += other.error_estimate;
        self.evaluations += other.evaluations;
        self.converged &= other.converged;
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    /// ∫|f| over the panel; sets the roundoff floor of the error.
    magnitude: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// One 21-point Kronrod panel with the QUADPACK error heuristics.
fn gk21<F: Fn(f64) -> Complex64 + ?Sized>(f: &F, a: f64, b: f64) -> (Complex64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut resabs = fc.norm() * WGK[10];
    let mut fv1 = [Complex64::new(0.0, 0.0); 10];
    let mut fv2 = [Complex64::new(0.0, 0.0); 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += (f1 + f2) * WGK[j];
        resabs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut resasc = WGK[10] * (fc - mean).norm();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }
    let result = kronrod * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((kronrod - gauss) * half).norm();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    if !(result.re.is_finite() && result.im.is_finite()) {
        err = f64::INFINITY;
    }
    (result, err, resabs)
}

/// ∫_a^b f(x) dx by globally adaptive 21-point Gauss-Kronrod.
///
/// Integrable endpoint singularities are handled by bisection toward the
/// endpoint; the rule never samples the endpoints themselves. On budget
/// exhaustion the best estimate is returned with `converged = false`.
pub fn integrate_finite<F: Fn(f64) -> Complex64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> QuadratureResult {
    if a == b {
        return QuadratureResult::zero();
    }
    if a > b {
        let mut r = integrate_finite(f, b, a, cfg);
        r.value = -r.value;
        return r;
    }
    let (v, e, m) = gk21(f, a, b);
    let mut evaluations = RULE_POINTS;
    let mut total = v;
    let mut total_err = e;
    let mut total_mag = m;
    let mut heap = BinaryHeap::new();
    heap.push(Panel {
        a,
        b,
        value: v,
        error: e,
        magnitude: m,
    });
    // Panels too narrow to bisect keep their contribution but leave the queue.
    let mut frozen: Vec<Panel> = Vec::new();

    while total_err > cfg.target(total).max(roundoff_floor(total_mag))
        && evaluations + 2 * RULE_POINTS <= cfg.max_evaluations
    {
        let Some(p) = heap.pop() else { break };
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) || (p.b - p.a) <= 4.0 * f64::EPSILON * mid.abs() {
            frozen.push(p);
            continue;
        }
        let (v1, e1, m1) = gk21(f, p.a, mid);
        let (v2, e2, m2) = gk21(f, mid, p.b);
        evaluations += 2 * RULE_POINTS;
        total += v1 + v2 - p.value;
        total_err += e1 + e2 - p.error;
        total_mag += m1 + m2 - p.magnitude;
        heap.push(Panel {
            a: p.a,
            b: mid,
            value: v1,
            error: e1,
            magnitude: m1,
        });
        heap.push(Panel {
            a: mid,
            b: p.b,
            value: v2,
            error: e2,
            magnitude: m2,
        });
        if heap.len() % 64 == 0 {
            // re-sum so incremental updates cannot drift
            total = heap.iter().chain(&frozen).map(|q| q.value).sum();
            total_err = heap.iter().chain(&frozen).map(|q| q.error).sum();
            total_mag = heap.iter().chain(&frozen).map(|q| q.magnitude).sum();
        }
    }
    let value: Complex64 = heap.iter().chain(&frozen).map(|q| q.value).sum();
    let error_estimate: f64 = heap.iter().chain(&frozen).map(|q| q.error).sum();
    let magnitude: f64 = heap.iter().chain(&frozen).map(|q| q.magnitude).sum();
    let finite = value.re.is_finite() && value.im.is_finite() && error_estimate.is_finite();
    QuadratureResult {
        value,
        error_estimate,
        evaluations,
        converged: finite && error_estimate <= cfg.target(value).max(roundoff_floor(magnitude)),
    }
}

/// Error level at which cancellation, not the rule, limits accuracy.
fn roundoff_floor(magnitude: f64) -> f64 {
    100.0 * f64::EPSILON * magnitude
}

/// ∫_a^∞ f(x) dx.
///
/// Without a period hint the half line is cut into geometrically growing
/// segments; with a hint it is cut into half periods whose partial sums are
/// accelerated by iterated averaging. Returns `Error::Divergent` when the
/// segment contributions stop shrinking.
pub fn integrate_semi_infinite<F: Fn(f64) -> Complex64 + ?Sized>(
    f: &F,
    a: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadratureResult> {
    cfg.validate()?;
    if !a.is_finite() {
        return Err(Error::NonFinite("lower limit"));
    }
    match cfg.oscillation_period_hint {
        Some(period) => oscillatory_tail(f, a, 0.5 * period, cfg),
        None => geometric_tail(f, a, cfg),
    }
}

fn geometric_tail<F: Fn(f64) -> Complex64 + ?Sized>(
    f: &F,
    a: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadratureResult> {
    let mut out = QuadratureResult::zero();
    let mut len = a.abs().max(1.0);
    let mut lo = a;
    let mut quiet = 0;
    let mut magnitudes: Vec<f64> = Vec::new();
    let seg_cfg = cfg.with_period_hint(None);
    for _ in 0..MAX_GEOMETRIC_SEGMENTS {
        let hi = lo + len;
        let remaining = cfg.max_evaluations.saturating_sub(out.evaluations);
        if remaining < RULE_POINTS {
            out.converged = false;
            return Ok(out);
        }
        let seg_cfg = QuadratureConfig {
            max_evaluations: remaining,
            abs_tol: seg_cfg.abs_tol.max(0.1 * cfg.rel_tol * out.value.norm()),
            ..seg_cfg
        };
        let seg = integrate_finite(f, lo, hi, &seg_cfg);
        out.absorb(&seg);
        let m = seg.value.norm();
        magnitudes.push(m);
        if m <= 0.1 * cfg.target(out.value) {
            quiet += 1;
            if quiet >= 3 {
                return Ok(out);
            }
        } else {
            quiet = 0;
        }
        let n = magnitudes.len();
        if n >= 12 && (n - 8..n).all(|i| magnitudes[i] >= 0.95 * magnitudes[i - 1]) && m > 0.0 {
            return Err(Error::Divergent("half-line integral"));
        }
        lo = hi;
        len *= 2.0;
        if !lo.is_finite() {
            break;
        }
    }
    out.converged = false;
    Ok(out)
}

fn oscillatory_tail<F: Fn(f64) -> Complex64 + ?Sized>(
    f: &F,
    a: f64,
    half_period: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadratureResult> {
    let mut segments = QuadratureResult::zero();
    let mut partial: Vec<Complex64> = Vec::new();
    let mut running = Complex64::new(0.0, 0.0);
    let mut last_estimate: Option<Complex64> = None;
    let mut settled = 0;
    let mut quiet = 0;
    let mut previous_magnitude = f64::INFINITY;
    let mut growing = 0;
    let seg_cfg = cfg.with_period_hint(None);
    let mut error = 0.0;

    for n in 0..MAX_PERIOD_SEGMENTS {
        let lo = a + n as f64 * half_period;
        let hi = lo + half_period;
        let remaining = cfg.max_evaluations.saturating_sub(segments.evaluations);
        if remaining < RULE_POINTS {
            break;
        }
        let seg_cfg = QuadratureConfig {
            max_evaluations: remaining,
            abs_tol: seg_cfg.abs_tol.max(0.01 * cfg.rel_tol * running.norm()),
            ..seg_cfg
        };
        let seg = integrate_finite(f, lo, hi, &seg_cfg);
        segments.absorb(&seg);
        running += seg.value;
        partial.push(running);
        let m = seg.value.norm();
        if m > 0.0 && m >= previous_magnitude {
            growing += 1;
            if growing >= 50 {
                return Err(Error::Divergent("oscillatory half-line integral"));
            }
        } else {
            growing = 0;
        }
        let shrinking = m < previous_magnitude;
        previous_magnitude = m;

        // Plain convergence: the envelope has died out.
        if m <= 0.01 * cfg.target(running) {
            quiet += 1;
            if quiet >= 4 {
                return Ok(QuadratureResult {
                    value: running,
                    error_estimate: segments.error_estimate + 4.0 * m,
                    evaluations: segments.evaluations,
                    converged: segments.converged,
                });
            }
        } else {
            quiet = 0;
        }

        if partial.len() >= 4 {
            let estimate = iterated_mean(&partial);
            if let Some(prev) = last_estimate {
                error = (estimate - prev).norm();
                if shrinking && error <= 0.1 * cfg.target(estimate) {
                    settled += 1;
                    if settled >= 3 {
                        return Ok(QuadratureResult {
                            value: estimate,
                            error_estimate: segments.error_estimate + error,
                            evaluations: segments.evaluations,
                            converged: segments.converged,
                        });
                    }
                } else {
                    settled = 0;
                }
            }
            last_estimate = Some(estimate);
        }
    }
    let value = last_estimate.unwrap_or(running);
    Ok(QuadratureResult {
        value,
        error_estimate: segments.error_estimate + error.max(cfg.target(value)),
        evaluations: segments.evaluations,
        converged: false,
    })
}

/// Repeated pairwise averaging of the trailing partial sums.
fn iterated_mean(partial: &[Complex64]) -> Complex64 {
    let depth = partial.len().min(EULER_DEPTH);
    let mut row: Vec<Complex64> = partial[partial.len() - depth..].to_vec();
    while row.len() > 1 {
        for i in 0..row.len() - 1 {
            row[i] = 0.5 * (row[i] + row[i + 1]);
        }
        row.pop();
    }
    row[0]
}

/// A pure tone in a tail integrand: `weight · exp(−i τ x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tone {
    pub weight: Complex64,
    pub tau: f64,
}

/// ∫_a^∞ envelope(x) Σ_k w_k exp(−i τ_k x) dx, one half-line integral per tone,
/// each with the period hint its frequency implies.
pub fn integrate_tone_tail<F: Fn(f64) -> f64 + ?Sized>(
    envelope: &F,
    tones: &[Tone],
    a: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadratureResult> {
    let mut out = QuadratureResult::zero();
    for tone in tones {
        if tone.weight == Complex64::new(0.0, 0.0) {
            continue;
        }
        let tau = tone.tau;
        let w = tone.weight;
        let g = |x: f64| w * Complex64::new(0.0, -tau * x).exp() * envelope(x);
        let hint = if tau == 0.0 {
            None
        } else {
            Some(2.0 * core::f64::consts::PI / tau.abs())
        };
        let r = integrate_semi_infinite(&g, a, &cfg.with_period_hint(hint))?;
        out.absorb(&r);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// [a1, b1] × [a2, b2]; the outer variable is the first.
    Rectangle { a1: f64, b1: f64, a2: f64, b2: f64 },
    /// {a ≤ y ≤ x ≤ b}: outer x over [a, b], inner y over [a, x].
    Triangle { a: f64, b: f64 },
}

/// ∬ g(x, y) over a rectangle or triangle by iterated adaptive quadrature.
pub fn integrate_double<G: Fn(f64, f64) -> Complex64 + ?Sized>(
    g: &G,
    region: Region,
    cfg: &QuadratureConfig,
) -> QuadratureResult {
    let inner_cfg = cfg
        .with_rel_tol(0.01 * cfg.rel_tol)
        .with_abs_tol(0.01 * cfg.abs_tol);
    let evaluations = core::cell::Cell::new(0usize);
    let inner_ok = core::cell::Cell::new(true);
    let outer = |x: f64| {
        let (lo, hi) = match region {
            Region::Rectangle { a2, b2, .. } => (a2, b2),
            Region::Triangle { a, .. } => (a, x),
        };
        let r = integrate_finite(&|y: f64| g(x, y), lo, hi, &inner_cfg);
        evaluations.set(evaluations.get() + r.evaluations);
        if !r.converged {
            inner_ok.set(false);
        }
        r.value
    };
    let (lo, hi) = match region {
        Region::Rectangle { a1, b1, .. } => (a1, b1),
        Region::Triangle { a, b } => (a, b),
    };
    let mut r = integrate_finite(&outer, lo, hi, cfg);
    r.evaluations = evaluations.get();
    r.converged &= inner_ok.get();
    r
}
