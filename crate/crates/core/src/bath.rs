//! Bath response α(t): exponential sums, frequency-domain quadrature, the
//! inverse map back to J(ω), and grid comparison metrics.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::Float;

use crate::model::{ExponentialBath, PhysicalContext, SpectralDensity};
use crate::quadrature::{self, QuadratureConfig, QuadratureResult, Tone};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Analytic,
    Quadrature,
    Fitted,
}

/// Samples of α on strictly ascending non-negative times.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaGrid {
    times: Vec<f64>,
    values: Vec<Complex64>,
    provenance: Provenance,
}

impl AlphaGrid {
    pub fn new(times: Vec<f64>, values: Vec<Complex64>, provenance: Provenance) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: times.len(),
                got: values.len(),
            });
        }
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::invalid("grid times must be finite and >= 0"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("grid times must be strictly ascending"));
        }
        if values
            .iter()
            .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::NonFinite("alpha value"));
        }
        Ok(Self {
            times,
            values,
            provenance,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

/// `n` equally spaced times covering [t0, t1] inclusive.
pub fn uniform_times(t0: f64, t1: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::invalid("uniform grid needs n >= 2 and t1 > t0"));
    }
    let h = (t1 - t0) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| if i + 1 == n { t1 } else { t0 + h * i as f64 })
        .collect())
}

/// Σ_j p_j exp(Ω_j t), accumulated in descending |p_j| with compensation.
pub fn alpha_exponential(bath: &ExponentialBath, t: f64) -> Result<Complex64> {
    if !t.is_finite() {
        return Err(Error::NonFinite("t"));
    }
    if t < 0.0 {
        return Err(Error::invalid(
            "the exponential form is defined for t >= 0 only",
        ));
    }
    let mut order: Vec<usize> = (0..bath.len()).collect();
    let terms = bath.terms();
    order.sort_by(|&a, &b| terms[b].p.norm().total_cmp(&terms[a].p.norm()));
    Ok(compensated_sum(
        order
            .iter()
            .map(|&j| terms[j].p * (terms[j].omega * t).exp()),
    ))
}

/// Neumaier summation, componentwise.
pub(crate) fn compensated_sum(items: impl Iterator<Item = Complex64>) -> Complex64 {
    let (mut sr, mut cr, mut si, mut ci) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for z in items {
        let t = sr + z.re;
        cr += if sr.abs() >= z.re.abs() {
            (sr - t) + z.re
        } else {
            (z.re - t) + sr
        };
        sr = t;
        let t = si + z.im;
        ci += if si.abs() >= z.im.abs() {
            (si - t) + z.im
        } else {
            (z.im - t) + si
        };
        si = t;
    }
    Complex64::new(sr + cr, si + ci)
}

pub fn alpha_exponential_grid(bath: &ExponentialBath, times: &[f64]) -> Result<AlphaGrid> {
    let values = times
        .iter()
        .map(|&t| alpha_exponential(bath, t))
        .collect::<Result<Vec<_>>>()?;
    AlphaGrid::new(times.to_vec(), values, Provenance::Analytic)
}

/// Which frequency-domain representation of α(t) to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaRoute {
    /// (1/π) ∫₀^∞ J(ω) [coth(βω/2) cos ωt − i sin ωt] dω
    HalfLine,
    /// (1/2π) ∫ J(ω) e^{βω/2}/sinh(βω/2) e^{−iωt} dω over the full line
    FullLineHyperbolic,
    /// (1/2π) ∫ J(ω) 2/(1 − e^{−βω}) e^{−iωt} dω over the full line
    FullLineBose,
}

/// α(t) by adaptive quadrature of the chosen representation; any real t.
pub fn alpha_quadrature(
    spec: &SpectralDensity,
    context: &PhysicalContext,
    t: f64,
    route: AlphaRoute,
    quad: &QuadratureConfig,
) -> Result<Complex64> {
    spec.validate()?;
    if !t.is_finite() {
        return Err(Error::NonFinite("t"));
    }
    let beta = context.beta_hbar();
    let w = spec.tail_start();
    let finite_cfg = quad.with_period_hint(None);
    let cis = |x: f64| Complex64::new(0.0, -x).exp();

    let mut total = QuadratureResult {
        value: Complex64::new(0.0, 0.0),
        error_estimate: 0.0,
        evaluations: 0,
        converged: true,
    };
    let add = |total: &mut QuadratureResult, r: QuadratureResult| {
        total.value += r.value;
        total.error_estimate += r.error_estimate;
        total.evaluations += r.evaluations;
        total.converged &= r.converged;
    };

    match route {
        AlphaRoute::HalfLine => {
            let f = |x: f64| {
                let j = spec.density(x, beta);
                let (s, c) = (x * t).sin_cos();
                Complex64::new(j * context.coth_half(x) * c, -j * s) / PI
            };
            add(
                &mut total,
                quadrature::integrate_finite(&f, 0.0, w, &finite_cfg),
            );
            // J[coth cos ωt − i sin ωt] = J/2 [(coth − 1) e^{iωt} + (coth + 1) e^{−iωt}]
            let tail_cfg = tail_config(quad, total.value);
            let up = |x: f64| 0.5 * spec.density(x, beta) * (context.coth_half(x) + 1.0) / PI;
            let down = |x: f64| 0.5 * spec.density(x, beta) * (context.coth_half(x) - 1.0) / PI;
            add(&mut total, tone_tail(&up, t, w, &tail_cfg)?);
            add(&mut total, tone_tail(&down, -t, w, &tail_cfg)?);
        }
        AlphaRoute::FullLineHyperbolic | AlphaRoute::FullLineBose => {
            let weight = |x: f64| match route {
                AlphaRoute::FullLineHyperbolic => context.bose_weight_hyperbolic(x),
                _ => context.bose_weight(x),
            };
            let f = |x: f64| cis(x * t) * (spec.density(x, beta) * weight(x) / (2.0 * PI));
            add(
                &mut total,
                quadrature::integrate_finite(&f, -w, 0.0, &finite_cfg),
            );
            add(
                &mut total,
                quadrature::integrate_finite(&f, 0.0, w, &finite_cfg),
            );
            let tail_cfg = tail_config(quad, total.value);
            let pos = |x: f64| spec.density(x, beta) * weight(x) / (2.0 * PI);
            let neg = |x: f64| spec.density(-x, beta) * weight(-x) / (2.0 * PI);
            add(&mut total, tone_tail(&pos, t, w, &tail_cfg)?);
            add(&mut total, tone_tail(&neg, -t, w, &tail_cfg)?);
        }
    }
    if !total.converged {
        return Err(Error::QuadratureFailed {
            what: "alpha(t)",
            value: total.value.norm(),
            error: total.error_estimate,
        });
    }
    Ok(total.value)
}

fn tail_config(quad: &QuadratureConfig, head: Complex64) -> QuadratureConfig {
    quad.with_abs_tol(quad.abs_tol.max(0.1 * quad.rel_tol * head.norm()))
}

fn tone_tail<F: Fn(f64) -> f64>(
    envelope: &F,
    tau: f64,
    a: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadratureResult> {
    let tones = [Tone {
        weight: Complex64::new(1.0, 0.0),
        tau,
    }];
    quadrature::integrate_tone_tail(envelope, &tones, a, cfg).map_err(|e| match e {
        Error::Divergent(_) => Error::Divergent("alpha(t) frequency integral"),
        other => other,
    })
}

pub fn alpha_quadrature_grid(
    spec: &SpectralDensity,
    context: &PhysicalContext,
    times: &[f64],
    route: AlphaRoute,
    quad: &QuadratureConfig,
) -> Result<AlphaGrid> {
    let values = times
        .iter()
        .map(|&t| alpha_quadrature(spec, context, t, route, quad))
        .collect::<Result<Vec<_>>>()?;
    AlphaGrid::new(times.to_vec(), values, Provenance::Quadrature)
}

/// J(ω) = Re[(1 − e^{−βω}) Σ_j i p_j/(ω − iΩ_j)].
pub fn reconstruct_spectral_density(
    bath: &ExponentialBath,
    context: &PhysicalContext,
    omega: f64,
) -> Result<f64> {
    let beta = context.finite_beta("spectral reconstruction")?;
    if !omega.is_finite() {
        return Err(Error::NonFinite("omega"));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for term in bath.terms() {
        let den = Complex64::new(omega, 0.0) - Complex64::i() * term.omega;
        if den.norm() == 0.0 {
            return Err(Error::PoleHit);
        }
        sum += Complex64::i() * term.p / den;
    }
    let factor = -(-beta * omega).exp_m1();
    Ok(factor * sum.re)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaComparison {
    pub rms_rel: f64,
    pub max_rel: f64,
    pub max_abs: f64,
}

/// Error of `a` against the reference `b`; relative errors are taken against
/// max(|b_i|, 10⁻³ max|b|).
pub fn compare_alpha(a: &AlphaGrid, b: &AlphaGrid) -> Result<AlphaComparison> {
    if a.times != b.times {
        return Err(Error::invalid("alpha grids must share their time points"));
    }
    let floor = 1e-3 * b.max_abs();
    let mut sq = 0.0;
    let mut max_rel = 0.0_f64;
    let mut max_abs = 0.0_f64;
    for (x, y) in a.values.iter().zip(&b.values) {
        let d = (x - y).norm();
        let den = y.norm().max(floor);
        let rel = if den > 0.0 {
            d / den
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        sq += rel * rel;
        max_rel = max_rel.max(rel);
        max_abs = max_abs.max(d);
    }
    let n = a.len().max(1) as f64;
    Ok(AlphaComparison {
        rms_rel: (sq / n).sqrt(),
        max_rel,
        max_abs,
    })
}
