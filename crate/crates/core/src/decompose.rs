//! Exponential-sum decompositions of α(t).
//!
//! The three Lorentzian families decompose exactly into one pole pair per
//! Lorentzian plus a series over the thermal poles of the Bose (or Fermi)
//! function. Those thermal poles come either from the [N−1/N] Padé
//! approximant or from the Matsubara series. The q = 1 power law with integer
//! s has a closed form through the polygamma function instead.
//!
//! Residues follow the normalization α(t) = (1/π)∫₀^∞ J(ω)[coth(βω/2)cos ωt − i sin ωt] dω.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::Float;

use crate::bath::{self, AlphaRoute};
use crate::model::{ExpTerm, ExponentialBath, LorentzTerm, PhysicalContext, SpectralDensity};
use crate::quadrature::QuadratureConfig;
use crate::special::{factorial, polygamma};
use crate::tridiag::symmetric_tridiagonal_eigenvalues;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistics {
    Bose,
    Fermi,
}

/// Poles ξ_n and weights Ξ_n of the [N−1/N] Padé approximant, in units of βħω.
#[derive(Debug, Clone, PartialEq)]
pub struct PadeParameters {
    pub statistics: Statistics,
    pub order: usize,
    /// ξ_n, ascending.
    pub xi: Vec<f64>,
    /// Ξ_n, paired with `xi`.
    pub weights: Vec<f64>,
    /// ζ_m (N − 1 of them), ascending.
    pub zeta: Vec<f64>,
}

/// Positive reciprocals of the positive eigenvalues of a zero-diagonal
/// tridiagonal matrix, ascending.
fn reciprocal_positive_eigenvalues(off: &[f64], count: usize) -> Result<Vec<f64>> {
    let n = off.len() + 1;
    let ev = symmetric_tridiagonal_eigenvalues(&alloc::vec![0.0; n], off)?;
    // ascending eigenvalues: the largest `count` are the positive ones
    let mut out: Vec<f64> = ev[n - count..].iter().map(|&e| 1.0 / e).collect();
    if out.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::EigenSolve);
    }
    out.sort_by(|a, b| a.total_cmp(b));
    Ok(out)
}

pub fn pade_parameters(statistics: Statistics, order: usize) -> Result<PadeParameters> {
    if order == 0 {
        return Err(Error::invalid("Pade order must be >= 1"));
    }
    let n = order;
    // Off-diagonal b_c couples rows c and c+1 (1-based): 1/(2√((2c+k)(2c+2+k)))
    let off = |dim: usize, k: f64| -> Vec<f64> {
        (1..dim)
            .map(|c| {
                let c = c as f64;
                0.5 / ((2.0 * c + k) * (2.0 * c + 2.0 + k)).sqrt()
            })
            .collect()
    };
    let (k_main, k_aux, lead) = match statistics {
        Statistics::Bose => (1.0, 3.0, (n * n) as f64 + 1.5 * n as f64),
        Statistics::Fermi => (-1.0, 1.0, (n * n) as f64 + 0.5 * n as f64),
    };
    let xi = reciprocal_positive_eigenvalues(&off(2 * n, k_main), n)?;
    let zeta = if n > 1 {
        reciprocal_positive_eigenvalues(&off(2 * n - 1, k_aux), n - 1)?
    } else {
        Vec::new()
    };

    let mut weights = Vec::with_capacity(n);
    for (i, &x) in xi.iter().enumerate() {
        let x2 = x * x;
        let mut log = lead.ln();
        let mut sign = 1.0;
        for &z in &zeta {
            let d = z * z - x2;
            log += d.abs().ln();
            sign *= d.signum();
        }
        for (m, &y) in xi.iter().enumerate() {
            if m != i {
                let d = y * y - x2;
                log -= d.abs().ln();
                sign *= d.signum();
            }
        }
        let w = sign * log.exp();
        if !w.is_finite() {
            return Err(Error::EigenSolve);
        }
        weights.push(w);
    }
    Ok(PadeParameters {
        statistics,
        order: n,
        xi,
        weights,
        zeta,
    })
}

impl PadeParameters {
    /// The approximant: 1/(1 − e^{−x}) for Bose, 1/(1 + e^{x}) for Fermi.
    pub fn approximate(&self, x: f64) -> f64 {
        let s: f64 = self
            .xi
            .iter()
            .zip(&self.weights)
            .map(|(&xi, &w)| 2.0 * w * x / (x * x + xi * xi))
            .sum();
        match self.statistics {
            Statistics::Bose => 1.0 / x + 0.5 + s,
            Statistics::Fermi => 0.5 - s,
        }
    }
}

/// Thermal pole expansion: rates ν_n (ps⁻¹) and weights Ξ_n.
#[derive(Debug, Clone, PartialEq)]
struct ThermalPoles {
    nu: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoleScheme {
    Pade,
    Matsubara,
}

fn thermal_poles(
    scheme: PoleScheme,
    statistics: Statistics,
    order: usize,
    beta: f64,
) -> Result<ThermalPoles> {
    if order == 0 {
        return Ok(ThermalPoles {
            nu: Vec::new(),
            weights: Vec::new(),
        });
    }
    match scheme {
        PoleScheme::Pade => {
            let p = pade_parameters(statistics, order)?;
            Ok(ThermalPoles {
                nu: p.xi.iter().map(|x| x / beta).collect(),
                weights: p.weights,
            })
        }
        PoleScheme::Matsubara => {
            let offset = match statistics {
                Statistics::Bose => 0.0,
                Statistics::Fermi => 0.5,
            };
            Ok(ThermalPoles {
                nu: (1..=order)
                    .map(|n| 2.0 * PI * (n as f64 - offset) / beta)
                    .collect(),
                weights: alloc::vec![1.0; order],
            })
        }
    }
}

/// The two rates −γ ± iω̃ of one Lorentzian, upper branch first.
fn pole_pair(t: &LorentzTerm) -> [Complex64; 2] {
    [
        Complex64::new(-t.gamma, t.omega_tilde),
        Complex64::new(-t.gamma, -t.omega_tilde),
    ]
}

fn check_collisions(terms: &[LorentzTerm], nu: &[f64]) -> Result<()> {
    for (j, t) in terms.iter().enumerate() {
        for omega in pole_pair(t) {
            let o2 = omega * omega;
            for (n, &v) in nu.iter().enumerate() {
                let v2 = v * v;
                if (v2 - o2).norm() < 1e-12 * v2.max(o2.norm()) {
                    return Err(Error::PoleCollision {
                        omega_index: j,
                        pole_index: n + 1,
                    });
                }
            }
        }
    }
    Ok(())
}

fn lorentz_terms<'a>(spec: &'a SpectralDensity, want: &'static str) -> Result<&'a [LorentzTerm]> {
    spec.validate()?;
    let ok = matches!(
        (spec, want),
        (SpectralDensity::MultiLorentzDrude(_), "multi_lorentz_drude")
            | (SpectralDensity::TanhLorentzDrude(_), "tanh_lorentz_drude")
            | (SpectralDensity::MeierTannor(_), "meier_tannor")
    );
    if !ok {
        return Err(Error::invalid(alloc::format!(
            "expected a {want} spectral density, got {}",
            spec.family_name()
        )));
    }
    Ok(spec.lorentz_terms().unwrap_or(&[]))
}

/// Exponential bath of a multi-Lorentz-Drude density: 2J pole terms, then N
/// thermal terms.
pub fn multi_lorentz_drude_bath(
    spec: &SpectralDensity,
    context: &PhysicalContext,
    order: usize,
    scheme: PoleScheme,
) -> Result<ExponentialBath> {
    let terms = lorentz_terms(spec, "multi_lorentz_drude")?;
    let beta = context.finite_beta("multi-Lorentz-Drude decomposition")?;
    let poles = thermal_poles(scheme, Statistics::Bose, order, beta)?;
    check_collisions(terms, &poles.nu)?;

    let mut out = Vec::with_capacity(2 * terms.len() + order);
    for t in terms {
        for omega in pole_pair(t) {
            let o2 = omega * omega;
            let corr: Complex64 = poles
                .nu
                .iter()
                .zip(&poles.weights)
                .map(|(&v, &w)| 2.0 * w * o2 / (v * v - o2))
                .sum();
            let p =
                ((1.0 - corr) * (t.lambda / beta) + Complex64::i() * omega * (0.5 * t.lambda)) / PI;
            out.push(ExpTerm::new(p, omega));
        }
    }
    for (&v, &w) in poles.nu.iter().zip(&poles.weights) {
        let s: f64 = terms
            .iter()
            .map(|t| {
                let omega = Complex64::new(-t.gamma, t.omega_tilde);
                let d = v * v - omega * omega;
                t.lambda * t.gamma * (omega.norm_sqr() - v * v) / d.norm_sqr()
            })
            .sum();
        let p = -4.0 * w * v / (PI * beta) * s;
        out.push(ExpTerm::new(
            Complex64::new(p, 0.0),
            Complex64::new(-v, 0.0),
        ));
    }
    ExponentialBath::new(out)
}

/// Exponential bath of a tanh-Lorentz-Drude density; the thermal poles are
/// those of the Fermi function.
pub fn tanh_lorentz_drude_bath(
    spec: &SpectralDensity,
    context: &PhysicalContext,
    order: usize,
    scheme: PoleScheme,
) -> Result<ExponentialBath> {
    let terms = lorentz_terms(spec, "tanh_lorentz_drude")?;
    let beta = context.finite_beta("tanh-Lorentz-Drude decomposition")?;
    let poles = thermal_poles(scheme, Statistics::Fermi, order, beta)?;
    check_collisions(terms, &poles.nu)?;

    let mut out = Vec::with_capacity(2 * terms.len() + order);
    for t in terms {
        for omega in pole_pair(t) {
            let o2 = omega * omega;
            let s: Complex64 = poles
                .nu
                .iter()
                .zip(&poles.weights)
                .map(|(&v, &w)| w * omega / (v * v - o2))
                .sum();
            let p = (Complex64::new(0.5 * t.lambda, 0.0)
                + Complex64::i() * s * (2.0 * t.lambda / beta))
                / PI;
            out.push(ExpTerm::new(p, omega));
        }
    }
    for (&v, &w) in poles.nu.iter().zip(&poles.weights) {
        let s: f64 = terms
            .iter()
            .map(|t| {
                let omega = Complex64::new(-t.gamma, t.omega_tilde);
                let d = v * v - omega * omega;
                t.lambda * t.gamma * (omega.norm_sqr() - v * v) / d.norm_sqr()
            })
            .sum();
        let p = Complex64::new(0.0, -4.0 * w / (PI * beta) * s);
        out.push(ExpTerm::new(p, Complex64::new(-v, 0.0)));
    }
    ExponentialBath::new(out)
}

/// coth(z) for Re z > 0.
fn coth(z: Complex64) -> Complex64 {
    let e = (-2.0 * z).exp();
    (1.0 + e) / (1.0 - e)
}

/// Exponential bath of a Meier-Tannor density with N Matsubara terms.
pub fn meier_tannor_bath(
    spec: &SpectralDensity,
    context: &PhysicalContext,
    order: usize,
) -> Result<ExponentialBath> {
    let terms = lorentz_terms(spec, "meier_tannor")?;
    let beta = context.finite_beta("Meier-Tannor decomposition")?;
    if let Some(j) = terms.iter().position(|t| t.omega_tilde == 0.0) {
        return Err(Error::invalid(alloc::format!(
            "Meier-Tannor term {j} has omega_tilde = 0; its residue is singular"
        )));
    }
    let poles = thermal_poles(PoleScheme::Matsubara, Statistics::Bose, order, beta)?;
    check_collisions(terms, &poles.nu)?;

    let mut out = Vec::with_capacity(2 * terms.len() + order);
    for t in terms {
        let scale = PI * t.lambda / (16.0 * t.gamma * t.omega_tilde);
        let upper = coth(Complex64::new(t.omega_tilde, t.gamma) * (0.5 * beta)) - 1.0;
        let lower = coth(Complex64::new(t.omega_tilde, -t.gamma) * (0.5 * beta)) + 1.0;
        let [o_up, o_down] = pole_pair(t);
        out.push(ExpTerm::new(upper * scale, o_up));
        out.push(ExpTerm::new(lower * scale, o_down));
    }
    for &v in &poles.nu {
        let iv = Complex64::new(0.0, v);
        let s: Complex64 = terms
            .iter()
            .map(|t| {
                let g2 = t.gamma * t.gamma;
                let a = (t.omega_tilde - iv) * (t.omega_tilde - iv) + g2;
                let b = (t.omega_tilde + iv) * (t.omega_tilde + iv) + g2;
                t.lambda / (a * b)
            })
            .sum();
        out.push(ExpTerm::new(-s * (PI * v / beta), Complex64::new(-v, 0.0)));
    }
    ExponentialBath::new(out)
}

/// Closed-form α(t) for J = A ω^s e^{−ω/ω_c} with integer s ≥ 1:
///
/// α(t) = (A/π)[−s! ω_c^{s+1}/(1 − iω_c t)^{s+1} + 2(−1)^{s+1} Re ψ_s(w)/β^{s+1}],
/// w = (1 + iω_c t)/(βω_c).
pub fn alpha_power_law(
    amplitude: f64,
    s: u32,
    cutoff: f64,
    context: &PhysicalContext,
    t: f64,
) -> Result<Complex64> {
    if !(t.is_finite() && amplitude.is_finite() && cutoff.is_finite()) {
        return Err(Error::NonFinite("power-law parameters"));
    }
    if t < 0.0 {
        return Err(Error::invalid("t must be >= 0"));
    }
    if s == 0 || cutoff <= 0.0 || amplitude < 0.0 {
        return Err(Error::invalid("need s >= 1, omega_c > 0, A >= 0"));
    }
    let beta = context.finite_beta("power-law closed form")?;
    if amplitude == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let m = s as i32 + 1;
    let zero_t = -factorial(s) * cutoff.powi(m) * Complex64::new(1.0, -cutoff * t).powi(-m);
    let w = Complex64::new(1.0, cutoff * t) / (beta * cutoff);
    let sign = if s % 2 == 1 { 1.0 } else { -1.0 };
    let thermal = 2.0 * sign * polygamma(s, w)?.re / beta.powi(m);
    Ok((zero_t + thermal) * (amplitude / PI))
}

/// α(t) for a power-law spectral density, if it is in the closed-form class
/// (q = 1 and integer s).
pub fn alpha_power_law_spec(
    spec: &SpectralDensity,
    context: &PhysicalContext,
    t: f64,
) -> Result<Complex64> {
    match spec {
        SpectralDensity::PowerLawExpCutoff(p) => {
            let s = integer_exponent(p.exponent)
                .ok_or(Error::Unsupported("closed-form alpha for non-integer s"))?;
            if p.cutoff_exponent != 1.0 {
                return Err(Error::Unsupported("closed-form alpha for q != 1"));
            }
            alpha_power_law(p.amplitude, s, p.cutoff, context, t)
        }
        _ => Err(Error::invalid("expected a power_exp spectral density")),
    }
}

fn integer_exponent(s: f64) -> Option<u32> {
    if (1.0..=64.0).contains(&s) && s.fract() == 0.0 {
        Some(s as u32)
    } else {
        None
    }
}

/// True when `alpha_power_law_spec` can evaluate this density.
pub fn has_power_law_closed_form(spec: &SpectralDensity) -> bool {
    matches!(spec, SpectralDensity::PowerLawExpCutoff(p) if p.cutoff_exponent == 1.0 && integer_exponent(p.exponent).is_some())
}

/// Options shared by the report-producing decompositions.
#[derive(Debug, Clone, PartialEq)]
pub struct DecomposeOptions {
    /// Reference times for the reported α error. `None` picks 50 points on
    /// (0, 5/γ_min].
    pub grid: Option<Vec<f64>>,
    pub quad: QuadratureConfig,
    pub scheme: PoleScheme,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self {
            grid: None,
            quad: QuadratureConfig::default(),
            scheme: PoleScheme::Pade,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub bath: ExponentialBath,
    pub order: usize,
    /// RMS relative error of the exponential sum against quadrature of α.
    pub alpha_rms_error: f64,
    pub grid: Vec<f64>,
}

/// Default reference grid: 50 points on (0, 5/γ_min]. t = 0 is excluded
/// because α(0) diverges for densities with a 1/ω tail.
pub fn default_reference_grid(spec: &SpectralDensity) -> Vec<f64> {
    let gamma_min = spec
        .lorentz_terms()
        .unwrap_or(&[])
        .iter()
        .fold(f64::INFINITY, |m, t| m.min(t.gamma));
    let t_max = if gamma_min.is_finite() {
        5.0 / gamma_min
    } else {
        5.0 / spec.frequency_scale()
    };
    (1..=50).map(|i| t_max * i as f64 / 50.0).collect()
}

/// The family-appropriate exponential bath at a fixed order.
pub fn decompose_bath(
    spec: &SpectralDensity,
    context: &PhysicalContext,
    order: usize,
    scheme: PoleScheme,
) -> Result<ExponentialBath> {
    match spec {
        SpectralDensity::MultiLorentzDrude(_) => {
            multi_lorentz_drude_bath(spec, context, order, scheme)
        }
        SpectralDensity::TanhLorentzDrude(_) => {
            tanh_lorentz_drude_bath(spec, context, order, scheme)
        }
        SpectralDensity::MeierTannor(_) => meier_tannor_bath(spec, context, order),
        SpectralDensity::PowerLawExpCutoff(_) => {
            Err(Error::Unsupported("exponential decomposition of power_exp"))
        }
    }
}

fn report(
    spec: &SpectralDensity,
    context: &PhysicalContext,
    bath: ExponentialBath,
    order: usize,
    opts: &DecomposeOptions,
) -> Result<DecompositionReport> {
    let grid = opts
        .grid
        .clone()
        .unwrap_or_else(|| default_reference_grid(spec));
    let analytic = bath::alpha_exponential_grid(&bath, &grid)?;
    let reference =
        bath::alpha_quadrature_grid(spec, context, &grid, AlphaRoute::HalfLine, &opts.quad)?;
    let cmp = bath::compare_alpha(&analytic, &reference)?;
    Ok(DecompositionReport {
        bath,
        order,
        alpha_rms_error: cmp.rms_rel,
        grid,
    })
}

pub fn decompose_multi_lorentz_drude(
    spec: &SpectralDensity,
    context: &PhysicalContext,
    order: usize,
    opts: &DecomposeOptions,
) -> Result<DecompositionReport> {
    let bath = multi_lorentz_drude_bath(spec, context, order, opts.scheme)?;
    report(spec, context, bath, order, opts)
}

pub fn decompose_tanh_lorentz_drude(
    spec: &SpectralDensity,
    context: &PhysicalContext,
    order: usize,
    opts: &DecomposeOptions,
) -> Result<DecompositionReport> {
    let bath = tanh_lorentz_drude_bath(spec, context, order, opts.scheme)?;
    report(spec, context, bath, order, opts)
}

pub fn decompose_meier_tannor(
    spec: &SpectralDensity,
    context: &PhysicalContext,
    order: usize,
    opts: &DecomposeOptions,
) -> Result<DecompositionReport> {
    let bath = meier_tannor_bath(spec, context, order)?;
    report(spec, context, bath, order, opts)
}

/// Decomposition with a report at a fixed order, dispatching on the family.
pub fn decompose(
    spec: &SpectralDensity,
    context: &PhysicalContext,
    order: usize,
    opts: &DecomposeOptions,
) -> Result<DecompositionReport> {
    let bath = decompose_bath(spec, context, order, opts.scheme)?;
    report(spec, context, bath, order, opts)
}

/// Largest order tried by [`decompose_auto`].
pub const MAX_AUTO_ORDER: usize = 128;

/// Doubles the order from 2 until the α grid changes by less than 10⁻⁸ (RMS,
/// relative) between successive orders, or the order reaches 128.
pub fn decompose_auto(
    spec: &SpectralDensity,
    context: &PhysicalContext,
    opts: &DecomposeOptions,
) -> Result<DecompositionReport> {
    let grid = opts
        .grid
        .clone()
        .unwrap_or_else(|| default_reference_grid(spec));
    let mut order = 2;
    let mut prev =
        bath::alpha_exponential_grid(&decompose_bath(spec, context, order, opts.scheme)?, &grid)?;
    while order < MAX_AUTO_ORDER {
        let next_order = (order * 2).min(MAX_AUTO_ORDER);
        let bath = decompose_bath(spec, context, next_order, opts.scheme)?;
        let next = bath::alpha_exponential_grid(&bath, &grid)?;
        let change = bath::compare_alpha(&prev, &next)?.rms_rel;
        order = next_order;
        prev = next;
        if change < 1e-8 {
            break;
        }
    }
    let bath = decompose_bath(spec, context, order, opts.scheme)?;
    let opts = DecomposeOptions {
        grid: Some(grid),
        ..opts.clone()
    };
    report(spec, context, bath, order, &opts)
}
