//! Physical data model: thermal context, spectral densities, exponential baths
//! and discretized paths.
//!
//! All four spectral-density families are odd in ω. The three Lorentzian
//! families are odd by construction; the power-law family is extended oddly to
//! negative frequencies. Every full-line frequency integral in this crate
//! relies on that parity.

use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;

use crate::quadrature::{self, QuadratureConfig};
use crate::{Error, Result};

/// ħ/k_B in K·ps; βħ = `HBAR_OVER_KB` / T.
pub const HBAR_OVER_KB: f64 = 7.63824;

/// Below this |βω/2| the thermal factors switch to their Taylor series.
const THERMAL_SERIES_THRESHOLD: f64 = 1e-4;

/// Inverse temperature βħ (ps), or the zero-temperature limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalContext {
    beta_hbar: Option<f64>,
}

impl PhysicalContext {
    pub fn new(beta_hbar: f64) -> Result<Self> {
        if !beta_hbar.is_finite() || beta_hbar <= 0.0 {
            return Err(Error::invalid("beta_hbar must be finite and > 0"));
        }
        Ok(Self {
            beta_hbar: Some(beta_hbar),
        })
    }

    /// βħ = 7.63824 K·ps / T.
    pub fn from_kelvin(temperature: f64) -> Result<Self> {
        if !temperature.is_finite() || temperature <= 0.0 {
            return Err(Error::invalid("temperature must be finite and > 0 K"));
        }
        Self::new(HBAR_OVER_KB / temperature)
    }

    /// T → 0. Only quadrature routes accept this context; coth(βω/2) becomes sign(ω).
    pub fn zero_temperature() -> Self {
        Self { beta_hbar: None }
    }

    pub fn beta_hbar(&self) -> Option<f64> {
        self.beta_hbar
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.beta_hbar.is_none()
    }

    pub(crate) fn finite_beta(&self, what: &'static str) -> Result<f64> {
        self.beta_hbar.ok_or(Error::FiniteTemperatureRequired(what))
    }

    /// coth(βħω/2).
    pub fn coth_half(&self, omega: f64) -> f64 {
        match self.beta_hbar {
            None => signum0(omega),
            Some(beta) => coth_series_guarded(0.5 * beta * omega),
        }
    }

    /// 2/(1 − e^{−βħω}) = 1 + coth(βħω/2), computed without cancellation for ω < 0.
    pub fn bose_weight(&self, omega: f64) -> f64 {
        match self.beta_hbar {
            None => 1.0 + signum0(omega),
            Some(beta) => {
                let x = beta * omega;
                if x.abs() < 2.0 * THERMAL_SERIES_THRESHOLD {
                    1.0 + coth_series_guarded(0.5 * x)
                } else {
                    -2.0 / (-x).exp_m1()
                }
            }
        }
    }

    /// e^{βħω/2}/sinh(βħω/2), the same quantity as [`Self::bose_weight`] in its
    /// hyperbolic form.
    pub fn bose_weight_hyperbolic(&self, omega: f64) -> f64 {
        match self.beta_hbar {
            None => 1.0 + signum0(omega),
            Some(beta) => {
                let y = 0.5 * beta * omega;
                if y.abs() < THERMAL_SERIES_THRESHOLD {
                    1.0 + coth_series_guarded(y)
                } else if y > 350.0 {
                    2.0 / (1.0 - (-2.0 * y).exp())
                } else if y < -350.0 {
                    -2.0 * (2.0 * y).exp()
                } else {
                    y.exp() / y.sinh()
                }
            }
        }
    }
}

fn signum0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// coth(y) with the 4-term Laurent series near the origin.
fn coth_series_guarded(y: f64) -> f64 {
    if y.abs() < THERMAL_SERIES_THRESHOLD {
        let y2 = y * y;
        1.0 / y + y * (1.0 / 3.0 - y2 * (1.0 / 45.0 - y2 * (2.0 / 945.0)))
    } else {
        1.0 / y.tanh()
    }
}

/// One Lorentzian contribution (λ_j, γ_j, ω̃_j) of the first three families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzTerm {
    pub lambda: f64,
    pub gamma: f64,
    pub omega_tilde: f64,
}

impl LorentzTerm {
    pub fn new(lambda: f64, gamma: f64, omega_tilde: f64) -> Self {
        Self {
            lambda,
            gamma,
            omega_tilde,
        }
    }

    /// γ/(γ² + (ω − ω̃)²) + γ/(γ² + (ω + ω̃)²)
    fn mirrored_lorentzians(&self, omega: f64) -> f64 {
        let g2 = self.gamma * self.gamma;
        let dm = omega - self.omega_tilde;
        let dp = omega + self.omega_tilde;
        self.gamma / (g2 + dm * dm) + self.gamma / (g2 + dp * dp)
    }
}

/// J(ω) = A ω^s exp(−(ω/ω_c)^q)
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub amplitude: f64,
    pub exponent: f64,
    pub cutoff: f64,
    pub cutoff_exponent: f64,
}

/// The four spectral-density families with analytic bath-response data.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralDensity {
    /// J(ω) = (ω/π) Σ_j λ_j [γ_j/(γ_j² + (ω−ω̃_j)²) + γ_j/(γ_j² + (ω+ω̃_j)²)]
    MultiLorentzDrude(Vec<LorentzTerm>),
    /// Same Lorentzian sum with the ω prefactor replaced by tanh(βħω/2).
    TanhLorentzDrude(Vec<LorentzTerm>),
    /// J(ω) = (πω/2) Σ_j λ_j / [(γ_j² + (ω+ω̃_j)²)(γ_j² + (ω−ω̃_j)²)]
    MeierTannor(Vec<LorentzTerm>),
    PowerLawExpCutoff(PowerLaw),
}

impl SpectralDensity {
    pub fn multi_lorentz_drude(terms: Vec<LorentzTerm>) -> Result<Self> {
        let spec = Self::MultiLorentzDrude(terms);
        spec.validate()?;
        Ok(spec)
    }

    pub fn tanh_lorentz_drude(terms: Vec<LorentzTerm>) -> Result<Self> {
        let spec = Self::TanhLorentzDrude(terms);
        spec.validate()?;
        Ok(spec)
    }

    pub fn meier_tannor(terms: Vec<LorentzTerm>) -> Result<Self> {
        let spec = Self::MeierTannor(terms);
        spec.validate()?;
        Ok(spec)
    }

    pub fn power_law(
        amplitude: f64,
        exponent: f64,
        cutoff: f64,
        cutoff_exponent: f64,
    ) -> Result<Self> {
        let spec = Self::PowerLawExpCutoff(PowerLaw {
            amplitude,
            exponent,
            cutoff,
            cutoff_exponent,
        });
        spec.validate()?;
        Ok(spec)
    }

    /// The Lorentz-Drude (Debye) density J(ω) = (ω/π) λγ/(γ² + ω²).
    ///
    /// With ω̃ = 0 the two mirrored Lorentzians of the multi-Lorentz-Drude
    /// family coincide, so the stored coupling is λ/2.
    pub fn debye(lambda: f64, gamma: f64) -> Result<Self> {
        Self::multi_lorentz_drude(alloc::vec![LorentzTerm::new(0.5 * lambda, gamma, 0.0)])
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::MultiLorentzDrude(_) => "multi_lorentz_drude",
            Self::TanhLorentzDrude(_) => "tanh_lorentz_drude",
            Self::MeierTannor(_) => "meier_tannor",
            Self::PowerLawExpCutoff(_) => "power_exp",
        }
    }

    pub fn lorentz_terms(&self) -> Option<&[LorentzTerm]> {
        match self {
            Self::MultiLorentzDrude(t) | Self::TanhLorentzDrude(t) | Self::MeierTannor(t) => {
                Some(t)
            }
            Self::PowerLawExpCutoff(_) => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::MultiLorentzDrude(terms)
            | Self::TanhLorentzDrude(terms)
            | Self::MeierTannor(terms) => {
                if terms.is_empty() {
                    return Err(Error::invalid("at least one Lorentzian term is required"));
                }
                for t in terms {
                    if !(t.lambda.is_finite() && t.gamma.is_finite() && t.omega_tilde.is_finite()) {
                        return Err(Error::NonFinite("Lorentzian term"));
                    }
                    if t.lambda < 0.0 {
                        return Err(Error::invalid("lambda must be >= 0"));
                    }
                    if t.gamma <= 0.0 {
                        return Err(Error::invalid("gamma must be > 0"));
                    }
                    if t.omega_tilde < 0.0 {
                        return Err(Error::invalid("omega_tilde must be >= 0"));
                    }
                }
                Ok(())
            }
            Self::PowerLawExpCutoff(p) => {
                if !(p.amplitude.is_finite()
                    && p.exponent.is_finite()
                    && p.cutoff.is_finite()
                    && p.cutoff_exponent.is_finite())
                {
                    return Err(Error::NonFinite("power-law parameters"));
                }
                if p.amplitude < 0.0 {
                    return Err(Error::invalid("A must be >= 0"));
                }
                if p.exponent <= 0.0 || p.cutoff <= 0.0 || p.cutoff_exponent <= 0.0 {
                    return Err(Error::invalid("s, omega_c and q must all be > 0"));
                }
                Ok(())
            }
        }
    }

    /// Characteristic frequency: max over γ_j, ω̃_j, or ω_c.
    pub fn frequency_scale(&self) -> f64 {
        match self {
            Self::PowerLawExpCutoff(p) => p.cutoff,
            _ => self
                .lorentz_terms()
                .unwrap_or(&[])
                .iter()
                .fold(0.0_f64, |m, t| m.max(t.gamma).max(t.omega_tilde)),
        }
    }

    /// Frequency beyond which J(ω) is in its smooth asymptotic regime; frequency
    /// integrals are split here into a finite part and tails.
    pub(crate) fn tail_start(&self) -> f64 {
        match self {
            Self::PowerLawExpCutoff(p) => {
                let k = 40.0 + 2.0 * p.exponent;
                p.cutoff * k.powf(1.0 / p.cutoff_exponent)
            }
            _ => self
                .lorentz_terms()
                .unwrap_or(&[])
                .iter()
                .fold(0.0_f64, |m, t| m.max(t.omega_tilde + 20.0 * t.gamma)),
        }
    }

    /// J(ω). The tanh family needs a context; pass `None` for the others.
    pub fn eval(&self, omega: f64, context: Option<&PhysicalContext>) -> Result<f64> {
        if !omega.is_finite() {
            return Err(Error::NonFinite("omega"));
        }
        if let Self::TanhLorentzDrude(_) = self {
            let ctx = context.ok_or(Error::ContextRequired("tanh_lorentz_drude"))?;
            return Ok(self.density(omega, ctx.beta_hbar()));
        }
        Ok(self.density(omega, context.and_then(|c| c.beta_hbar())))
    }

    /// J(ω) for ω ≥ 0 and −J(−ω) for ω < 0.
    pub fn odd_extension(&self, context: &PhysicalContext, omega: f64) -> Result<f64> {
        if !omega.is_finite() {
            return Err(Error::NonFinite("omega"));
        }
        if omega < 0.0 {
            Ok(-self.density(-omega, context.beta_hbar()))
        } else {
            Ok(self.density(omega, context.beta_hbar()))
        }
    }

    /// Unchecked evaluation used inside integrands. `beta = None` is T → 0.
    pub(crate) fn density(&self, omega: f64, beta: Option<f64>) -> f64 {
        match self {
            Self::MultiLorentzDrude(terms) => {
                let sum: f64 = terms
                    .iter()
                    .map(|t| t.lambda * t.mirrored_lorentzians(omega))
                    .sum();
                omega * core::f64::consts::FRAC_1_PI * sum
            }
            Self::TanhLorentzDrude(terms) => {
                let sum: f64 = terms
                    .iter()
                    .map(|t| t.lambda * t.mirrored_lorentzians(omega))
                    .sum();
                let th = match beta {
                    Some(b) => (0.5 * b * omega).tanh(),
                    None => signum0(omega),
                };
                th * core::f64::consts::FRAC_1_PI * sum
            }
            Self::MeierTannor(terms) => {
                let sum: f64 = terms
                    .iter()
                    .map(|t| {
                        let g2 = t.gamma * t.gamma;
                        let dp = omega + t.omega_tilde;
                        let dm = omega - t.omega_tilde;
                        t.lambda / ((g2 + dp * dp) * (g2 + dm * dm))
                    })
                    .sum();
                0.5 * core::f64::consts::PI * omega * sum
            }
            Self::PowerLawExpCutoff(p) => {
                if omega == 0.0 || p.amplitude == 0.0 {
                    return 0.0;
                }
                let w = omega.abs();
                let v = p.amplitude
                    * w.powf(p.exponent)
                    * (-(w / p.cutoff).powf(p.cutoff_exponent)).exp();
                if omega < 0.0 {
                    -v
                } else {
                    v
                }
            }
        }
    }

    /// Closed-form λ = ∫₀^∞ J(ω)/ω dω where one exists (all but the tanh family).
    pub fn reorganization_energy_analytic(&self) -> Option<f64> {
        match self {
            Self::MultiLorentzDrude(terms) => Some(terms.iter().map(|t| t.lambda).sum()),
            Self::TanhLorentzDrude(_) => None,
            Self::MeierTannor(terms) => Some(
                terms
                    .iter()
                    .map(|t| {
                        let pi2 = core::f64::consts::PI * core::f64::consts::PI;
                        pi2 * t.lambda
                            / (8.0 * t.gamma * (t.gamma * t.gamma + t.omega_tilde * t.omega_tilde))
                    })
                    .sum(),
            ),
            Self::PowerLawExpCutoff(p) => {
                let q = p.cutoff_exponent;
                Some(p.amplitude / q * p.cutoff.powf(p.exponent) * libm::tgamma(p.exponent / q))
            }
        }
    }
}

/// Bath reorganization energy λ = ∫₀^∞ J(ω)/ω dω.
///
/// Uses the closed form when the family has one and quadrature otherwise.
pub fn reorganization_energy(
    spec: &SpectralDensity,
    context: &PhysicalContext,
    quad: &QuadratureConfig,
) -> Result<f64> {
    spec.validate()?;
    match spec.reorganization_energy_analytic() {
        Some(l) => Ok(l),
        None => reorganization_energy_by_quadrature(spec, context, quad),
    }
}

/// λ by adaptive quadrature regardless of family; the cross-check for the
/// closed forms.
pub fn reorganization_energy_by_quadrature(
    spec: &SpectralDensity,
    context: &PhysicalContext,
    quad: &QuadratureConfig,
) -> Result<f64> {
    spec.validate()?;
    let beta = context.beta_hbar();
    let integrand = |w: f64| Complex64::new(spec.density(w, beta) / w, 0.0);
    let split = spec.tail_start();
    let head = quadrature::integrate_finite(&integrand, 0.0, split, quad);
    let tail_cfg = quad.with_abs_tol(quad.abs_tol.max(0.1 * quad.rel_tol * head.value.norm()));
    let tail = quadrature::integrate_semi_infinite(&integrand, split, &tail_cfg)
        .map_err(|_| Error::Divergent("reorganization energy integral"))?;
    if !head.converged || !tail.converged {
        return Err(Error::QuadratureFailed {
            what: "reorganization energy",
            value: head.value.re + tail.value.re,
            error: head.error_estimate + tail.error_estimate,
        });
    }
    Ok(head.value.re + tail.value.re)
}

/// One term p·exp(Ω t) of an exponential bath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub p: Complex64,
    pub omega: Complex64,
}

impl ExpTerm {
    pub fn new(p: Complex64, omega: Complex64) -> Self {
        Self { p, omega }
    }
}

/// α(t) = Σ_j p_j exp(Ω_j t) with Re Ω_j < 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialBath {
    terms: Vec<ExpTerm>,
}

impl ExponentialBath {
    pub fn new(terms: Vec<ExpTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::invalid(
                "an exponential bath needs at least one term",
            ));
        }
        for t in &terms {
            if !(t.p.re.is_finite()
                && t.p.im.is_finite()
                && t.omega.re.is_finite()
                && t.omega.im.is_finite())
            {
                return Err(Error::NonFinite("bath term"));
            }
            if t.omega.re >= 0.0 {
                return Err(Error::invalid("every bath rate must have Re(omega) < 0"));
            }
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Σ_j p_j = α(0).
    pub fn sum_p(&self) -> Complex64 {
        self.terms.iter().map(|t| t.p).sum()
    }

    /// |Im α(0)| / |α(0)|; zero for an all-zero bath.
    pub fn alpha0_imag_ratio(&self) -> f64 {
        let s = self.sum_p();
        if s.norm() == 0.0 {
            0.0
        } else {
            s.im.abs() / s.norm()
        }
    }

    /// Checks the α(0)-real invariant against a relative tolerance (default 1e-6).
    pub fn check_alpha0_real(&self, tolerance: f64) -> Result<()> {
        let r = self.alpha0_imag_ratio();
        if r > tolerance {
            return Err(Error::invalid(alloc::format!(
                "Im(alpha(0))/|alpha(0)| = {r:e} exceeds {tolerance:e}"
            )));
        }
        Ok(())
    }

    /// max_j Re Ω_j (the slowest decay rate, negative).
    pub fn slowest_decay(&self) -> f64 {
        self.terms
            .iter()
            .fold(f64::NEG_INFINITY, |m, t| m.max(t.omega.re))
    }
}

/// Piecewise-constant forward/backward system coordinates s_k^±, k = 0..N.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePath {
    s_plus: Vec<f64>,
    s_minus: Vec<f64>,
}

impl DiscretePath {
    pub fn new(s_plus: Vec<f64>, s_minus: Vec<f64>) -> Result<Self> {
        if s_plus.len() != s_minus.len() {
            return Err(Error::LengthMismatch {
                expected: s_plus.len(),
                got: s_minus.len(),
            });
        }
        if s_plus.is_empty() {
            return Err(Error::invalid("a path needs at least one point"));
        }
        Ok(Self { s_plus, s_minus })
    }

    pub fn s_plus(&self) -> &[f64] {
        &self.s_plus
    }

    pub fn s_minus(&self) -> &[f64] {
        &self.s_minus
    }

    pub fn len(&self) -> usize {
        self.s_plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_plus.is_empty()
    }

    /// The same path with forward and backward branches exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            s_plus: self.s_minus.clone(),
            s_minus: self.s_plus.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::{E, PI};

    fn single_ld() -> SpectralDensity {
        SpectralDensity::multi_lorentz_drude(alloc::vec![LorentzTerm::new(1.0, 1.0, 0.0)]).unwrap()
    }

    #[test]
    fn power_law_direct_substitution() {
        let j = SpectralDensity::power_law(1.0, 1.0, 2.0, 1.0).unwrap();
        assert_relative_eq!(j.eval(2.0, None).unwrap(), 2.0 / E, max_relative = 1e-15);
    }

    #[test]
    fn mirrored_terms_coincide_at_zero_center() {
        let j = single_ld();
        assert_relative_eq!(j.eval(1.0, None).unwrap(), 1.0 / PI, max_relative = 1e-15);
    }

    #[test]
    fn debye_constructor_matches_single_lorentzian() {
        let j = SpectralDensity::debye(1.0, 1.0).unwrap();
        // (ω/π) λγ/(γ²+ω²) at ω = 1
        assert_relative_eq!(j.eval(1.0, None).unwrap(), 0.5 / PI, max_relative = 1e-15);
    }

    #[test]
    fn every_family_vanishes_at_zero() {
        let ctx = PhysicalContext::new(1.0).unwrap();
        let t = alloc::vec![LorentzTerm::new(1.0, 0.5, 2.0)];
        let specs = [
            SpectralDensity::multi_lorentz_drude(t.clone()).unwrap(),
            SpectralDensity::tanh_lorentz_drude(t.clone()).unwrap(),
            SpectralDensity::meier_tannor(t).unwrap(),
            SpectralDensity::power_law(1.0, 0.5, 1.0, 1.0).unwrap(),
        ];
        for s in &specs {
            assert_eq!(s.eval(0.0, Some(&ctx)).unwrap(), 0.0);
        }
    }

    #[test]
    fn odd_extension_examples() {
        let ctx = PhysicalContext::new(1.0).unwrap();
        let j = SpectralDensity::power_law(1.0, 1.0, 2.0, 1.0).unwrap();
        assert_relative_eq!(
            j.odd_extension(&ctx, -2.0).unwrap(),
            -2.0 / E,
            max_relative = 1e-15
        );
        assert_eq!(j.odd_extension(&ctx, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            single_ld().odd_extension(&ctx, -1.0).unwrap(),
            -1.0 / PI,
            max_relative = 1e-15
        );
    }

    #[test]
    fn tanh_family_requires_context() {
        let j = SpectralDensity::tanh_lorentz_drude(alloc::vec![LorentzTerm::new(1.0, 1.0, 0.0)])
            .unwrap();
        assert_eq!(
            j.eval(1.0, None),
            Err(Error::ContextRequired("tanh_lorentz_drude"))
        );
        assert!(j
            .eval(1.0, Some(&PhysicalContext::new(2.0).unwrap()))
            .is_ok());
    }

    #[test]
    fn non_finite_frequency_rejected() {
        assert_eq!(
            single_ld().eval(f64::NAN, None),
            Err(Error::NonFinite("omega"))
        );
        let ctx = PhysicalContext::new(1.0).unwrap();
        assert!(single_ld().odd_extension(&ctx, f64::INFINITY).is_err());
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(
            SpectralDensity::multi_lorentz_drude(alloc::vec![LorentzTerm::new(1.0, 0.0, 0.0)])
                .is_err()
        );
        assert!(SpectralDensity::multi_lorentz_drude(alloc::vec![]).is_err());
        assert!(SpectralDensity::power_law(1.0, 0.0, 1.0, 1.0).is_err());
        assert!(SpectralDensity::power_law(1.0, 1.0, -1.0, 1.0).is_err());
        assert!(SpectralDensity::power_law(-1.0, 1.0, 1.0, 1.0).is_err());
        assert!(PhysicalContext::new(0.0).is_err());
        assert!(PhysicalContext::from_kelvin(-3.0).is_err());
    }

    #[test]
    fn kelvin_conversion() {
        let ctx = PhysicalContext::from_kelvin(77.0).unwrap();
        assert_relative_eq!(
            ctx.beta_hbar().unwrap(),
            7.63824 / 77.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn reorganization_energy_closed_forms() {
        let quad = QuadratureConfig::default();
        let ctx = PhysicalContext::new(1.0).unwrap();
        let pl = SpectralDensity::power_law(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(
            reorganization_energy(&pl, &ctx, &quad).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        let ld = SpectralDensity::multi_lorentz_drude(alloc::vec![LorentzTerm::new(2.0, 1.0, 0.0)])
            .unwrap();
        assert_relative_eq!(
            reorganization_energy(&ld, &ctx, &quad).unwrap(),
            2.0,
            max_relative = 1e-14
        );
        let zero = SpectralDensity::power_law(0.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(reorganization_energy(&zero, &ctx, &quad).unwrap(), 0.0);
        assert_eq!(
            reorganization_energy_by_quadrature(&zero, &ctx, &quad).unwrap(),
            0.0
        );
    }

    #[test]
    fn reorganization_energy_quadrature_agrees() {
        let quad = QuadratureConfig::default();
        let ctx = PhysicalContext::new(1.0).unwrap();
        let ld = SpectralDensity::multi_lorentz_drude(alloc::vec![LorentzTerm::new(2.0, 1.0, 0.0)])
            .unwrap();
        let q = reorganization_energy_by_quadrature(&ld, &ctx, &quad).unwrap();
        assert_relative_eq!(q, 2.0, max_relative = 1e-8);
    }

    #[test]
    fn tanh_family_reorganization_energy_is_numeric() {
        let quad = QuadratureConfig::default();
        let ctx = PhysicalContext::new(0.5).unwrap();
        let j = SpectralDensity::tanh_lorentz_drude(alloc::vec![LorentzTerm::new(1.0, 2.0, 5.0)])
            .unwrap();
        let l = reorganization_energy(&j, &ctx, &quad).unwrap();
        assert!(l > 0.0 && l.is_finite());
        assert!(j.reorganization_energy_analytic().is_none());
    }

    #[test]
    fn thermal_weights_are_consistent() {
        let ctx = PhysicalContext::new(0.7).unwrap();
        for &w in &[-30.0, -2.0, -1e-7, 1e-9, 0.3, 5.0, 800.0] {
            let a = ctx.bose_weight(w);
            let b = ctx.bose_weight_hyperbolic(w);
            let c = 1.0 + ctx.coth_half(w);
            assert_relative_eq!(a, b, max_relative = 1e-12);
            if w > -1.0 {
                assert_relative_eq!(a, c, max_relative = 1e-12);
            }
        }
        let zero = PhysicalContext::zero_temperature();
        assert_eq!(zero.coth_half(-3.0), -1.0);
        assert_eq!(zero.bose_weight(2.0), 2.0);
        assert_eq!(zero.bose_weight(-2.0), 0.0);
    }

    #[test]
    fn bath_rejects_growing_modes() {
        let ok = ExpTerm::new(Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0));
        let bad = ExpTerm::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0));
        assert!(ExponentialBath::new(alloc::vec![ok]).is_ok());
        assert!(ExponentialBath::new(alloc::vec![ok, bad]).is_err());
        assert!(ExponentialBath::new(alloc::vec![]).is_err());
    }

    #[test]
    fn path_lengths_must_match() {
        assert!(DiscretePath::new(alloc::vec![1.0, 2.0], alloc::vec![1.0]).is_err());
        assert!(DiscretePath::new(alloc::vec![], alloc::vec![]).is_err());
        let p = DiscretePath::new(alloc::vec![1.0, 2.0], alloc::vec![0.0, -1.0]).unwrap();
        assert_eq!(p.swapped().s_plus(), &[0.0, -1.0]);
    }
}
