//! Spectral-density configuration files.

use std::path::Path;

use anadif::model::LorentzTerm;
use anadif::{PhysicalContext, SpectralDensity};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    MultiLorentzDrude,
    TanhLorentzDrude,
    MeierTannor,
    PowerExp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub lambda: f64,
    pub gamma: f64,
    #[serde(default)]
    pub omega_tilde: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<TermConfig>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(
        rename = "temperature_K",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub temperature_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_hbar_ps: Option<f64>,
}

impl SpectralConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("spectral config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = crate::formats::read_text(path)?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Missing temperature means zero temperature.
    pub fn context(&self) -> Result<PhysicalContext, CliError> {
        Ok(match (self.temperature_k, self.beta_hbar_ps) {
            (Some(_), Some(_)) => {
                return Err(CliError::Validation(
                    "give either temperature_K or beta_hbar_ps, not both".into(),
                ))
            }
            (Some(t), None) => PhysicalContext::from_kelvin(t)?,
            (None, Some(b)) => PhysicalContext::new(b)?,
            (None, None) => PhysicalContext::zero_temperature(),
        })
    }

    pub fn spectral_density(&self) -> Result<SpectralDensity, CliError> {
        let terms = || -> Result<Vec<LorentzTerm>, CliError> {
            if self.amplitude.is_some()
                || self.s.is_some()
                || self.omega_c.is_some()
                || self.q.is_some()
            {
                return Err(CliError::Validation(
                    "A, s, omega_c and q only apply to the power_exp family".into(),
                ));
            }
            if self.terms.is_empty() {
                return Err(CliError::Validation(
                    "this family needs at least one term".into(),
                ));
            }
            Ok(self
                .terms
                .iter()
                .map(|t| LorentzTerm::new(t.lambda, t.gamma, t.omega_tilde))
                .collect())
        };
        Ok(match self.family {
            Family::MultiLorentzDrude => SpectralDensity::multi_lorentz_drude(terms()?)?,
            Family::TanhLorentzDrude => SpectralDensity::tanh_lorentz_drude(terms()?)?,
            Family::MeierTannor => SpectralDensity::meier_tannor(terms()?)?,
            Family::PowerExp => {
                if !self.terms.is_empty() {
                    return Err(CliError::Validation("power_exp takes no terms".into()));
                }
                let need = |v: Option<f64>, name: &str| {
                    v.ok_or_else(|| CliError::Validation(format!("power_exp needs {name}")))
                };
                SpectralDensity::power_law(
                    need(self.amplitude, "A")?,
                    need(self.s, "s")?,
                    need(self.omega_c, "omega_c")?,
                    self.q.unwrap_or(1.0),
                )?
            }
        })
    }

    pub fn build(&self) -> Result<(SpectralDensity, PhysicalContext), CliError> {
        Ok((self.spectral_density()?, self.context()?))
    }
}
