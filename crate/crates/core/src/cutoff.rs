//! High-frequency cutoff families and the spectral weight they induce.
//!
//! The bare dipole coupling grows like ω³; every cutoff here multiplies or
//! replaces that density. Frequencies are angular, times are in the same unit
//! system as the owning [`AtomFieldParams`](crate::params::AtomFieldParams).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::codata;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CutoffSpec {
    /// Bare ω³ density; every frequency integral over it diverges.
    #[serde(rename = "none")]
    NoCutoff,
    /// ω³·e^{−εω}.
    Exponential { eps: f64 },
    /// ω³ on the closed interval [0, Ω], zero above.
    Sharp { omega_max: f64 },
    /// ν_ref²·ω/(1 + ε²ω²)⁴, the shape obtained from the A·p coupling.
    ApShape { eps: f64, nu_ref: f64 },
}

impl CutoffSpec {
    pub fn exponential(eps: f64) -> Result<Self> {
        let spec = CutoffSpec::Exponential { eps };
        spec.validate()?;
        Ok(spec)
    }

    pub fn sharp(omega_max: f64) -> Result<Self> {
        let spec = CutoffSpec::Sharp { omega_max };
        spec.validate()?;
        Ok(spec)
    }

    pub fn ap_shape(eps: f64, nu_ref: f64) -> Result<Self> {
        let spec = CutoffSpec::ApShape { eps, nu_ref };
        spec.validate()?;
        Ok(spec)
    }

    /// A·p shape with the hydrogen width ε = (2/3)·a₀/c, in seconds.
    pub fn ap_shape_hydrogen(nu_ref: f64) -> Result<Self> {
        Self::ap_shape(
            2.0 / 3.0 * codata::BOHR_RADIUS / codata::SPEED_OF_LIGHT,
            nu_ref,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be positive and finite, got {v}")))
            }
        };
        match *self {
            CutoffSpec::NoCutoff => Ok(()),
            CutoffSpec::Exponential { eps } => positive("cutoff.eps", eps),
            CutoffSpec::Sharp { omega_max } => positive("cutoff.omega_max", omega_max),
            CutoffSpec::ApShape { eps, nu_ref } => {
                positive("cutoff.eps", eps)?;
                positive("cutoff.nu_ref", nu_ref)
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            CutoffSpec::NoCutoff => "none",
            CutoffSpec::Exponential { .. } => "exponential",
            CutoffSpec::Sharp { .. } => "sharp",
            CutoffSpec::ApShape { .. } => "ap-shape",
        }
    }

    pub fn is_integrable(&self) -> bool {
        !matches!(self, CutoffSpec::NoCutoff)
    }

    /// Weight w(ω) multiplying the frequency integrand.
    pub fn spectral_weight(&self, omega: f64) -> Result<f64> {
        if omega < 0.0 {
            return Err(Error::NegativeFrequency(omega));
        }
        Ok(self.weight_unchecked(omega))
    }

    /// Same as [`spectral_weight`](Self::spectral_weight) for callers that
    /// already guarantee ω ≥ 0.
    #[inline]
    pub(crate) fn weight_unchecked(&self, omega: f64) -> f64 {
        let cube = omega * omega * omega;
        match *self {
            CutoffSpec::NoCutoff => cube,
            CutoffSpec::Exponential { eps } => cube * (-eps * omega).exp(),
            CutoffSpec::Sharp { omega_max } => {
                if omega <= omega_max {
                    cube
                } else {
                    0.0
                }
            }
            CutoffSpec::ApShape { eps, nu_ref } => {
                let x2 = eps * eps * omega * omega;
                let d = 1.0 + x2;
                let d2 = d * d;
                nu_ref * nu_ref * omega / (d2 * d2)
            }
        }
    }

    /// Leading power of ω as ω → 0.
    pub fn low_frequency_exponent(&self) -> u32 {
        match self {
            CutoffSpec::ApShape { .. } => 1,
            _ => 3,
        }
    }

    /// Characteristic width of the memory kernel in time.
    pub fn time_scale(&self) -> Option<f64> {
        match *self {
            CutoffSpec::NoCutoff => None,
            CutoffSpec::Exponential { eps } | CutoffSpec::ApShape { eps, .. } => Some(eps),
            CutoffSpec::Sharp { omega_max } => Some(1.0 / omega_max),
        }
    }

    /// ∫₀^∞ w(ω) dω, `None` when it diverges.
    pub fn total_weight(&self) -> Option<f64> {
        match *self {
            CutoffSpec::NoCutoff => None,
            CutoffSpec::Exponential { eps } => Some(6.0 / eps.powi(4)),
            CutoffSpec::Sharp { omega_max } => Some(omega_max.powi(4) / 4.0),
            CutoffSpec::ApShape { eps, nu_ref } => Some(nu_ref * nu_ref / (6.0 * eps * eps)),
        }
    }

    /// ∫_x^∞ w(ω) dω in closed form.
    pub fn upper_tail_weight(&self, x: f64) -> Option<f64> {
        let x = x.max(0.0);
        match *self {
            CutoffSpec::NoCutoff => None,
            CutoffSpec::Exponential { eps } => {
                let (e2, e3, e4) = (eps * eps, eps * eps * eps, eps.powi(4));
                Some(
                    (-eps * x).exp()
                        * (x * x * x / eps + 3.0 * x * x / e2 + 6.0 * x / e3 + 6.0 / e4),
                )
            }
            CutoffSpec::Sharp { omega_max } => {
                Some(if x >= omega_max { 0.0 } else { (omega_max.powi(4) - x.powi(4)) / 4.0 })
            }
            CutoffSpec::ApShape { eps, nu_ref } => {
                let d = 1.0 + eps * eps * x * x;
                Some(nu_ref * nu_ref / (6.0 * eps * eps * d * d * d))
            }
        }
    }

    /// Same cutoff expressed in a unit system whose frequencies are divided
    /// by `freq_unit` (times multiplied by it).
    pub(crate) fn rescaled(&self, freq_unit: f64) -> Self {
        match *self {
            CutoffSpec::NoCutoff => CutoffSpec::NoCutoff,
            CutoffSpec::Exponential { eps } => CutoffSpec::Exponential { eps: eps * freq_unit },
            CutoffSpec::Sharp { omega_max } => CutoffSpec::Sharp {
                omega_max: omega_max / freq_unit,
            },
            CutoffSpec::ApShape { eps, nu_ref } => CutoffSpec::ApShape {
                eps: eps * freq_unit,
                nu_ref: nu_ref / freq_unit,
            },
        }
    }
}
