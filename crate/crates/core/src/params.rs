//! Parameter bundles, the hydrogen preset and the validity-window arithmetic.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cutoff::CutoffSpec;
use crate::error::{Error, Result};

/// CODATA 2018 values, SI units.
pub mod codata {
    pub const FINE_STRUCTURE: f64 = 7.297_352_569_3e-3;
    pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
    pub const HBAR: f64 = 1.054_571_817e-34;
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
    pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
}

/// Ratio below which "≪ 1" counts as satisfied.
pub const STAR_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitSystem {
    /// Frequencies in units of the transition frequency, c = 1.
    #[default]
    Dimensionless,
    /// SI seconds, with a₀, c and α explicit.
    AtomicHydrogen,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomFieldParams {
    pub nu: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub cutoff: CutoffSpec,
    #[serde(default)]
    pub units: UnitSystem,
}

impl AtomFieldParams {
    /// Validated constructor. `d = 0` is accepted (uncoupled atom).
    pub fn new(nu: f64, d: f64, cutoff: CutoffSpec, units: UnitSystem) -> Result<Self> {
        let p = AtomFieldParams { nu, d, cutoff, units };
        p.validate()?;
        Ok(p)
    }

    /// Dimensionless parameters with an exponential cutoff.
    pub fn scaled(nu: f64, d: f64, eps: f64) -> Result<Self> {
        Self::new(nu, d, CutoffSpec::exponential(eps)?, UnitSystem::Dimensionless)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return Err(Error::invalid("nu", format!("must be positive, got {}", self.nu)));
        }
        if !(self.d.is_finite() && self.d >= 0.0) {
            return Err(Error::invalid("D", format!("must be non-negative, got {}", self.d)));
        }
        self.cutoff.validate()
    }

    /// Γ = 2πν³D.
    pub fn gamma(&self) -> f64 {
        2.0 * PI * self.nu.powi(3) * self.d
    }

    pub fn with_cutoff(&self, cutoff: CutoffSpec) -> Self {
        AtomFieldParams { cutoff, ..*self }
    }

    pub fn with_coupling(&self, d: f64) -> Self {
        AtomFieldParams { d, ..*self }
    }

    /// Express the same physics with frequencies measured in units of
    /// `freq_unit` (ν → ν/freq_unit, D → D·freq_unit², times scale inversely).
    pub fn rescaled(&self, freq_unit: f64, units: UnitSystem) -> Self {
        AtomFieldParams {
            nu: self.nu / freq_unit,
            d: self.d * freq_unit * freq_unit,
            cutoff: self.cutoff.rescaled(freq_unit),
            units,
        }
    }

    /// Canonical solver form: ν = 1 exactly. Returns the parameters and the
    /// frequency unit needed to convert back.
    pub fn to_dimensionless(&self) -> (Self, f64) {
        let unit = self.nu;
        let mut p = self.rescaled(unit, UnitSystem::Dimensionless);
        p.nu = 1.0;
        (p, unit)
    }

    /// Inverse of [`to_dimensionless`](Self::to_dimensionless).
    pub fn from_dimensionless(&self, freq_unit: f64, units: UnitSystem) -> Self {
        self.rescaled(1.0 / freq_unit, units)
    }
}

/// |d_eg| for the hydrogen 1s–2p transition, in C·m.
pub fn hydrogen_dipole_moment() -> f64 {
    128.0 * 2f64.sqrt() / 243.0 * codata::ELEMENTARY_CHARGE * codata::BOHR_RADIUS
}

/// D = 2|d|²/(3(2π)²ε₀ħc³), in s².
pub fn coupling_from_dipole(dipole: f64) -> f64 {
    let c = codata::SPEED_OF_LIGHT;
    2.0 * dipole * dipole
        / (3.0 * (2.0 * PI).powi(2) * codata::VACUUM_PERMITTIVITY * codata::HBAR * c * c * c)
}

/// The rounded form D ≈ α/(2π)·(a₀/c)², which follows from |d| ≈ ¾·e·a₀.
pub fn hydrogen_coupling_rounded() -> f64 {
    let t = codata::BOHR_RADIUS / codata::SPEED_OF_LIGHT;
    codata::FINE_STRUCTURE / (2.0 * PI) * t * t
}

/// Lyman-α angular frequency in the ν = (3α/8)·c/a₀ form, s⁻¹.
pub fn hydrogen_nu() -> f64 {
    3.0 * codata::FINE_STRUCTURE / 8.0 * codata::SPEED_OF_LIGHT / codata::BOHR_RADIUS
}

/// Hydrogen 1s–2p in SI units with ε = 10·a₀/c.
///
/// D uses the rounded closed form so that the textbook ratios hold exactly;
/// [`hydrogen_preset_exact_coupling`] swaps in the exact dipole moment.
pub fn hydrogen_preset() -> AtomFieldParams {
    AtomFieldParams {
        nu: hydrogen_nu(),
        d: hydrogen_coupling_rounded(),
        cutoff: CutoffSpec::Exponential {
            eps: 10.0 * codata::BOHR_RADIUS / codata::SPEED_OF_LIGHT,
        },
        units: UnitSystem::AtomicHydrogen,
    }
}

pub fn hydrogen_preset_exact_coupling() -> AtomFieldParams {
    hydrogen_preset().with_coupling(coupling_from_dipole(hydrogen_dipole_moment()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub eps_scaled: f64,
    pub star_ok: bool,
    pub window_ok: bool,
    pub lamb_ratio: f64,
    pub rate_ratio: f64,
    pub star_threshold: f64,
    /// eps_scaled / lower_bound.
    pub lower_margin: f64,
    /// upper_bound / eps_scaled.
    pub upper_margin: f64,
}

/// Window ∛(2Dν²) ≪ εν ≪ 1, expressed in ε·c/a₀ for hydrogen units and in
/// εν otherwise.
pub fn validity_report(p: &AtomFieldParams) -> Result<ValidityReport> {
    let CutoffSpec::Exponential { eps } = p.cutoff else {
        return Err(Error::UnsupportedCutoff {
            operation: "validity_report",
            cutoff: p.cutoff.kind_name(),
        });
    };
    let scale = match p.units {
        UnitSystem::Dimensionless => 1.0,
        UnitSystem::AtomicHydrogen => codata::SPEED_OF_LIGHT / (codata::BOHR_RADIUS * p.nu),
    };
    let lower_bound = (2.0 * p.d * p.nu * p.nu).cbrt() * scale;
    let upper_bound = scale;
    let eps_scaled = eps * p.nu * scale;
    let lamb_ratio = 2.0 * p.d / eps.powi(3) / p.nu;
    let rate_ratio = p.gamma() / p.nu;
    Ok(ValidityReport {
        lower_bound,
        upper_bound,
        eps_scaled,
        star_ok: lamb_ratio < STAR_THRESHOLD && rate_ratio < STAR_THRESHOLD,
        window_ok: lower_bound < eps_scaled && eps_scaled < upper_bound,
        lamb_ratio,
        rate_ratio,
        star_threshold: STAR_THRESHOLD,
        lower_margin: eps_scaled / lower_bound,
        upper_margin: upper_bound / eps_scaled,
    })
}
