//! Dipole self-energy, angular bookkeeping and the A·p versus E·r matrix
//! elements. Everything here is SI; box-volume factors are folded out, so
//! single-mode quantities are per unit √V.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::codata::{
    BOHR_RADIUS, ELECTRON_MASS, ELEMENTARY_CHARGE, HBAR, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY,
};
use crate::params::hydrogen_nu;
use crate::quad::{gauss_legendre, integrate_real};

/// ⟨1s|r²|1s⟩ in units of a₀².
pub const R2_1S: f64 = 3.0;
/// ⟨2p|r²|2p⟩ in units of a₀².
pub const R2_2P: f64 = 30.0;
/// ⟨1s|r²|2p⟩ vanishes by parity.
pub const R2_OFF_DIAGONAL: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfEnergyResult {
    /// Energy per r², J/m².
    pub coefficient: f64,
}

impl SelfEnergyResult {
    /// Level shift in rad/s for a state with the given ⟨r²⟩ (m²).
    pub fn as_frequency_shift(&self, r2: f64) -> f64 {
        self.coefficient * r2 / HBAR
    }
}

fn c3() -> f64 {
    SPEED_OF_LIGHT.powi(3)
}

/// q²Ω³/(18π²ε₀c³): all modes up to Ω contribute fully.
pub fn self_energy_sharp(q: f64, omega_cut: f64) -> Result<SelfEnergyResult> {
    if !(omega_cut >= 0.0 && omega_cut.is_finite()) {
        return Err(Error::invalid("omega_cut", format!("must be non-negative, got {omega_cut}")));
    }
    Ok(SelfEnergyResult {
        coefficient: q * q * omega_cut.powi(3) / (18.0 * PI * PI * VACUUM_PERMITTIVITY * c3()),
    })
}

/// q²/(3π²ε₀c³ε³): modes weighted by e^{−εω}.
///
/// The sharp Ω³/3 becomes ∫ω²e^{−εω}dω = 2/ε³; the c³ keeps ε in seconds.
pub fn self_energy_smooth(q: f64, eps: f64) -> Result<SelfEnergyResult> {
    if !(eps > 0.0) {
        return Err(Error::NonpositiveEps(eps));
    }
    Ok(SelfEnergyResult {
        coefficient: q * q / (3.0 * PI * PI * VACUUM_PERMITTIVITY * c3() * eps.powi(3)),
    })
}

/// Sharp-cutoff coefficient from the explicit k-space mode sum
/// q²/(2ε₀)·(2π)⁻³∫d³k Σ_s (e_s·r̂)², using Gauss–Legendre in θ and k.
pub fn self_energy_sharp_mode_sum(q: f64, omega_cut: f64, nodes: usize) -> f64 {
    let k_max = omega_cut / SPEED_OF_LIGHT;
    let (x, w) = gauss_legendre(nodes);
    let mut angular = 0.0;
    let mut radial = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        // θ ∈ [0, π]; with r̂ = ẑ the two transverse polarizations give sin²θ
        let theta = 0.5 * PI * (xi + 1.0);
        angular += 0.5 * PI * wi * theta.sin().powi(3);
        let k = 0.5 * k_max * (xi + 1.0);
        radial += 0.5 * k_max * wi * k * k;
    }
    q * q / (2.0 * VACUUM_PERMITTIVITY) / (2.0 * PI).powi(3) * 2.0 * PI * angular * radial
}

/// ∫₀^π sinθ·cos²θ dθ.
pub fn angular_factor() -> f64 {
    integrate_real(&|t: f64| t.sin() * t.cos().powi(2), 0.0, PI, 1e-16, 1e-15)
        .map(|(v, _)| v)
        .expect("smooth integrand converges")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// ⟨(ê·d̂)²⟩ over uniformly random directions ê; the exact value is 1/3,
/// which equals 2π·(2/3)/(4π).
pub fn angular_average_monte_carlo(samples: usize, seed: u64) -> MonteCarloEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..samples {
        // cosθ is uniform on [−1, 1] for isotropic directions
        let c: f64 = rng.gen_range(-1.0..=1.0);
        let v = c * c;
        sum += v;
        sum2 += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0);
    MonteCarloEstimate {
        mean,
        std_error: (var / (n - 1.0).max(1.0)).sqrt(),
        samples,
    }
}

/// Σ_s∫|f|²sinθcos²θ dθdφ / (4π/3) for the isotropic per-polarization
/// profile |f|² = e^{−εck}; equals e^{−εck} by construction.
pub fn smooth_normalization(eps: f64, k: f64) -> f64 {
    let profile = (-eps * SPEED_OF_LIGHT * k).exp();
    let phi = 2.0 * PI;
    profile * phi * angular_factor() / (4.0 * PI / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixElementComparison {
    pub ap_element: f64,
    pub er_element: f64,
    pub ratio: f64,
}

/// Single-mode emission elements per unit √V: E·r gives
/// q·√(ħω_k/2ε₀)·r, A·p gives the same times ν/ω_k.
pub fn compare_ap_er(q: f64, nu: f64, omega_k: f64, r_element: f64) -> Result<MatrixElementComparison> {
    if !(omega_k > 0.0) {
        return Err(Error::invalid("omega_k", format!("must be positive, got {omega_k}")));
    }
    let er_element = q * (HBAR * omega_k / (2.0 * VACUUM_PERMITTIVITY)).sqrt() * r_element;
    let ratio = nu / omega_k;
    Ok(MatrixElementComparison {
        ap_element: ratio * er_element,
        er_element,
        ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalExcess {
    /// ħω_k.
    pub photon: f64,
    /// q²ħ/(2mω_kε₀), per unit volume; the 1/ω_k pole of the A·p form.
    pub a_squared: f64,
}

impl DiagonalExcess {
    pub fn total(&self) -> f64 {
        self.photon + self.a_squared
    }
}

/// Diagonal energy excess of |g; k,s⟩ in the A·p representation.
pub fn diagonal_energies_ap(q: f64, omega_k: f64) -> Result<DiagonalExcess> {
    if !(omega_k > 0.0) {
        return Err(Error::invalid("omega_k", format!("must be positive, got {omega_k}")));
    }
    Ok(DiagonalExcess {
        photon: HBAR * omega_k,
        a_squared: q * q * HBAR / (2.0 * ELECTRON_MASS * omega_k * VACUUM_PERMITTIVITY),
    })
}

/// Diagonal excess in the E·r representation: ħω_k plus the ω-independent
/// self-energy of the state.
pub fn diagonal_energies_er(self_energy: &SelfEnergyResult, r2: f64, omega_k: f64) -> f64 {
    HBAR * omega_k + self_energy.coefficient * r2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixReport {
    pub angular_factor: f64,
    pub angular_average_mc: MonteCarloEstimate,
    pub r2_1s_a0: f64,
    pub r2_2p_a0: f64,
    pub r2_ratio: f64,
    pub eps_seconds: f64,
    pub smooth_coefficient: f64,
    pub smooth_shift_over_nu: f64,
    pub sharp_omega_cut: f64,
    pub sharp_coefficient: f64,
    pub sharp_over_smooth: f64,
    pub sharp_over_smooth_expected: f64,
    pub ap_er_ratio_at_resonance: f64,
    pub ap_er_ratio_at_tenth: f64,
}

/// Hydrogen numbers at ε = 10·a₀/c and Ω = c/a₀.
pub fn appendix_report() -> AppendixReport {
    let e = ELEMENTARY_CHARGE;
    let eps = 10.0 * BOHR_RADIUS / SPEED_OF_LIGHT;
    let omega = SPEED_OF_LIGHT / BOHR_RADIUS;
    let smooth = self_energy_smooth(e, eps).expect("positive eps");
    let sharp = self_energy_sharp(e, omega).expect("positive cut");
    let nu = hydrogen_nu();
    let a2 = BOHR_RADIUS * BOHR_RADIUS;
    let shift = smooth.as_frequency_shift((R2_2P - R2_1S) * a2);
    AppendixReport {
        angular_factor: angular_factor(),
        angular_average_mc: angular_average_monte_carlo(1_000_000, 7),
        r2_1s_a0: R2_1S,
        r2_2p_a0: R2_2P,
        r2_ratio: R2_2P / R2_1S,
        eps_seconds: eps,
        smooth_coefficient: smooth.coefficient,
        smooth_shift_over_nu: shift / nu,
        sharp_omega_cut: omega,
        sharp_coefficient: sharp.coefficient,
        sharp_over_smooth: sharp.coefficient / smooth.coefficient,
        sharp_over_smooth_expected: (omega * eps).powi(3) / 6.0,
        ap_er_ratio_at_resonance: compare_ap_er(e, nu, nu, BOHR_RADIUS).expect("positive").ratio,
        ap_er_ratio_at_tenth: compare_ap_er(e, nu, nu / 10.0, BOHR_RADIUS).expect("positive").ratio,
    }
}
