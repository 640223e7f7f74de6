//! Sum-of-exponentials fit of the exponential-cutoff memory function on a
//! finite lag window, used to carry the far history in O(1) per step.
//!
//! 1/(τ − iε)⁴ = (1/6)∫₀^∞ s³e^{iεs}e^{−sτ}ds, and the trapezoid rule in
//! x = ln s converges geometrically for the doubly-decaying integrand.

use num_complex::Complex64;

#[derive(Debug, Clone)]
pub(crate) struct ExpSum {
    /// α_k in M(τ) ≈ Σ α_k e^{λ_k τ}.
    pub amps: Vec<Complex64>,
    pub rates: Vec<Complex64>,
}

impl ExpSum {
    /// M(τ) = D·6e^{iντ}/(τ − iε)⁴ on τ ∈ [tau_min, tau_max].
    pub fn for_exponential_cutoff(d: f64, nu: f64, eps: f64, tau_min: f64, tau_max: f64) -> Self {
        let h = 0.25;
        let s_lo = (1e-4 / tau_max).ln();
        let s_hi = (50.0 / tau_min).ln();
        let n = ((s_hi - s_lo) / h).ceil() as usize + 1;
        let mut amps = Vec::with_capacity(n);
        let mut rates = Vec::with_capacity(n);
        for k in 0..n {
            let s = (s_lo + h * k as f64).exp();
            amps.push(d * h * s.powi(4) * Complex64::from_polar(1.0, eps * s));
            rates.push(Complex64::new(-s, nu));
        }
        ExpSum { amps, rates }
    }

    #[cfg(test)]
    pub fn eval(&self, tau: f64) -> Complex64 {
        self.amps
            .iter()
            .zip(&self.rates)
            .map(|(a, l)| a * (l * tau).exp())
            .sum()
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }
}
