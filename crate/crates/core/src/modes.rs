//! Finite bath of field modes and direct integration of the amplitude ODEs
//!
//! ċ_e = −i Σ g_j e^{iΔ_j t} c_j,   ċ_j = −i g_j e^{−iΔ_j t} c_e,   Δ_j = ν − ω_j.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cutoff::CutoffSpec;
use crate::error::{Error, Result};
use crate::markov::{markov_summary, markov_summary_analytic};
use crate::params::AtomFieldParams;
use crate::quad::gauss_legendre;
use crate::volterra::AmplitudeTrace;

/// Largest admissible tail mass outside the discretized span.
pub const SPAN_TAIL_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSet {
    pub omegas: Vec<f64>,
    /// Effective couplings g_j² = D·w(ω_j)·q_j.
    pub weights: Vec<f64>,
    /// Quadrature weights q_j of the underlying rule.
    pub quad_weights: Vec<f64>,
    /// Fraction of ∫w lying outside the span.
    pub tail_fraction: f64,
}

impl ModeSet {
    /// Builds a mode set from explicit frequencies and couplings g_j².
    pub fn from_parts(omegas: Vec<f64>, weights: Vec<f64>, quad_weights: Vec<f64>) -> Result<Self> {
        if omegas.is_empty() || omegas.len() != weights.len() || omegas.len() != quad_weights.len() {
            return Err(Error::invalid("modes", "frequency and weight lists must match and be non-empty"));
        }
        if omegas[0] < 0.0 || omegas.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("modes", "frequencies must be non-negative and strictly increasing"));
        }
        if weights.iter().chain(&quad_weights).any(|w| !(*w >= 0.0)) {
            return Err(Error::invalid("modes", "weights must be non-negative"));
        }
        Ok(ModeSet {
            omegas,
            weights,
            quad_weights,
            tail_fraction: 0.0,
        })
    }

    pub fn count(&self) -> usize {
        self.omegas.len()
    }

    /// Σ g_j² e^{−iω_j τ}, the discrete stand-in for D·K(τ).
    pub fn kernel(&self, tau: f64) -> Complex64 {
        self.omegas
            .iter()
            .zip(&self.weights)
            .map(|(w, g2)| g2 * Complex64::from_polar(1.0, -w * tau))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Discretization {
    /// Three density-mapped segments: a low-frequency stretch, a window
    /// clustered on the shifted resonance, and a far range whose density
    /// follows w(ω)/|ω − ω_c|.
    Mapped,
    /// Composite Gauss–Legendre with equal panels.
    Panels { panels: usize },
}

fn tail_fraction(spec: &CutoffSpec, lo: f64, hi: f64) -> Result<f64> {
    let total = spec.total_weight().ok_or(Error::DivergentIntegral)?;
    let above = spec.upper_tail_weight(hi).ok_or(Error::DivergentIntegral)?;
    let below = total - spec.upper_tail_weight(lo).ok_or(Error::DivergentIntegral)?;
    Ok((above + below.max(0.0)) / total)
}

/// Mapped discretization for n ≥ 10 modes, a single Gauss–Legendre panel
/// below that.
pub fn discretize(p: &AtomFieldParams, n_modes: usize, omega_span: (f64, f64)) -> Result<ModeSet> {
    let how = if n_modes >= 10 {
        Discretization::Mapped
    } else {
        Discretization::Panels { panels: 1 }
    };
    discretize_with(p, n_modes, omega_span, how)
}

pub fn discretize_with(
    p: &AtomFieldParams,
    n_modes: usize,
    omega_span: (f64, f64),
    how: Discretization,
) -> Result<ModeSet> {
    p.validate()?;
    if n_modes < 2 {
        return Err(Error::invalid("n_modes", format!("need at least 2, got {n_modes}")));
    }
    let (lo, hi) = omega_span;
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::invalid("omega_span", format!("invalid span [{lo}, {hi}]")));
    }
    if matches!(p.cutoff, CutoffSpec::NoCutoff) {
        return Err(Error::DivergentIntegral);
    }
    let tail = tail_fraction(&p.cutoff, lo, hi)?;
    if tail > SPAN_TAIL_LIMIT {
        return Err(Error::SpanTooSmall {
            tail_fraction: tail,
            limit: SPAN_TAIL_LIMIT,
        });
    }
    let nu = p.nu;
    let mapped_fits = lo < 0.4 * nu && hi > 1.6 * nu && n_modes >= 10;
    let (omegas, quad_weights) = match how {
        Discretization::Mapped if mapped_fits => {
            let center = resonance_center(p);
            mapped_nodes(&p.cutoff, n_modes, lo, hi, nu, center)
        }
        Discretization::Mapped => panel_nodes(n_modes, lo, hi, 1),
        Discretization::Panels { panels } => {
            if panels == 0 || panels > n_modes {
                return Err(Error::invalid("panels", format!("need 1..={n_modes}, got {panels}")));
            }
            panel_nodes(n_modes, lo, hi, panels)
        }
    };
    let weights = omegas
        .iter()
        .zip(&quad_weights)
        .map(|(&w, &q)| p.d * p.cutoff.weight_unchecked(w) * q)
        .collect();
    Ok(ModeSet {
        omegas,
        weights,
        quad_weights,
        tail_fraction: tail,
    })
}

/// ν − b: the decaying amplitude rotates at the shifted frequency, so that
/// is where the bath must be resolved.
fn resonance_center(p: &AtomFieldParams) -> f64 {
    let summary = match p.cutoff {
        CutoffSpec::Exponential { .. } => markov_summary_analytic(p),
        _ => markov_summary(p),
    };
    let b = summary.map(|s| s.shift).unwrap_or(0.0);
    (p.nu - b).clamp(0.45 * p.nu, 1.55 * p.nu)
}

fn panel_nodes(n: usize, lo: f64, hi: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let mut omegas = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let width = (hi - lo) / panels as f64;
    for k in 0..panels {
        let per = n / panels + usize::from(k < n % panels);
        let (x, w) = gauss_legendre(per);
        let a = lo + k as f64 * width;
        for (xi, wi) in x.iter().zip(&w) {
            omegas.push(a + 0.5 * width * (xi + 1.0));
            weights.push(0.5 * width * wi);
        }
    }
    (omegas, weights)
}

/// Gauss–Legendre in y with ω = c + L·sinh(y), which clusters nodes at c.
fn sinh_segment(n: usize, a: f64, b: f64, c: f64, l: f64, out: &mut (Vec<f64>, Vec<f64>)) {
    let (x, w) = gauss_legendre(n);
    let ya = ((a - c) / l).asinh();
    let yb = ((b - c) / l).asinh();
    for (xi, wi) in x.iter().zip(&w) {
        let y = ya + 0.5 * (yb - ya) * (xi + 1.0);
        out.0.push(c + l * y.sinh());
        out.1.push(l * y.cosh() * 0.5 * (yb - ya) * wi);
    }
}

/// Gauss–Legendre in the cumulative distribution of `rho` on [a, b].
fn density_segment(n: usize, a: f64, b: f64, rho: &dyn Fn(f64) -> f64, out: &mut (Vec<f64>, Vec<f64>)) {
    const GRID: usize = 200_000;
    let h = (b - a) / GRID as f64;
    let mut cdf = Vec::with_capacity(GRID + 1);
    cdf.push(0.0);
    let mut prev = rho(a);
    for k in 1..=GRID {
        let r = rho(a + k as f64 * h);
        let last = *cdf.last().unwrap();
        cdf.push(last + 0.5 * (prev + r) * h);
        prev = r;
    }
    let z = cdf[GRID];
    let (x, w) = gauss_legendre(n);
    let mut k = 0;
    for (xi, wi) in x.iter().zip(&w) {
        let target = 0.5 * (xi + 1.0) * z;
        while k + 1 < GRID && cdf[k + 1] < target {
            k += 1;
        }
        let span = cdf[k + 1] - cdf[k];
        let frac = if span > 0.0 { (target - cdf[k]) / span } else { 0.5 };
        let omega = a + (k as f64 + frac) * h;
        out.0.push(omega);
        out.1.push(0.5 * wi * z / rho(omega));
    }
}

fn mapped_nodes(spec: &CutoffSpec, n: usize, lo: f64, hi: f64, nu: f64, center: f64) -> (Vec<f64>, Vec<f64>) {
    let n_low = (n / 10).max(2);
    let n_res = (n / 5).max(2);
    let n_far = n - n_low - n_res;
    let (w0, w1) = (0.4 * nu, 1.6 * nu);
    let mut out = (Vec::with_capacity(n), Vec::with_capacity(n));
    sinh_segment(n_low, lo, w0, w0, nu, &mut out);
    sinh_segment(n_res, w0, w1, center, 0.05 * nu, &mut out);
    let peak = (0..=256)
        .map(|k| w1 + (hi - w1) * k as f64 / 256.0)
        .map(|w| spec.weight_unchecked(w) / (w - center))
        .fold(0.0, f64::max);
    let floor = 1e-12 * peak;
    let rho = move |w: f64| spec.weight_unchecked(w) / (w - center).abs() + floor;
    density_segment(n_far, w1, hi, &rho, &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullState {
    pub c_e: Complex64,
    pub c_g: Vec<Complex64>,
}

impl FullState {
    pub fn norm_sq(&self) -> f64 {
        self.c_e.norm_sqr() + self.c_g.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// |c_g,j|² / q_j: the emitted spectrum as a density in ω.
    pub fn spectral_density(&self, modes: &ModeSet) -> Vec<f64> {
        self.c_g
            .iter()
            .zip(&modes.quad_weights)
            .map(|(c, q)| if *q > 0.0 { c.norm_sqr() / q } else { 0.0 })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModesRun {
    pub trace: AmplitudeTrace,
    pub state: FullState,
    /// max |Σ|c|² − 1| over the recorded steps.
    pub max_norm_drift: f64,
}

/// Largest admissible dt·max|ν − ω_j|.
pub const DETUNING_STEP_LIMIT: f64 = 0.1;

pub fn max_detuning(p: &AtomFieldParams, m: &ModeSet) -> f64 {
    m.omegas.iter().map(|w| (p.nu - w).abs()).fold(0.0, f64::max)
}

/// Integrates the (N+1)-dimensional system with classical RK4, recording
/// every step.
pub fn solve_modes(p: &AtomFieldParams, m: &ModeSet, t_end: f64, dt: f64) -> Result<ModesRun> {
    solve_modes_strided(p, m, t_end, dt, 1)
}

/// As [`solve_modes`], recording every `stride`-th step.
pub fn solve_modes_strided(
    p: &AtomFieldParams,
    m: &ModeSet,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<ModesRun> {
    if !(dt > 0.0 && t_end > 0.0) || stride == 0 {
        return Err(Error::invalid("dt", "dt, t_end and stride must be positive"));
    }
    let limit = DETUNING_STEP_LIMIT / max_detuning(p, m).max(1e-300);
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { dt, limit });
    }
    let n = m.count();
    let steps = (t_end / dt).round().max(1.0) as usize;
    let g: Vec<f64> = m.weights.iter().map(|w| w.sqrt()).collect();
    let detune: Vec<f64> = m.omegas.iter().map(|w| p.nu - w).collect();
    let half: Vec<Complex64> = detune.iter().map(|d| Complex64::from_polar(1.0, 0.5 * d * dt)).collect();
    // Σ g_j² and Σ g_j² e^{iΔ_j h/2} enter the fused stage algebra below
    let g2_sum: f64 = m.weights.iter().sum();
    let g2_half: Complex64 = m.weights.iter().zip(&half).map(|(w, h)| w * h).sum();
    let mut ph = vec![Complex64::new(1.0, 0.0); n];
    let mut ce = Complex64::new(1.0, 0.0);
    let mut cg = vec![Complex64::new(0.0, 0.0); n];
    let mi = Complex64::new(0.0, -1.0);

    let mut trace = AmplitudeTrace::new(p.cutoff.time_scale());
    trace.push(0.0, ce);
    let mut drift: f64 = 0.0;

    for step in 0..steps {
        // dot products against the current bath at the three stage times
        let (mut p1, mut pm, mut pe) = (Complex64::default(), Complex64::default(), Complex64::default());
        for j in 0..n {
            let a = ph[j];
            let b = a * half[j];
            let c = b * half[j];
            let gc = g[j] * cg[j];
            p1 += a * gc;
            pm += b * gc;
            pe += c * gc;
        }
        // Each bath stage is cg plus a multiple of g_j·conj(phase)·c_e, so the
        // stage sums collapse onto p1/pm/pe and the two constants above.
        let k1 = mi * p1;
        let ce2 = ce + 0.5 * dt * k1;
        let k2 = mi * (pm + mi * 0.5 * dt * ce * g2_half);
        let ce3 = ce + 0.5 * dt * k2;
        let k3 = mi * (pm + mi * 0.5 * dt * ce2 * g2_sum);
        let ce4 = ce + dt * k3;
        let k4 = mi * (pe + mi * dt * ce3 * g2_half);
        let ce_new = ce + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let t_next = (step + 1) as f64 * dt;
        let resync = (step + 1) % 1024 == 0;
        for j in 0..n {
            let a = ph[j];
            let b = a * half[j];
            let c = b * half[j];
            let s = a.conj() * ce + 2.0 * b.conj() * (ce2 + ce3) + c.conj() * ce4;
            cg[j] += mi * (dt / 6.0 * g[j]) * s;
            ph[j] = if resync {
                Complex64::from_polar(1.0, detune[j] * t_next)
            } else {
                c
            };
        }
        ce = ce_new;
        if (step + 1) % stride == 0 || step + 1 == steps {
            trace.push(t_next, ce);
            let norm = ce.norm_sqr() + cg.iter().map(|c| c.norm_sqr()).sum::<f64>();
            drift = drift.max((norm - 1.0).abs());
        }
    }
    Ok(ModesRun {
        trace,
        state: FullState { c_e: ce, c_g: cg },
        max_norm_drift: drift,
    })
}

/// Eigenvalues of the interaction-picture generator −iH with
/// H = [[0, g], [g, −Δ]] (phases absorbed into the bath amplitudes).
pub fn generator_spectrum(p: &AtomFieldParams, m: &ModeSet) -> Vec<Complex64> {
    let n = m.count() + 1;
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..m.count() {
        let g = Complex64::new(m.weights[j].sqrt(), 0.0);
        h[(0, j + 1)] = g;
        h[(j + 1, 0)] = g;
        h[(j + 1, j + 1)] = Complex64::new(-(p.nu - m.omegas[j]), 0.0);
    }
    let gen = h * Complex64::new(0.0, -1.0);
    gen.schur().eigenvalues().map(|e| e.iter().copied().collect()).unwrap_or_default()
}
