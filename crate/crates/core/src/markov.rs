//! Pole approximation, rate fitting and the long-time crossover.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cutoff::CutoffSpec;
use crate::error::{Error, Result};
use crate::kernel::{halfline_integral, HalfLineIntegral, HalfLineMethod};
use crate::params::AtomFieldParams;
use crate::volterra::AmplitudeTrace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkovSummary {
    /// Real part of the pole constant (negative for a decaying atom).
    pub a: f64,
    /// Imaginary part: the frequency shift.
    pub b: f64,
    pub gamma_eff: f64,
    pub shift: f64,
    /// (|a|/ν, |b|/ν).
    pub star_ratios: (f64, f64),
    /// 2D/ε³ for the exponential cutoff.
    pub leading_shift: Option<f64>,
    pub gamma: f64,
}

/// a + ib = −D·∫₀^∞ K(τ)e^{iντ}dτ.
///
/// For the exponential cutoff `a` comes from the closed form and `b` from
/// quadrature of the τ-integral; other cutoffs use the frequency-domain
/// principal value.
pub fn markov_summary(p: &AtomFieldParams) -> Result<MarkovSummary> {
    p.validate()?;
    let (re, im) = match p.cutoff {
        CutoffSpec::NoCutoff => return Err(Error::DivergentIntegral),
        CutoffSpec::Exponential { .. } => {
            let exact = halfline_integral(&p.cutoff, p.nu, None, HalfLineMethod::Analytic)?;
            let quad = halfline_integral(&p.cutoff, p.nu, None, HalfLineMethod::Quadrature)?;
            (exact.real_part, quad.imag_part)
        }
        _ => {
            let h = halfline_integral(&p.cutoff, p.nu, None, HalfLineMethod::Quadrature)?;
            (h.real_part, h.imag_part)
        }
    };
    Ok(from_halfline(p, re, im))
}

/// Summary built purely from the closed forms (exponential cutoff only).
pub fn markov_summary_analytic(p: &AtomFieldParams) -> Result<MarkovSummary> {
    let h: HalfLineIntegral = halfline_integral(&p.cutoff, p.nu, None, HalfLineMethod::Analytic)?;
    Ok(from_halfline(p, h.real_part, h.imag_part))
}

fn from_halfline(p: &AtomFieldParams, re: f64, im: f64) -> MarkovSummary {
    let a = -p.d * re;
    let b = -p.d * im;
    let leading_shift = match p.cutoff {
        CutoffSpec::Exponential { eps } => Some(2.0 * p.d / eps.powi(3)),
        _ => None,
    };
    MarkovSummary {
        a,
        b,
        gamma_eff: -2.0 * a,
        shift: b,
        star_ratios: (a.abs() / p.nu, b.abs() / p.nu),
        leading_shift,
        gamma: p.gamma(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub gamma_fit: f64,
    pub shift_fit: f64,
    pub fit_window: (f64, f64),
    pub residual_rms: f64,
    pub samples: usize,
}

pub const MIN_FIT_SAMPLES: usize = 50;

/// Least-squares line through (t, ln|c|²) and through the unwrapped phase.
pub fn fit_exponential(trace: &AmplitudeTrace, window: (f64, f64)) -> Result<FitResult> {
    let (t0, t1) = window;
    if !(t0 < t1) {
        return Err(Error::invalid("window", format!("empty window [{t0}, {t1}]")));
    }
    let (Some(&first), Some(&last)) = (trace.times.first(), trace.times.last()) else {
        return Err(Error::WindowTooSmall { samples: 0, required: MIN_FIT_SAMPLES });
    };
    if t0 < first || t1 > last * (1.0 + 1e-12) {
        return Err(Error::invalid(
            "window",
            format!("[{t0}, {t1}] is not inside the trace span [{first}, {last}]"),
        ));
    }
    let earliest = trace.min_fit_start();
    if t0 < earliest * (1.0 - 1e-12) {
        return Err(Error::WindowTooEarly { start: t0, earliest });
    }
    let lo = trace.times.partition_point(|&t| t < t0);
    let hi = trace.times.partition_point(|&t| t <= t1);
    let n = hi.saturating_sub(lo);
    if n < MIN_FIT_SAMPLES {
        return Err(Error::WindowTooSmall { samples: n, required: MIN_FIT_SAMPLES });
    }
    let ts = &trace.times[lo..hi];
    let mut logs = Vec::with_capacity(n);
    for &p in &trace.norm_sq[lo..hi] {
        if !(p >= 1e-280) {
            return Err(Error::AmplitudeUnderflow(p));
        }
        logs.push(p.ln());
    }
    let phases = unwrap_phase(&trace.c_e[lo..hi]);
    let (slope_pop, _, rms) = line_fit(ts, &logs);
    let (slope_phase, _, _) = line_fit(ts, &phases);
    Ok(FitResult {
        gamma_fit: -slope_pop,
        shift_fit: slope_phase,
        fit_window: (t0, t1),
        residual_rms: rms,
        samples: n,
    })
}

/// Nearest-branch continuation of arg c.
pub fn unwrap_phase(c: &[Complex64]) -> Vec<f64> {
    use std::f64::consts::PI;
    let mut out = Vec::with_capacity(c.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for z in c {
        let raw = z.arg();
        if let Some(p) = prev {
            let mut d = raw + offset - p;
            while d > PI {
                offset -= 2.0 * PI;
                d -= 2.0 * PI;
            }
            while d < -PI {
                offset += 2.0 * PI;
                d += 2.0 * PI;
            }
        }
        let v = raw + offset;
        out.push(v);
        prev = Some(v);
    }
    out
}

/// Returns slope, intercept and RMS residual.
fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (icpt + slope * a);
            r * r
        })
        .sum();
    (slope, icpt, (ss / n).sqrt())
}

/// Root t* of e^{−Γ_eff·t/2}/ε⁴ = 1/t⁴, where the power-law tail of the
/// amplitude overtakes the exponential.
///
/// The equation also has a trivial root near t ≈ ε, so the bracket starts at
/// 8/Γ_eff, past the point where the log form turns over. The estimate is
/// only meaningful when the slow-amplitude condition holds
/// ([`ValidityReport::star_ok`](crate::params::ValidityReport)); that is left
/// to the caller so that trends can be followed across the boundary.
pub fn crossover_estimate(p: &AtomFieldParams) -> Result<f64> {
    let CutoffSpec::Exponential { eps } = p.cutoff else {
        return Err(Error::UnsupportedCutoff {
            operation: "crossover_estimate",
            cutoff: p.cutoff.kind_name(),
        });
    };
    let g = p.gamma() * (-p.nu * eps).exp();
    if !(g > 0.0) {
        return Err(Error::NoBracket { lo: eps, hi: f64::INFINITY });
    }
    let f = |t: f64| -0.5 * g * t - 4.0 * eps.ln() + 4.0 * t.ln();
    let (mut lo, mut hi) = (8.0 / g, 1e4 / g);
    if !(f(lo) > 0.0 && f(hi) < 0.0) {
        return Err(Error::NoBracket { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
