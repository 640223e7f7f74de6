//! Time-domain solver for ċ(t) = −∫₀ᵗ M(t − t')c(t')dt', M(τ) = D·K(τ)·e^{iντ}.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cutoff::CutoffSpec;
use crate::error::{Error, Result};
use crate::kernel::{exp_kernel, kernel_sharp};
use crate::params::AtomFieldParams;
use crate::soe::ExpSum;

/// How much of the past the convolution sees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum History {
    Full,
    /// Drop lags beyond `t_mem`; the neglected tail is bounded and checked.
    Truncated { t_mem: f64 },
    /// Exact lags up to `t_mem`, a sum-of-exponentials fit beyond it.
    /// Exponential cutoff and trapezoid scheme only.
    Compressed { t_mem: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    TrapezoidProduct,
    Rk4Volterra,
}

impl Scheme {
    pub fn nominal_order(&self) -> f64 {
        match self {
            Scheme::TrapezoidProduct => 2.0,
            Scheme::Rk4Volterra => 4.0,
        }
    }
}

fn default_stride() -> usize {
    1
}

fn default_max_steps() -> usize {
    200_000
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub history: History,
    #[serde(default)]
    pub scheme: Scheme,
    /// Keep every `stride`-th step in the trace.
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// Upper limit on steps for full-history runs, whose cost is quadratic.
    #[serde(default = "default_max_steps")]
    pub max_full_steps: usize,
}

impl SolverConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        SolverConfig {
            dt,
            t_end,
            history: History::Full,
            scheme: Scheme::TrapezoidProduct,
            stride: 1,
            max_full_steps: default_max_steps(),
        }
    }

    pub fn with_history(mut self, history: History) -> Self {
        self.history = history;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeTrace {
    pub times: Vec<f64>,
    pub c_e: Vec<Complex64>,
    pub norm_sq: Vec<f64>,
    /// Width of the memory kernel; fits must start at least ten widths in.
    pub kernel_time_scale: Option<f64>,
}

impl AmplitudeTrace {
    pub fn new(kernel_time_scale: Option<f64>) -> Self {
        AmplitudeTrace {
            times: Vec::new(),
            c_e: Vec::new(),
            norm_sq: Vec::new(),
            kernel_time_scale,
        }
    }

    pub fn push(&mut self, t: f64, c: Complex64) {
        self.times.push(t);
        self.c_e.push(c);
        self.norm_sq.push(c.norm_sqr());
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Earliest admissible fit start, 10× the kernel width.
    pub fn min_fit_start(&self) -> f64 {
        10.0 * self.kernel_time_scale.unwrap_or(0.0)
    }

    /// |c_e|² at `t`, linearly interpolated between samples.
    pub fn norm_sq_at(&self, t: f64) -> Option<f64> {
        let n = self.times.len();
        if n == 0 || t < self.times[0] || t > self.times[n - 1] {
            return None;
        }
        let i = self.times.partition_point(|&x| x <= t);
        if i == 0 {
            return Some(self.norm_sq[0]);
        }
        if i >= n {
            return Some(self.norm_sq[n - 1]);
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let w = (t - t0) / (t1 - t0);
        Some(self.norm_sq[i - 1] * (1.0 - w) + self.norm_sq[i] * w)
    }
}

/// Tabulates D·K(τ)e^{iντ}.
struct Memory {
    d: f64,
    nu: f64,
    cutoff: CutoffSpec,
}

impl Memory {
    fn at(&self, tau: f64) -> Complex64 {
        let k = match self.cutoff {
            CutoffSpec::Exponential { eps } => exp_kernel(eps, tau),
            CutoffSpec::Sharp { omega_max } => kernel_sharp(omega_max, tau),
            _ => unreachable!("validated before tabulation"),
        };
        self.d * k * Complex64::from_polar(1.0, self.nu * tau)
    }

    fn table(&self, step: f64, count: usize) -> Vec<Complex64> {
        (0..count).into_par_iter().map(|k| self.at(k as f64 * step)).collect()
    }
}

/// Bound on ∫_{t_mem}^∞ |M(τ)|dτ, when the kernel tail is absolutely integrable.
pub fn memory_tail_bound(p: &AtomFieldParams, t_mem: f64) -> Option<f64> {
    match p.cutoff {
        // |6/(τ−iε)⁴| ≤ 6/τ⁴
        CutoffSpec::Exponential { .. } => Some(2.0 * p.d / t_mem.powi(3)),
        _ => None,
    }
}

fn check(p: &AtomFieldParams, cfg: &SolverConfig) -> Result<usize> {
    p.validate()?;
    let width = match p.cutoff {
        CutoffSpec::NoCutoff => return Err(Error::DivergentKernel),
        CutoffSpec::ApShape { .. } => {
            return Err(Error::UnsupportedCutoff {
                operation: "volterra solve",
                cutoff: "ap-shape",
            })
        }
        CutoffSpec::Exponential { eps } => eps,
        CutoffSpec::Sharp { omega_max } => 1.0 / omega_max,
    };
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(Error::invalid("dt", format!("must be positive, got {}", cfg.dt)));
    }
    if !(cfg.t_end > 0.0 && cfg.t_end.is_finite()) {
        return Err(Error::invalid("t_end", format!("must be positive, got {}", cfg.t_end)));
    }
    if cfg.stride == 0 {
        return Err(Error::invalid("stride", "must be at least 1"));
    }
    let limit = width / 10.0;
    if cfg.dt > limit * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { dt: cfg.dt, limit });
    }
    let steps = cfg.steps().max(1);
    match cfg.history {
        History::Full => {
            if steps > cfg.max_full_steps {
                return Err(Error::StepBudgetExceeded {
                    steps,
                    budget: cfg.max_full_steps,
                });
            }
        }
        History::Truncated { t_mem } | History::Compressed { t_mem } => {
            if !(t_mem >= 20.0 * width) {
                return Err(Error::MemoryTooShort {
                    t_mem,
                    reason: format!("must cover at least 20 kernel widths ({})", 20.0 * width),
                });
            }
            let exact_tail = matches!(cfg.history, History::Compressed { .. });
            if exact_tail {
                if !matches!(p.cutoff, CutoffSpec::Exponential { .. }) {
                    return Err(Error::UnsupportedCutoff {
                        operation: "compressed history",
                        cutoff: p.cutoff.kind_name(),
                    });
                }
                if cfg.scheme != Scheme::TrapezoidProduct {
                    return Err(Error::invalid(
                        "history",
                        "compressed history is implemented for the trapezoid scheme only",
                    ));
                }
            } else {
                let Some(bound) = memory_tail_bound(p, t_mem) else {
                    return Err(Error::MemoryTooShort {
                        t_mem,
                        reason: "kernel tail is not absolutely integrable".into(),
                    });
                };
                let gamma_eff = match p.cutoff {
                    CutoffSpec::Exponential { eps } => p.gamma() * (-p.nu * eps).exp(),
                    _ => p.gamma(),
                };
                if bound > 1e-3 * gamma_eff {
                    return Err(Error::MemoryTooShort {
                        t_mem,
                        reason: format!(
                            "neglected tail {bound:.3e} exceeds 1e-3 of the decay rate {gamma_eff:.3e}"
                        ),
                    });
                }
            }
        }
    }
    Ok(steps)
}

/// Integrates the amplitude equation from c(0) = 1.
pub fn solve(p: &AtomFieldParams, cfg: &SolverConfig) -> Result<AmplitudeTrace> {
    let steps = check(p, cfg)?;
    let mem = Memory {
        d: p.d,
        nu: p.nu,
        cutoff: p.cutoff,
    };
    let mut trace = AmplitudeTrace::new(p.cutoff.time_scale());
    match cfg.scheme {
        Scheme::TrapezoidProduct => trapezoid(&mem, cfg, steps, &mut trace),
        Scheme::Rk4Volterra => rk4(&mem, cfg, steps, &mut trace),
    }
    Ok(trace)
}

fn window_steps(history: History, dt: f64, steps: usize) -> usize {
    match history {
        History::Full => steps,
        History::Truncated { t_mem } | History::Compressed { t_mem } => {
            ((t_mem / dt).round() as usize).clamp(1, steps.max(1))
        }
    }
}

fn trapezoid(mem: &Memory, cfg: &SolverConfig, steps: usize, trace: &mut AmplitudeTrace) {
    let dt = cfg.dt;
    let window = window_steps(cfg.history, dt, steps);
    let m_tab = mem.table(dt, window + 1);
    let m0 = m_tab[0];
    let denom = 1.0 + 0.25 * dt * dt * m0;

    let far = match cfg.history {
        History::Compressed { .. } if window < steps => Some(ExpSum::for_exponential_cutoff(
            mem.d,
            mem.nu,
            match mem.cutoff {
                CutoffSpec::Exponential { eps } => eps,
                _ => unreachable!(),
            },
            window as f64 * dt,
            (steps as f64 + 1.0) * dt,
        )),
        _ => None,
    };

    // far-field state per exponential: interior sum, e^{λ m dt}, step factors
    let (mut interior, mut decay_m, step_fac, lag_fac, lag1_fac) = match &far {
        Some(fit) => {
            let n = fit.len();
            let step: Vec<Complex64> = fit.rates.iter().map(|l| (l * dt).exp()).collect();
            let lag: Vec<Complex64> = fit.rates.iter().map(|l| (l * (window as f64 * dt)).exp()).collect();
            let lag1: Vec<Complex64> = fit
                .rates
                .iter()
                .map(|l| (l * ((window + 1) as f64 * dt)).exp())
                .collect();
            (vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(1.0, 0.0); n], step, lag, lag1)
        }
        None => (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new()),
    };

    let mut c = Vec::with_capacity(steps + 1);
    c.push(Complex64::new(1.0, 0.0));
    let mut cdot = Complex64::new(0.0, 0.0);
    trace.push(0.0, c[0]);

    for m in 1..=steps {
        let reach = m.min(window);
        // near field: lags 1..reach, half weight at the far end
        let mut s = Complex64::new(0.0, 0.0);
        for k in 1..reach {
            s += m_tab[k] * c[m - k];
        }
        s += 0.5 * m_tab[reach] * c[m - reach];
        if let Some(fit) = &far {
            for k in 0..fit.len() {
                decay_m[k] *= step_fac[k];
            }
            if m > window {
                if m > window + 1 {
                    let j = m - window - 1;
                    for k in 0..fit.len() {
                        interior[k] = interior[k] * step_fac[k] + lag1_fac[k] * c[j];
                    }
                }
                // ½ at lag `window` (the near field holds the other half), ½ at lag m
                let lag_w = c[m - window];
                let mut tail = Complex64::new(0.0, 0.0);
                for k in 0..fit.len() {
                    let g = interior[k] + 0.5 * decay_m[k] * c[0] + 0.5 * lag_fac[k] * lag_w;
                    tail += fit.amps[k] * g;
                }
                s += tail;
            }
        }
        s *= dt;
        let predictor = c[m - 1] + 0.5 * dt * (cdot - s);
        let cm = predictor / denom;
        cdot = -(s + 0.5 * dt * m0 * cm);
        c.push(cm);
        if m % cfg.stride == 0 || m == steps {
            trace.push(m as f64 * dt, cm);
        }
    }
}

const RK_A: [[f64; 3]; 4] = [[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 1.0]];
const RK_B: [f64; 4] = [1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0];
/// Stage abscissae in half steps.
const RK_C2: [i64; 4] = [0, 1, 1, 2];

/// Pouzet-type Runge–Kutta: stage values of every past step are stored and
/// the history integral uses the same RK quadrature.
fn rk4(mem: &Memory, cfg: &SolverConfig, steps: usize, trace: &mut AmplitudeTrace) {
    let h = cfg.dt;
    let window = window_steps(cfg.history, h, steps);
    // lags in half steps: up to 2·window + 2
    let m_half = mem.table(0.5 * h, 2 * window + 4);
    let mut stages: Vec<[Complex64; 4]> = Vec::with_capacity(steps);
    let mut y = Complex64::new(1.0, 0.0);
    trace.push(0.0, y);
    for n in 0..steps {
        let first = n.saturating_sub(window);
        let mut ys = [Complex64::new(0.0, 0.0); 4];
        let mut ks = [Complex64::new(0.0, 0.0); 4];
        for i in 0..4 {
            let mut yi = y;
            for j in 0..i {
                yi += h * RK_A[i][j] * ks[j];
            }
            ys[i] = yi;
            let mut z = Complex64::new(0.0, 0.0);
            for j in 0..4 {
                let shift = RK_C2[i] - RK_C2[j];
                let mut acc = Complex64::new(0.0, 0.0);
                for (m, st) in stages.iter().enumerate().skip(first) {
                    let lag = 2 * (n - m) as i64 + shift;
                    acc += m_half[lag as usize] * st[j];
                }
                z += h * RK_B[j] * acc;
            }
            for j in 0..i {
                let lag = (RK_C2[i] - RK_C2[j]) as usize;
                z += h * RK_A[i][j] * m_half[lag] * ys[j];
            }
            ks[i] = -z;
        }
        stages.push(ys);
        y += h * (RK_B[0] * ks[0] + RK_B[1] * ks[1] + RK_B[2] * ks[2] + RK_B[3] * ks[3]);
        let m = n + 1;
        if m % cfg.stride == 0 || m == steps {
            trace.push(m as f64 * h, y);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub dt: f64,
    /// max |c(dt) − c(dt/2)| on the coarsest grid.
    pub error: f64,
}

/// Runs at dt, dt/2, …, dt/2^refinements and compares successive levels on
/// the coarse grid.
pub fn convergence_study(
    p: &AtomFieldParams,
    cfg: &SolverConfig,
    refinements: usize,
) -> Result<Vec<ConvergencePoint>> {
    if refinements < 2 {
        return Err(Error::invalid("refinements", "need at least 2"));
    }
    let base = SolverConfig { stride: 1, ..*cfg };
    check(p, &base)?;
    let runs: Vec<Result<AmplitudeTrace>> = (0..=refinements)
        .into_par_iter()
        .map(|k| {
            let factor = 1usize << k;
            let c = SolverConfig {
                dt: cfg.dt / factor as f64,
                stride: factor,
                max_full_steps: cfg.max_full_steps.max(base.steps() * factor),
                ..base
            };
            solve(p, &c)
        })
        .collect();
    let runs: Vec<AmplitudeTrace> = runs.into_iter().collect::<Result<_>>()?;
    Ok(runs
        .windows(2)
        .enumerate()
        .map(|(k, pair)| {
            let error = pair[0]
                .c_e
                .iter()
                .zip(&pair[1].c_e)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            ConvergencePoint {
                dt: cfg.dt / (1usize << k) as f64,
                error,
            }
        })
        .collect())
}

/// log₂ of successive error ratios.
pub fn observed_orders(points: &[ConvergencePoint]) -> Vec<f64> {
    points
        .windows(2)
        .map(|w| (w[0].error / w[1].error).log2() / (w[0].dt / w[1].dt).log2())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scaled() -> AtomFieldParams {
        AtomFieldParams::scaled(1.0, 1e-3, 0.3).unwrap()
    }

    #[test]
    fn uncoupled_atom_stays_excited() {
        let p = scaled().with_coupling(0.0);
        for scheme in [Scheme::TrapezoidProduct, Scheme::Rk4Volterra] {
            let tr = solve(&p, &SolverConfig::new(0.03, 5.0).with_scheme(scheme)).unwrap();
            assert!(tr.c_e.iter().all(|c| *c == Complex64::new(1.0, 0.0)));
        }
    }

    #[test]
    fn rejects_missing_cutoff_and_coarse_steps() {
        let p = scaled().with_cutoff(CutoffSpec::NoCutoff);
        assert_eq!(solve(&p, &SolverConfig::new(0.01, 1.0)), Err(Error::DivergentKernel));
        let r = solve(&scaled(), &SolverConfig::new(0.031, 1.0));
        assert!(matches!(r, Err(Error::StepTooLarge { .. })));
        let r = solve(&scaled(), &SolverConfig::new(0.03, 100.0).with_history(History::Truncated { t_mem: 5.0 }));
        assert!(matches!(r, Err(Error::MemoryTooShort { .. })));
        let r = solve(&scaled(), &SolverConfig::new(0.03, 1e4));
        assert!(matches!(r, Err(Error::StepBudgetExceeded { .. })));
    }

    #[test]
    fn truncation_tail_bound_is_enforced() {
        // 20ε = 6 passes the width rule but not the tail bound at this coupling
        let p = scaled();
        let r = solve(&p, &SolverConfig::new(0.03, 50.0).with_history(History::Truncated { t_mem: 6.0 }));
        assert!(matches!(r, Err(Error::MemoryTooShort { .. })));
        assert!(solve(&p, &SolverConfig::new(0.03, 50.0).with_history(History::Truncated { t_mem: 10.0 })).is_ok());
    }

    #[test]
    fn deterministic() {
        let cfg = SolverConfig::new(0.03, 20.0);
        assert_eq!(solve(&scaled(), &cfg).unwrap(), solve(&scaled(), &cfg).unwrap());
    }

    #[test]
    fn truncated_and_compressed_match_full() {
        let p = scaled();
        let full = solve(&p, &SolverConfig::new(0.03, 150.0)).unwrap();
        let trunc = solve(&p, &SolverConfig::new(0.03, 150.0).with_history(History::Truncated { t_mem: 15.0 })).unwrap();
        let comp = solve(&p, &SolverConfig::new(0.03, 150.0).with_history(History::Compressed { t_mem: 15.0 })).unwrap();
        let diff = |a: &AmplitudeTrace| {
            a.c_e.iter().zip(&full.c_e).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
        };
        // neglected tail integrates to at most 2D/t_mem³ per unit time
        let bound = memory_tail_bound(&p, 15.0).unwrap() * 150.0;
        assert!(diff(&trunc) < bound, "{} vs {bound}", diff(&trunc));
        assert!(diff(&comp) < 1e-10, "{}", diff(&comp));
    }

    #[test]
    fn stride_subsamples() {
        let tr = solve(&scaled(), &SolverConfig::new(0.03, 3.0).with_stride(10)).unwrap();
        assert_eq!(tr.len(), 11);
        assert!((tr.times[10] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn norm_interpolation() {
        let mut tr = AmplitudeTrace::new(None);
        tr.push(0.0, Complex64::new(1.0, 0.0));
        tr.push(1.0, Complex64::new(0.0, 0.0));
        assert_eq!(tr.norm_sq_at(0.25), Some(0.75));
        assert_eq!(tr.norm_sq_at(2.0), None);
    }
}
