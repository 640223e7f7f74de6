//! The memory kernel K(τ) = ∫₀^∞ w(ω)e^{−iωτ}dω and its half-line transform.
//!
//! All kernels here are "D-stripped": the physical memory function is
//! M(τ) = D·K(τ)·e^{iντ}.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cutoff::CutoffSpec;
use crate::error::{Error, Result};
use crate::quad;
use crate::special::ei_scaled;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub tau: f64,
    pub value: Complex64,
}

/// 6/(τ − iε)⁴.
pub fn kernel_analytic(eps: f64, tau: f64) -> Result<Complex64> {
    if !(eps > 0.0) {
        return Err(Error::NonpositiveEps(eps));
    }
    Ok(exp_kernel(eps, tau))
}

#[inline]
pub(crate) fn exp_kernel(eps: f64, tau: f64) -> Complex64 {
    let z = Complex64::new(tau, -eps);
    let z2 = z * z;
    6.0 / (z2 * z2)
}

/// ∫₀^Ω ω³e^{−iωτ}dω from the exact antiderivative, switching to the power
/// series where the antiderivative cancels.
pub fn kernel_sharp(omega_max: f64, tau: f64) -> Complex64 {
    let theta = omega_max * tau;
    omega_max.powi(4) * unit_cube_moment(theta)
}

/// ∫₀¹ x³e^{−iθx}dx.
fn unit_cube_moment(theta: f64) -> Complex64 {
    if theta.abs() < 4.0 {
        cube_moment_series(theta)
    } else {
        cube_moment_closed(theta)
    }
}

fn cube_moment_series(theta: f64) -> Complex64 {
    // Σ (−iθ)^k / (k!(k+4)); for |θ| < 4 the terms drop below 1e-18 before k = 40
    let s = Complex64::new(0.0, -theta);
    let mut pow = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.25, 0.0);
    for k in 1..60 {
        pow = pow * s / k as f64;
        let term = pow / (k as f64 + 4.0);
        sum += term;
        if term.norm() < 1e-18 {
            break;
        }
    }
    sum
}

fn cube_moment_closed(theta: f64) -> Complex64 {
    let s = Complex64::new(0.0, -theta);
    let (s2, s3) = (s * s, s * s * s);
    let s4 = s2 * s2;
    s.exp() * (1.0 / s - 3.0 / s2 + 6.0 / s3 - 6.0 / s4) + 6.0 / s4
}

/// K(τ) for any integrable cutoff: closed form where one exists, quadrature
/// otherwise.
pub fn kernel(spec: &CutoffSpec, tau: f64) -> Result<Complex64> {
    match *spec {
        CutoffSpec::NoCutoff => Err(Error::DivergentKernel),
        CutoffSpec::Exponential { eps } => kernel_analytic(eps, tau),
        CutoffSpec::Sharp { omega_max } => Ok(kernel_sharp(omega_max, tau)),
        CutoffSpec::ApShape { .. } => kernel_quadrature(spec, tau, 1e-10),
    }
}

/// Smallest x (to a factor 2^{1/8}) with ∫_x^∞ w ≤ target.
fn tail_cut(spec: &CutoffSpec, start: f64, target: f64) -> f64 {
    let mut x = start.max(f64::MIN_POSITIVE);
    let tail = |x: f64| spec.upper_tail_weight(x).unwrap_or(f64::INFINITY);
    while tail(x) > target {
        x *= 2f64.powf(0.125);
        if !x.is_finite() {
            break;
        }
    }
    x
}

fn panel_edges(lo: f64, hi: f64, width: f64) -> Vec<f64> {
    let n = ((hi - lo) / width).ceil().max(1.0) as usize;
    (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

/// ∫₀^∞ w(ω)e^{−iωτ}dω by adaptive Gauss–Kronrod on half-period panels.
pub fn kernel_quadrature(spec: &CutoffSpec, tau: f64, tol: f64) -> Result<Complex64> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", format!("must be positive, got {tol}")));
    }
    spec.validate()?;
    let scale = match *spec {
        CutoffSpec::NoCutoff => return Err(Error::DivergentIntegral),
        CutoffSpec::Exponential { eps } | CutoffSpec::ApShape { eps, .. } => 1.0 / eps,
        CutoffSpec::Sharp { omega_max } => omega_max / 8.0,
    };
    let width = if tau == 0.0 { scale } else { scale.min(PI / tau.abs()) };
    let f = |w: f64| spec.weight_unchecked(w) * Complex64::from_polar(1.0, -w * tau);
    let max_pieces = |edges: &[f64]| 64 * edges.len() + 1000;

    if let CutoffSpec::Sharp { omega_max } = *spec {
        let edges = panel_edges(0.0, omega_max, width);
        return quad::integrate_panels(&f, &edges, 0.0, 0.5 * tol, max_pieces(&edges))
            .map(|(v, _)| v);
    }

    let total = spec.total_weight().ok_or(Error::DivergentIntegral)?;
    // rough pass fixes the magnitude, which sets how far out the tail matters
    let x1 = tail_cut(spec, scale, 1e-4 * total);
    let edges = panel_edges(0.0, x1, width);
    let (rough, _) = quad::integrate_panels(&f, &edges, 0.0, 1e-4, max_pieces(&edges))?;
    let x = tail_cut(spec, scale, 0.01 * tol * rough.norm());
    let edges = panel_edges(0.0, x, width);
    let (v, _) = quad::integrate_panels(&f, &edges, 0.0, 0.5 * tol, max_pieces(&edges))?;
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HalfLineMethod {
    Analytic,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfLineIntegral {
    pub real_part: f64,
    pub imag_part: f64,
    pub method: HalfLineMethod,
    /// −2/ε³, the small-εν limit of the imaginary part (exponential cutoff).
    pub leading_imag: Option<f64>,
}

impl HalfLineIntegral {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.real_part, self.imag_part)
    }
}

/// ∫₀^{t_upper} K(τ)e^{iντ}dτ, with `None` meaning t_upper = ∞.
pub fn halfline_integral(
    spec: &CutoffSpec,
    nu: f64,
    t_upper: Option<f64>,
    method: HalfLineMethod,
) -> Result<HalfLineIntegral> {
    spec.validate()?;
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::invalid("nu", format!("must be positive, got {nu}")));
    }
    if let Some(t) = t_upper {
        if !(t >= 0.0) {
            return Err(Error::invalid("t_upper", format!("must be non-negative, got {t}")));
        }
    }
    let leading_imag = match *spec {
        CutoffSpec::Exponential { eps } => Some(-2.0 / eps.powi(3)),
        _ => None,
    };
    let value = match (method, *spec) {
        (_, CutoffSpec::NoCutoff) => return Err(Error::DivergentIntegral),
        (HalfLineMethod::Analytic, CutoffSpec::Exponential { eps }) => match t_upper {
            None => exponential_closed_form(eps, nu),
            Some(t) => exponential_tau_integral(eps, nu, Some(t))?,
        },
        (HalfLineMethod::Analytic, other) => {
            return Err(Error::UnsupportedCutoff {
                operation: "analytic half-line integral",
                cutoff: other.kind_name(),
            })
        }
        (HalfLineMethod::Quadrature, CutoffSpec::Exponential { eps }) => {
            exponential_tau_integral(eps, nu, t_upper)?
        }
        (HalfLineMethod::Quadrature, CutoffSpec::Sharp { omega_max }) => match t_upper {
            None => frequency_route(spec, nu)?,
            Some(t) => tau_integral(&|tau| kernel_sharp(omega_max, tau), nu, t, 1.0 / omega_max)?,
        },
        (HalfLineMethod::Quadrature, CutoffSpec::ApShape { .. }) => match t_upper {
            None => frequency_route(spec, nu)?,
            Some(_) => {
                return Err(Error::UnsupportedCutoff {
                    operation: "finite-window half-line integral",
                    cutoff: spec.kind_name(),
                })
            }
        },
    };
    Ok(HalfLineIntegral {
        real_part: value.re,
        imag_part: value.im,
        method,
        leading_imag,
    })
}

/// πν³e^{−εν} + i[ν³e^{−εν}Ei(εν) − 2/ε³ − ν/ε² − ν²/ε].
fn exponential_closed_form(eps: f64, nu: f64) -> Complex64 {
    let x = eps * nu;
    let nu3 = nu * nu * nu;
    let re = PI * nu3 * (-x).exp();
    let im = nu3 * ei_scaled(x) - 2.0 / eps.powi(3) - nu / (eps * eps) - nu * nu / eps;
    Complex64::new(re, im)
}

/// τ-integral in the scaled variable u = τ/ε: ε⁻³∫₀^U 6e^{iενu}/(u − i)⁴du.
/// Real and imaginary parts are integrated separately so that the small
/// real part gets its own relative tolerance.
fn exponential_tau_integral(eps: f64, nu: f64, t_upper: Option<f64>) -> Result<Complex64> {
    let a = eps * nu;
    let g = |u: f64| {
        let z = Complex64::new(u, -1.0);
        let z2 = z * z;
        Complex64::from_polar(6.0, a * u) / (z2 * z2)
    };
    let re = |u: f64| Complex64::new(g(u).re, 0.0);
    let im = |u: f64| Complex64::new(g(u).im, 0.0);
    let half_period = PI / a;
    let tol = 1e-11;
    let part = |h: &dyn Fn(f64) -> Complex64| -> Result<f64> {
        match t_upper {
            Some(t) => {
                let edges = scaled_edges(t / eps, half_period);
                let n = edges.len();
                quad::integrate_panels(h, &edges, 1e-300, tol, 64 * n + 1000).map(|(v, _)| v.re)
            }
            None => {
                // grow U until the 2/U³ tail bound is negligible against the value
                let mut u_max = 64.0f64.max(4.0 * half_period);
                loop {
                    let edges = scaled_edges(u_max, half_period);
                    let n = edges.len();
                    let (v, _) = quad::integrate_panels(h, &edges, 1e-300, tol, 64 * n + 1000)?;
                    let bound = 2.0 / u_max.powi(3);
                    if bound <= 0.1 * tol * v.re.abs() || u_max > 1e9 {
                        return Ok(v.re);
                    }
                    u_max = (u_max * 4.0).max((20.0 / (tol * v.re.abs())).cbrt());
                }
            }
        }
    };
    let re_v = part(&re)?;
    let im_v = part(&im)?;
    Ok(Complex64::new(re_v, im_v) / eps.powi(3))
}

fn scaled_edges(u_max: f64, half_period: f64) -> Vec<f64> {
    let mut edges = vec![0.0];
    let mut x = 0.5f64.min(half_period);
    while x < u_max {
        edges.push(x);
        let step = x.min(half_period);
        x += step;
    }
    edges.push(u_max);
    edges
}

/// ∫₀^T k(τ)e^{iντ}dτ for a kernel given pointwise.
fn tau_integral(k: &dyn Fn(f64) -> Complex64, nu: f64, t: f64, width: f64) -> Result<Complex64> {
    let f = |tau: f64| k(tau) * Complex64::from_polar(1.0, nu * tau);
    let step = width.min(PI / nu);
    let edges = panel_edges(0.0, t, step);
    let n = edges.len();
    quad::integrate_panels(&f, &edges, 1e-300, 1e-11, 64 * n + 1000).map(|(v, _)| v)
}

/// πw(ν) + i·PV∫w(ω)/(ν − ω)dω, with the principal value taken by
/// subtracting w(ν) on the interval symmetric about ν.
fn frequency_route(spec: &CutoffSpec, nu: f64) -> Result<Complex64> {
    let wnu = spec.weight_unchecked(nu);
    let total = spec.total_weight().ok_or(Error::DivergentIntegral)?;
    let scale = spec.time_scale().map(|t| 1.0 / t).unwrap_or(nu);
    let mut breaks = vec![0.0, nu, 2.0 * nu];
    let hi = match *spec {
        CutoffSpec::Sharp { omega_max } => {
            breaks.push(omega_max);
            omega_max.max(2.0 * nu)
        }
        _ => tail_cut(spec, scale.max(2.0 * nu), 1e-15 * total).max(2.0 * nu),
    };
    breaks.push(hi);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut edges: Vec<f64> = Vec::new();
    for w in breaks.windows(2) {
        let piece = panel_edges(w[0], w[1], scale.min(nu));
        if edges.is_empty() {
            edges.extend(piece);
        } else {
            edges.extend(piece.into_iter().skip(1));
        }
    }
    let f = |w: f64| {
        let d = nu - w;
        let v = if w <= 2.0 * nu {
            if d == 0.0 {
                0.0
            } else {
                (spec.weight_unchecked(w) - wnu) / d
            }
        } else {
            spec.weight_unchecked(w) / d
        };
        Complex64::new(v, 0.0)
    };
    let n = edges.len();
    let (pv, _) = quad::integrate_panels(&f, &edges, 1e-14 * total / nu.max(1e-300), 1e-13, 64 * n + 1000)?;
    Ok(Complex64::new(PI * wnu, pv.re))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn analytic_examples() {
        let eps = 0.37;
        let k0 = kernel_analytic(eps, 0.0).unwrap();
        assert!(rel(k0, Complex64::new(6.0 / eps.powi(4), 0.0)) < 1e-15);
        assert!(k0.im.abs() < 1e-12 * k0.re);
        let k = kernel_analytic(1.0, 1.0).unwrap();
        assert!(rel(k, Complex64::new(-1.5, 0.0)) < 1e-15);
    }

    #[test]
    fn nonpositive_eps() {
        assert_eq!(kernel_analytic(0.0, 1.0), Err(Error::NonpositiveEps(0.0)));
        assert_eq!(kernel_analytic(-0.1, 1.0), Err(Error::NonpositiveEps(-0.1)));
    }

    #[test]
    fn analytic_times_denominator_is_six() {
        for &eps in &[0.01, 0.3, 2.0] {
            for &tau in &[-5.0, 0.0, 0.1, 3.0, 100.0] {
                let z = Complex64::new(tau, -eps);
                let v = kernel_analytic(eps, tau).unwrap() * z.powi(4);
                assert!((v - 6.0).norm() < 6e-12);
            }
        }
    }

    #[test]
    fn conjugate_symmetry() {
        for &tau in &[0.05, 0.7, 4.0] {
            let a = kernel_analytic(0.2, -tau).unwrap();
            let b = kernel_analytic(0.2, tau).unwrap().conj();
            assert!(rel(a, b) < 1e-15);
        }
    }

    #[test]
    fn sharp_values() {
        let cases = [
            (2.0, 0.0, Complex64::new(4.0, 0.0)),
            (2.0, 0.3, Complex64::new(3.530_696_873_528_781_6, -1.838_858_240_836_716)),
            (2.0, 1e-4, Complex64::new(3.999_999_946_666_666_7, -0.000_639_999_996_952_381)),
            (5.0, 3.0, Complex64::new(20.172_399_274_241_698, -36.180_461_219_831_344)),
        ];
        for (om, tau, want) in cases {
            let got = kernel_sharp(om, tau);
            assert!(rel(got, want) < 1e-14, "({om},{tau}): {got}");
        }
    }

    #[test]
    fn sharp_branches_agree_at_switch() {
        for &theta in &[2.5, 3.0, 4.0, 5.0] {
            let a = cube_moment_series(theta);
            let b = cube_moment_closed(theta);
            assert!((a - b).norm() < 1e-13, "{theta}: {a} {b}");
        }
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        let spec = CutoffSpec::exponential(0.1).unwrap();
        let q = kernel_quadrature(&spec, 1.0, 1e-10).unwrap();
        assert!(rel(q, kernel_analytic(0.1, 1.0).unwrap()) < 1e-8);
        let sharp = CutoffSpec::sharp(3.0).unwrap();
        let q = kernel_quadrature(&sharp, 0.0, 1e-12).unwrap();
        assert!((q - Complex64::new(81.0 / 4.0, 0.0)).norm() < 1e-10);
        let q = kernel_quadrature(&sharp, 2.5, 1e-12).unwrap();
        assert!(rel(q, kernel_sharp(3.0, 2.5)) < 1e-10);
    }

    #[test]
    fn quadrature_rejects_no_cutoff() {
        assert_eq!(
            kernel_quadrature(&CutoffSpec::NoCutoff, 1.0, 1e-8),
            Err(Error::DivergentIntegral)
        );
        assert_eq!(kernel(&CutoffSpec::NoCutoff, 1.0), Err(Error::DivergentKernel));
    }

    #[test]
    fn halfline_closed_form_values() {
        // imag·ε³ and real·ε³ depend on εν only
        let cases = [
            (0.3, -2.396_054_003_955_311, 0.062_838_425_152_956_96),
            (0.1, -2.111_468_381_756_547_6, 0.002_842_630_585_194_927_7),
            (0.01, -2.010_103_977_950_399_3, 3.110_333_284_394_183e-6),
            (0.001, -2.001_001_006_323_213, 3.138_452_631_209_062e-9),
        ];
        for (x, im, re) in cases {
            let spec = CutoffSpec::exponential(x).unwrap();
            let h = halfline_integral(&spec, 1.0, None, HalfLineMethod::Analytic).unwrap();
            let e3 = x.powi(3);
            assert!(((h.imag_part * e3 - im) / im).abs() < 1e-12, "{x}: {}", h.imag_part * e3);
            assert!(((h.real_part * e3 - re) / re).abs() < 1e-13);
            assert!((h.leading_imag.unwrap() * e3 + 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn halfline_quadrature_matches_closed_form() {
        for &x in &[0.3, 0.1, 0.01] {
            let spec = CutoffSpec::exponential(x).unwrap();
            let a = halfline_integral(&spec, 1.0, None, HalfLineMethod::Analytic).unwrap();
            let q = halfline_integral(&spec, 1.0, None, HalfLineMethod::Quadrature).unwrap();
            assert!(((q.real_part - a.real_part) / a.real_part).abs() < 1e-7, "{x}");
            assert!(((q.imag_part - a.imag_part) / a.imag_part).abs() < 1e-9, "{x}");
        }
    }

    #[test]
    fn analytic_route_needs_exponential() {
        let r = halfline_integral(&CutoffSpec::sharp(4.0).unwrap(), 1.0, None, HalfLineMethod::Analytic);
        assert!(matches!(r, Err(Error::UnsupportedCutoff { .. })));
    }

    #[test]
    fn frequency_route_reproduces_exponential() {
        let spec = CutoffSpec::exponential(0.3).unwrap();
        let a = exponential_closed_form(0.3, 1.0);
        let f = frequency_route(&spec, 1.0).unwrap();
        assert!(rel(f, a) < 1e-10, "{f} vs {a}");
    }

    #[test]
    fn sharp_halfline_routes_agree() {
        // finite-window τ route converges to the frequency route
        let spec = CutoffSpec::sharp(6.0).unwrap();
        let f = halfline_integral(&spec, 1.0, None, HalfLineMethod::Quadrature).unwrap();
        // PV∫₀^Ω ω³/(1−ω) = −(Ω³/3 + Ω²/2 + Ω) − ln(Ω − 1)
        let pv = -(72.0 + 18.0 + 6.0) - 5f64.ln();
        assert!((f.imag_part - pv).abs() < 1e-10 * pv.abs());
        assert!((f.real_part - PI).abs() < 1e-14);
    }
}
