//! Gauss–Kronrod and Gauss–Legendre rules for complex-valued integrands.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// 21-point Kronrod estimate on [a, b] and |K21 − G10| as its error.
pub fn gk21<F>(f: &F, a: f64, b: f64) -> (Complex64, f64)
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let half = 0.5 * (b - a);
    let center = 0.5 * (a + b);
    let fc = f(center);
    let mut kron = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    for j in 0..10 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    let est = kron * half;
    let err = ((kron - gauss) * half).norm();
    (est, err)
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    est: Complex64,
    err: f64,
}

/// Global adaptive Gauss–Kronrod over a set of initial panels.
///
/// Stops once the summed error estimate is below
/// `max(abs_tol, rel_tol·|I|)`. Returns the estimate and its error bound.
pub fn integrate_panels<F>(
    f: &F,
    edges: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_pieces: usize,
) -> Result<(Complex64, f64)>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let mut pieces: Vec<Piece> = edges
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (est, err) = gk21(f, w[0], w[1]);
            Piece { a: w[0], b: w[1], est, err }
        })
        .collect();
    loop {
        // Kahan-free sum is fine here: pieces are few thousand at most.
        let total: Complex64 = pieces.iter().map(|p| p.est).sum();
        let err: f64 = pieces.iter().map(|p| p.err).sum();
        let target = abs_tol.max(rel_tol * total.norm());
        if err <= target {
            return Ok((total, err));
        }
        if pieces.len() >= max_pieces {
            return Err(Error::ToleranceNotMet { estimate: err, target });
        }
        // split the worst few pieces at once to keep the loop short
        let mut order: Vec<usize> = (0..pieces.len()).collect();
        order.sort_by(|&i, &j| pieces[j].err.total_cmp(&pieces[i].err));
        let n_split = (pieces.len() / 8).max(1);
        let mut fresh = Vec::with_capacity(2 * n_split);
        let mut stalled = true;
        for &i in order.iter().take(n_split) {
            let p = pieces[i];
            let mid = 0.5 * (p.a + p.b);
            if !(mid > p.a && mid < p.b) {
                continue;
            }
            let (e1, r1) = gk21(f, p.a, mid);
            let (e2, r2) = gk21(f, mid, p.b);
            if r1 + r2 < p.err {
                stalled = false;
            }
            fresh.push((i, Piece { a: p.a, b: mid, est: e1, err: r1 }));
            fresh.push((usize::MAX, Piece { a: mid, b: p.b, est: e2, err: r2 }));
        }
        if fresh.is_empty() || (stalled && err < 1e3 * f64::EPSILON * total.norm().max(abs_tol)) {
            return Err(Error::ToleranceNotMet { estimate: err, target });
        }
        for (i, p) in fresh {
            if i == usize::MAX {
                pieces.push(p);
            } else {
                pieces[i] = p;
            }
        }
    }
}

/// Adaptive integral over a single interval.
pub fn integrate<F>(f: &F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<(Complex64, f64)>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    integrate_panels(f, &[a, b], abs_tol, rel_tol, 20_000)
}

/// Same as [`integrate`] for a real integrand.
pub fn integrate_real<F>(f: &F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    let g = |x: f64| Complex64::new(f(x), 0.0);
    integrate(&g, a, b, abs_tol, rel_tol).map(|(v, e)| (v.re, e))
}

/// n-point Gauss–Legendre nodes (ascending) and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_legendre needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        // Tricomi's initial guess, then Newton on P_n.
        let k = (i + 1) as f64;
        let theta = std::f64::consts::PI * (4.0 * k - 1.0) / (4.0 * nf + 2.0);
        let mut z = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let step = p / d;
            z -= step;
            if step.abs() <= 1e-16 * z.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk21_integrates_polynomials_exactly() {
        let f = |x: f64| Complex64::new(x.powi(20), -x.powi(7));
        let (v, _) = gk21(&f, -1.0, 2.0);
        let re = (2f64.powi(21) + 1.0) / 21.0;
        let im = -(2f64.powi(8) - 1.0) / 8.0;
        assert!((v.re - re).abs() < 1e-10 * re);
        assert!((v.im - im).abs() < 1e-12 * im.abs());
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let f = |x: f64| Complex64::from_polar(1.0, 40.0 * x);
        let (v, _) = integrate(&f, 0.0, 3.0, 1e-13, 1e-13).unwrap();
        let exact = (Complex64::from_polar(1.0, 120.0) - 1.0) / Complex64::new(0.0, 40.0);
        assert!((v - exact).norm() < 1e-12);
    }

    #[test]
    fn stall_is_reported() {
        let f = |x: f64| Complex64::new(1.0 / x.abs().sqrt().max(1e-300), 0.0);
        let r = integrate_panels(&f, &[-1.0, 1.0], 0.0, 1e-15, 50);
        assert!(matches!(r, Err(Error::ToleranceNotMet { .. })));
    }

    #[test]
    fn gauss_legendre_small_rules() {
        let (x, w) = gauss_legendre(2);
        let r = 1.0 / 3f64.sqrt();
        assert!((x[0] + r).abs() < 1e-15 && (x[1] - r).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15 && (w[1] - 1.0).abs() < 1e-15);
        let (x, w) = gauss_legendre(3);
        assert_eq!(x[1], 0.0);
        assert!((w[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_large_rule_is_exact() {
        for n in [7usize, 64, 501] {
            let (x, w) = gauss_legendre(n);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            let sum: f64 = w.iter().sum();
            assert!((sum - 2.0).abs() < 1e-13, "n={n}: {sum}");
            let deg = 2 * n - 2;
            let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((m - 2.0 / (deg as f64 + 1.0)).abs() < 1e-13);
        }
    }
}
