use num_complex::Complex64;
use proptest::prelude::*;
use wwlab::markov::{fit_exponential, markov_summary};
use wwlab::modes::{discretize, max_detuning, solve_modes, solve_modes_strided};
use wwlab::volterra::{solve, AmplitudeTrace, History, Scheme, SolverConfig};
use wwlab::{AtomFieldParams, CutoffSpec};

#[test]
fn weak_coupling_approaches_pole_approximation() {
    let p = AtomFieldParams::scaled(1.0, 1e-5, 0.3).unwrap();
    let m = markov_summary(&p).unwrap();
    let cfg = SolverConfig::new(0.03, 1.0 / m.gamma_eff)
        .with_history(History::Compressed { t_mem: 30.0 })
        .with_stride(10);
    let trace = solve(&p, &cfg).unwrap();
    let fit = fit_exponential(&trace, (trace.min_fit_start(), *trace.times.last().unwrap())).unwrap();
    assert!((fit.gamma_fit / m.gamma_eff - 1.0).abs() < 0.01, "{fit:?}");
    assert!((fit.shift_fit / m.shift - 1.0).abs() < 0.02, "{fit:?} {m:?}");
    // population tracks the pole approximation over [10ε, 1/Γ_eff]
    let worst = trace
        .times
        .iter()
        .zip(&trace.norm_sq)
        .filter(|(t, _)| **t >= 3.0)
        .map(|(t, n)| (n - (-m.gamma_eff * t).exp()).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 0.05, "{worst}");
}

#[test]
fn cutoff_families_agree_near_resonance() {
    for eps in [0.05, 0.1] {
        let exp = AtomFieldParams::scaled(1.0, 1e-3, eps).unwrap();
        let ap = exp.with_cutoff(CutoffSpec::ap_shape(eps, 1.0).unwrap());
        let a = markov_summary(&exp).unwrap().gamma_eff;
        let b = markov_summary(&ap).unwrap().gamma_eff;
        assert!((a / b - 1.0).abs() < 0.1, "eps {eps}: {a} vs {b}");
    }
}

/// At D = 1e-3 the line sits at ν − shift, where the spectral weight is
/// smaller; the rate at the shifted line accounts for most of the deficit.
#[test]
fn scaled_regime_rate_follows_shifted_line() {
    let p = AtomFieldParams::scaled(1.0, 1e-3, 0.3).unwrap();
    let m = markov_summary(&p).unwrap();
    let cfg = SolverConfig::new(0.03, 1.0 / m.gamma_eff).with_history(History::Truncated { t_mem: 30.0 });
    let trace = solve(&p, &cfg).unwrap();
    let fit = fit_exponential(&trace, (trace.min_fit_start(), *trace.times.last().unwrap())).unwrap();
    let line = p.nu - fit.shift_fit;
    let predicted = line.powi(3) * (-0.3 * line).exp() / (-0.3f64).exp();
    let measured = fit.gamma_fit / m.gamma_eff;
    assert!(measured < 0.8, "{measured}");
    assert!((measured / predicted - 1.0).abs() < 0.03, "{measured} vs {predicted}");
}

#[test]
fn modes_follow_volterra_on_short_horizon() {
    let p = AtomFieldParams::scaled(1.0, 1e-3, 0.3).unwrap();
    let reference = solve(
        &p,
        &SolverConfig::new(0.015, 60.0).with_scheme(Scheme::Rk4Volterra),
    )
    .unwrap();
    let m = discretize(&p, 800, (0.0, 101.0)).unwrap();
    let run = solve_modes_strided(&p, &m, 60.0, 0.1 / max_detuning(&p, &m), 4).unwrap();
    let err = reference
        .times
        .iter()
        .filter_map(|&t| Some((run.trace.norm_sq_at(t)? - reference.norm_sq_at(t)?).abs()))
        .fold(0.0, f64::max);
    assert!(err < 1e-3, "{err}");
}

#[test]
fn sharp_cutoff_full_history_decays() {
    let p = AtomFieldParams::new(1.0, 1e-3, CutoffSpec::sharp(4.0).unwrap(), Default::default()).unwrap();
    let tr = solve(&p, &SolverConfig::new(0.025, 100.0)).unwrap();
    let last = *tr.norm_sq.last().unwrap();
    assert!(last < 1.0 && last > 0.0);
}

fn synthetic(gamma: f64, shift: f64, t_end: f64, dt: f64) -> AmplitudeTrace {
    let mut tr = AmplitudeTrace::new(Some(0.1));
    let n = (t_end / dt) as usize;
    for k in 0..=n {
        let t = k as f64 * dt;
        tr.push(t, Complex64::from_polar((-0.5 * gamma * t).exp(), shift * t));
    }
    tr
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn trapezoid_never_gains_population(d in 1e-4f64..3e-3, eps in 0.25f64..1.0) {
        let p = AtomFieldParams::scaled(1.0, d, eps).unwrap();
        let tr = solve(&p, &SolverConfig::new(eps / 10.0, 40.0)).unwrap();
        prop_assert!(tr.norm_sq.iter().all(|n| *n <= 1.0 + 1e-6));
    }

    #[test]
    fn mode_solver_conserves_norm(n in 20usize..300, d in 1e-4f64..3e-3) {
        let p = AtomFieldParams::scaled(1.0, d, 0.3).unwrap();
        let m = discretize(&p, n, (0.0, 101.0)).unwrap();
        let run = solve_modes(&p, &m, 50.0, 0.1 / max_detuning(&p, &m)).unwrap();
        prop_assert!(run.max_norm_drift < 1e-8);
        prop_assert!((run.state.norm_sq() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn fit_recovers_synthetic_decay(gamma in 1e-3f64..0.1, shift in -0.5f64..0.5) {
        let tr = synthetic(gamma, shift, 2.0 / gamma, 0.05);
        let end = *tr.times.last().unwrap();
        let fit = fit_exponential(&tr, (1.0, end)).unwrap();
        prop_assert!((fit.gamma_fit / gamma - 1.0).abs() < 1e-9);
        prop_assert!((fit.shift_fit - shift).abs() < 1e-9);
    }
}

#[test]
fn hydrogen_span_needs_the_exponential_tail() {
    let (p, _) = wwlab::params::hydrogen_preset().to_dimensionless();
    match discretize(&p, 500, (0.0, 400.0)) {
        Err(wwlab::Error::SpanTooSmall { tail_fraction, .. }) => {
            // Γ(4, 10.94)/Γ(4) for εν = 30α/8
            assert!((tail_fraction / 5.3e-3 - 1.0).abs() < 0.05, "{tail_fraction}");
        }
        other => panic!("{other:?}"),
    }
    let m = discretize(&p, 500, (0.0, 1500.0)).unwrap();
    assert!(m.tail_fraction < 1e-6);
}
