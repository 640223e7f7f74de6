use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use wwlab::markov::{fit_exponential, markov_summary, FitResult, MarkovSummary};
use wwlab::modes::{discretize, max_detuning, solve_modes_strided};
use wwlab::params::{hydrogen_preset, validity_report};
use wwlab::volterra::{self, SolverConfig};
use wwlab::{AtomFieldParams, CutoffSpec, ValidityReport};

use crate::config::{ResolvedRun, RunConfig};
use crate::output;
use crate::CliError;

/// Where real hydrogen sits, reported next to every scaled run.
#[derive(Debug, Clone, Serialize)]
pub struct HydrogenReference {
    pub gamma_over_nu: f64,
    pub shift_over_nu: f64,
    pub validity: ValidityReport,
}

pub fn hydrogen_reference() -> Result<HydrogenReference, CliError> {
    let p = hydrogen_preset();
    let (dimless, _) = p.to_dimensionless();
    let m = markov_summary(&dimless)?;
    Ok(HydrogenReference {
        gamma_over_nu: p.gamma() / p.nu,
        shift_over_nu: m.shift,
        validity: validity_report(&p)?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateSummary {
    pub params: AtomFieldParams,
    pub freq_unit: f64,
    /// Solver settings in dimensionless time (physical time × freq_unit).
    pub solver: SolverConfig,
    pub markov: MarkovSummary,
    pub fit: FitResult,
    /// Fitted rate and shift in the units of `params`.
    pub gamma_fit: f64,
    pub shift_fit: f64,
    pub validity: Option<ValidityReport>,
    pub hydrogen_reference: HydrogenReference,
    pub samples: usize,
    pub elapsed_seconds: f64,
}

fn fit_window(run: &ResolvedRun, trace: &volterra::AmplitudeTrace) -> (f64, f64) {
    let end = *trace.times.last().unwrap_or(&0.0);
    (trace.min_fit_start().max(0.1 / run.gamma_eff).min(end), end)
}

pub fn simulate_point(
    cfg: &RunConfig,
    dir: &Path,
    tag: &str,
    reference: &HydrogenReference,
) -> Result<SimulateSummary, CliError> {
    let start = Instant::now();
    let run = cfg.resolve()?;
    let trace = volterra::solve(&run.params, &run.solver)?;
    let markov = markov_summary(&run.params)?;
    let fit = fit_exponential(&trace, fit_window(&run, &trace))?;
    output::write_trace(&dir.join(format!("trace{tag}.csv")), &trace, 1.0 / run.freq_unit)?;
    let summary = SimulateSummary {
        params: run.input_params,
        freq_unit: run.freq_unit,
        solver: run.solver,
        markov,
        fit,
        gamma_fit: fit.gamma_fit * run.freq_unit,
        shift_fit: fit.shift_fit * run.freq_unit,
        validity: validity_report(&run.input_params).ok(),
        hydrogen_reference: reference.clone(),
        samples: trace.len(),
        elapsed_seconds: start.elapsed().as_secs_f64(),
    };
    output::write_json(&dir.join(format!("summary{tag}.json")), &summary)?;
    Ok(summary)
}

pub fn simulate(cfg: &RunConfig) -> Result<Vec<String>, CliError> {
    let dir = &cfg.output.dir;
    // the effective configuration, so any run can be repeated with --config
    std::fs::write(dir.join("run.toml"), cfg.to_toml()?)?;
    let reference = hydrogen_reference()?;
    let Some(sweep) = &cfg.sweep else {
        simulate_point(cfg, dir, "", &reference)?;
        return Ok(vec!["trace.csv".into(), "summary.json".into(), "run.toml".into()]);
    };
    let points = sweep
        .values
        .iter()
        .map(|&v| cfg.with_value(sweep.key, v))
        .collect::<Result<Vec<_>, _>>()?;
    let results = points
        .par_iter()
        .enumerate()
        .map(|(i, point)| simulate_point(point, dir, &format!("_{}_{i}", sweep.key), &reference))
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Vec<f64>> = sweep
        .values
        .iter()
        .zip(&results)
        .map(|(v, s)| {
            vec![
                *v,
                s.gamma_fit,
                s.shift_fit,
                s.markov.gamma_eff * s.freq_unit,
                s.markov.shift * s.freq_unit,
            ]
        })
        .collect();
    output::write_rows(
        &dir.join("sweep.csv"),
        &format!("{},gamma_fit,shift_fit,gamma_eff,shift", sweep.key),
        &rows,
    )?;
    let mut files: Vec<String> = (0..results.len())
        .flat_map(|i| {
            [
                format!("trace_{}_{i}.csv", sweep.key),
                format!("summary_{}_{i}.json", sweep.key),
            ]
        })
        .collect();
    files.push("sweep.csv".into());
    files.push("run.toml".into());
    Ok(files)
}

pub fn kernel_table(cfg: &RunConfig, tau_max: Option<f64>, points: usize) -> Result<Vec<String>, CliError> {
    let spec = cfg.params.cutoff;
    spec.validate()?;
    let width = spec.time_scale().ok_or(wwlab::Error::DivergentKernel)?;
    let tau_max = tau_max.unwrap_or(20.0 * width);
    if !(tau_max > 0.0) || points < 2 {
        return Err(CliError::Config("need --tau-max > 0 and at least two points".into()));
    }
    let rows = (0..points)
        .into_par_iter()
        .map(|i| {
            let tau = tau_max * i as f64 / (points - 1) as f64;
            wwlab::kernel::kernel(&spec, tau).map(|k| (tau, k))
        })
        .collect::<Result<Vec<_>, _>>()?;
    output::write_kernel(&cfg.output.dir.join("kernel.csv"), &rows)?;
    Ok(vec!["kernel.csv".into()])
}

#[derive(Debug, Clone, Serialize)]
pub struct ModesSummary {
    pub params: AtomFieldParams,
    pub freq_unit: f64,
    pub modes: usize,
    pub span: (f64, f64),
    pub tail_fraction: f64,
    pub dt: f64,
    pub t_end: f64,
    pub markov: MarkovSummary,
    pub final_excited: f64,
    pub max_norm_drift: f64,
    /// Mode frequency with the largest emitted density, in the units of `params`.
    pub peak_omega: f64,
    pub elapsed_seconds: f64,
}

pub fn modes(cfg: &RunConfig) -> Result<Vec<String>, CliError> {
    let start = Instant::now();
    let run = cfg.resolve()?;
    let p = &run.params;
    let upper = match p.cutoff {
        CutoffSpec::Sharp { omega_max } => omega_max,
        _ => p.nu + 30.0 / p.cutoff.time_scale().ok_or(wwlab::Error::DivergentKernel)?,
    };
    let span = (0.0, upper);
    let set = discretize(p, cfg.solver.modes, span)?;
    let dt = 0.1 / max_detuning(p, &set);
    let t_end = run.solver.t_end;
    let stride = ((t_end / dt) as usize / 10_000).max(1);
    let result = solve_modes_strided(p, &set, t_end, dt, stride)?;
    let markov = markov_summary(p)?;
    let density = result.state.spectral_density(&set);
    let peak = density
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(j, _)| set.omegas[j])
        .unwrap_or(f64::NAN);
    let dir = &cfg.output.dir;
    output::write_spectrum(&dir.join("spectrum.csv"), &set, &result.state, run.freq_unit)?;
    output::write_trace(&dir.join("trace.csv"), &result.trace, 1.0 / run.freq_unit)?;
    let summary = ModesSummary {
        params: run.input_params,
        freq_unit: run.freq_unit,
        modes: set.count(),
        span,
        tail_fraction: set.tail_fraction,
        dt,
        t_end,
        markov,
        final_excited: result.state.c_e.norm_sqr(),
        max_norm_drift: result.max_norm_drift,
        peak_omega: peak * run.freq_unit,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    };
    output::write_json(&dir.join("summary.json"), &summary)?;
    Ok(vec!["spectrum.csv".into(), "trace.csv".into(), "summary.json".into()])
}

pub fn appendix(cfg: &RunConfig) -> Result<Vec<String>, CliError> {
    let report = wwlab::dipole::appendix_report();
    output::write_json(&cfg.output.dir.join("appendix.json"), &report)?;
    Ok(vec!["appendix.json".into()])
}
