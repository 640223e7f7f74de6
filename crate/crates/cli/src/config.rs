use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use wwlab::volterra::{History, Scheme, SolverConfig};
use wwlab::{AtomFieldParams, CutoffSpec};

use crate::CliError;

/// Truncated-history runs above this many steps are refused up front.
pub const MAX_STEPS: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// ν = 1, D = 1e-3, ε = 0.3: hydrogen's ordering at a tractable scale.
    HydrogenScaled,
    /// Hydrogen 1s–2p in SI units, ε = 10·a₀/c.
    Hydrogen,
}

impl Preset {
    pub fn params(self) -> AtomFieldParams {
        match self {
            Preset::HydrogenScaled => {
                AtomFieldParams::scaled(1.0, 1e-3, 0.3).expect("preset is valid")
            }
            Preset::Hydrogen => wwlab::params::hydrogen_preset(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CutoffKind {
    None,
    Exponential,
    Sharp,
    ApShape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepKey {
    #[serde(rename = "eps")]
    Eps,
    #[serde(rename = "omega-max")]
    OmegaMax,
    #[serde(rename = "nu")]
    Nu,
    #[serde(rename = "D")]
    D,
    #[serde(rename = "dt")]
    Dt,
    #[serde(rename = "t-end")]
    TEnd,
}

impl SweepKey {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKey::Eps => "eps",
            SweepKey::OmegaMax => "omega-max",
            SweepKey::Nu => "nu",
            SweepKey::D => "D",
            SweepKey::Dt => "dt",
            SweepKey::TEnd => "t-end",
        }
    }
}

impl fmt::Display for SweepKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepKey {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "eps" => SweepKey::Eps,
            "omega-max" | "omega_max" => SweepKey::OmegaMax,
            "nu" => SweepKey::Nu,
            "D" | "d" => SweepKey::D,
            "dt" => SweepKey::Dt,
            "t-end" | "t_end" => SweepKey::TEnd,
            other => {
                return Err(CliError::Config(format!(
                    "unknown sweep key `{other}` (expected eps, omega-max, nu, D, dt or t-end)"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub key: SweepKey,
    pub values: Vec<f64>,
}

impl FromStr for Sweep {
    type Err = CliError;

    /// `key=v1,v2,...`
    fn from_str(s: &str) -> Result<Self, CliError> {
        let (key, list) = s
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("sweep `{s}` is not of the form key=v1,v2,...")))?;
        let values = list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Config(format!("sweep value `{v}` is not a number")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let sweep = Sweep {
            key: key.trim().parse()?,
            values,
        };
        sweep.validate()?;
        Ok(sweep)
    }
}

impl Sweep {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.values.is_empty() {
            return Err(CliError::Config("sweep needs at least one value".into()));
        }
        Ok(())
    }
}

/// Solver settings as written by the user; unset fields are derived per run
/// from the cutoff width and the Markov rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history: Option<History>,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "one")]
    pub stride: usize,
    /// Mode count for the `modes` subcommand.
    #[serde(default = "default_modes")]
    pub modes: usize,
}

fn one() -> usize {
    1
}

fn default_modes() -> usize {
    200
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            dt: None,
            t_end: None,
            history: None,
            scheme: Scheme::default(),
            stride: 1,
            modes: default_modes(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSettings {
    pub dir: PathBuf,
}

impl Default for OutputSettings {
    fn default() -> Self {
        OutputSettings { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: AtomFieldParams,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub output: OutputSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

impl RunConfig {
    pub fn from_preset(preset: Preset) -> Self {
        RunConfig {
            params: preset.params(),
            solver: SolverSettings::default(),
            output: OutputSettings::default(),
            sweep: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        if let Some(s) = &cfg.sweep {
            s.validate()?;
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The configuration of one sweep point.
    pub fn with_value(&self, key: SweepKey, value: f64) -> Result<Self, CliError> {
        let mut out = self.clone();
        out.sweep = None;
        match key {
            SweepKey::Eps => out.params.cutoff = set_eps(out.params.cutoff, value)?,
            SweepKey::OmegaMax => out.params.cutoff = CutoffSpec::Sharp { omega_max: value },
            SweepKey::Nu => out.params.nu = value,
            SweepKey::D => out.params.d = value,
            SweepKey::Dt => out.solver.dt = Some(value),
            SweepKey::TEnd => out.solver.t_end = Some(value),
        }
        Ok(out)
    }

    /// Applies `--cutoff`, `--eps` and `--omega-max`.
    pub fn apply_cutoff(
        &mut self,
        kind: Option<CutoffKind>,
        eps: Option<f64>,
        omega_max: Option<f64>,
    ) -> Result<(), CliError> {
        let current_eps = match self.params.cutoff {
            CutoffSpec::Exponential { eps } | CutoffSpec::ApShape { eps, .. } => Some(eps),
            _ => None,
        };
        let cutoff = match kind {
            None => {
                let mut c = self.params.cutoff;
                if let Some(e) = eps {
                    c = set_eps(c, e)?;
                }
                if let Some(om) = omega_max {
                    c = CutoffSpec::Sharp { omega_max: om };
                }
                c
            }
            Some(CutoffKind::None) => CutoffSpec::NoCutoff,
            Some(CutoffKind::Exponential) => CutoffSpec::Exponential {
                eps: eps.or(current_eps).ok_or_else(|| missing("--eps"))?,
            },
            Some(CutoffKind::ApShape) => CutoffSpec::ApShape {
                eps: eps.or(current_eps).ok_or_else(|| missing("--eps"))?,
                nu_ref: self.params.nu,
            },
            Some(CutoffKind::Sharp) => CutoffSpec::Sharp {
                omega_max: omega_max.ok_or_else(|| missing("--omega-max"))?,
            },
        };
        self.params.cutoff = cutoff;
        Ok(())
    }
}

fn missing(flag: &str) -> CliError {
    CliError::Config(format!("this cutoff needs {flag}"))
}

fn set_eps(c: CutoffSpec, eps: f64) -> Result<CutoffSpec, CliError> {
    match c {
        CutoffSpec::ApShape { nu_ref, .. } => Ok(CutoffSpec::ApShape { eps, nu_ref }),
        CutoffSpec::Exponential { .. } | CutoffSpec::NoCutoff => Ok(CutoffSpec::Exponential { eps }),
        CutoffSpec::Sharp { .. } => Err(CliError::Config(
            "eps does not apply to the sharp cutoff; pass --cutoff exponential".into(),
        )),
    }
}

/// Everything a single run needs, in the dimensionless units the solvers use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedRun {
    pub params: AtomFieldParams,
    /// The user's parameters, before rescaling.
    pub input_params: AtomFieldParams,
    /// Frequency unit: dimensionless time = physical time × freq_unit.
    pub freq_unit: f64,
    pub solver: SolverConfig,
    pub gamma_eff: f64,
}

impl RunConfig {
    /// Fills in dt, t_end and the history window for this parameter set.
    pub fn resolve(&self) -> Result<ResolvedRun, CliError> {
        self.params.validate()?;
        // a missing kernel is the first thing any time-domain run hits
        wwlab::kernel::kernel(&self.params.cutoff, 0.0)?;
        let (p, unit) = self.params.to_dimensionless();
        let summary = wwlab::markov::markov_summary(&p)?;
        let width = p.cutoff.time_scale().ok_or(wwlab::Error::DivergentKernel)?;
        let dt = self.solver.dt.map(|d| d * unit).unwrap_or(width / 10.0);
        let t_end = self
            .solver
            .t_end
            .map(|t| t * unit)
            .unwrap_or(3.0 / summary.gamma_eff);
        let history = self.solver.history.unwrap_or(match p.cutoff {
            CutoffSpec::Exponential { eps } => History::Truncated { t_mem: 100.0 * eps },
            _ => History::Full,
        });
        let solver = SolverConfig::new(dt, t_end)
            .with_history(history)
            .with_scheme(self.solver.scheme)
            .with_stride(self.solver.stride);
        let steps = solver.steps();
        if steps > MAX_STEPS {
            return Err(wwlab::Error::StepBudgetExceeded {
                steps,
                budget: MAX_STEPS,
            }
            .into());
        }
        Ok(ResolvedRun {
            params: p,
            input_params: self.params,
            freq_unit: unit,
            solver,
            gamma_eff: summary.gamma_eff,
        })
    }
}
