//! The serialized description of a run. Flags are folded into a
//! `RunConfig`, defaults are filled in, and the resolved config is echoed
//! next to every result.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use flowcx_core::exec::Execution;
use flowcx_core::flows::{FlowSpec, HeisenbergFlow, Observable, SamplingPlan, Scheme, TorusFlow};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::parse;

pub const DEFAULT_R: f64 = 2000.0;
pub const DEFAULT_SAMPLES: usize = 200_000;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_SLACK: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Analyze,
    Simulate,
    Kronecker,
    Equidist,
    Seminorm,
    Vdc,
    Returns,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FlowKind {
    Torus,
    Heisenberg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Closed,
    Recursion,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DensityConfig {
    /// Path of the interval file.
    pub intervals: Option<String>,
    pub delta: Option<String>,
    pub epsilon: Option<String>,
    pub s_max: Option<String>,
    pub step: Option<String>,
    #[serde(rename = "L")]
    pub window: Option<String>,
    pub rule: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub command: Option<Command>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observables: Option<Vec<Observable>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<SamplingPlan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<MethodArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<Vec<(f64, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slack: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    pub format: Format,
    pub strict: bool,
    pub execution: Option<Execution>,
}

#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    /// Comma-separated polynomial family, e.g. "t, 2t, t^2"
    #[arg(long)]
    pub family: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct FlowArgs {
    /// Flow type
    #[arg(long, value_enum)]
    pub flow: Option<FlowKind>,
    /// Torus rotation vector, comma-separated expressions such as "sqrt2, 1/pi"
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    /// Heisenberg flow parameter alpha
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Heisenberg flow parameter beta
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    /// Heisenberg flow parameter zeta
    #[arg(long, allow_hyphen_values = true)]
    pub zeta: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ObservableArgs {
    /// Observables: a JSON array, "@file.json", or "char:1,0; const:0.5"
    #[arg(long, allow_hyphen_values = true)]
    pub observables: Option<String>,
    /// Base point, comma-separated
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    /// Box half-sides: one value or one per parameter [default: 2000]
    #[arg(long = "R")]
    pub r: Option<String>,
    /// Sampling scheme: grid, monte-carlo or low-discrepancy
    #[arg(long)]
    pub scheme: Option<Scheme>,
    /// Number of samples [default: 200000]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Random seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct DensityArgs {
    /// Interval file: lines "a,b", optional first line "period=q"
    #[arg(long)]
    pub intervals: Option<PathBuf>,
    /// Thickening radius
    #[arg(long)]
    pub delta: Option<String>,
    /// Threshold slack epsilon
    #[arg(long)]
    pub epsilon: Option<String>,
    /// End of the scanned window [0, smax]
    #[arg(long)]
    pub smax: Option<String>,
    /// Grid step
    #[arg(long)]
    pub step: Option<String>,
    /// Window length for density estimates [default: 100]
    #[arg(long = "L")]
    pub window: Option<String>,
    /// Threshold rule: auto, generic or arithmetic-shape
    #[arg(long)]
    pub rule: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Exit with code 1 when a hypothesis check fails
    #[arg(long)]
    pub strict: bool,
    /// Load a run config (JSON); flags given on the command line override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Disable data parallelism
    #[arg(long)]
    pub sequential: bool,
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }

    pub fn apply_output(&mut self, o: &OutputArgs) {
        self.strict |= o.strict;
        self.format = o.format;
        if let Some(p) = &o.out {
            self.out = Some(p.display().to_string());
        }
        if o.sequential {
            self.execution = Some(Execution::Sequential);
        }
    }

    pub fn apply_family(&mut self, f: &FamilyArgs) {
        if let Some(t) = &f.family {
            self.family = Some(t.clone());
        }
    }

    pub fn apply_flow(&mut self, f: &FlowArgs) -> Result<(), CliError> {
        let kind = f.flow.or(match (&self.flow, &f.gamma, &f.alpha) {
            (_, Some(_), _) => Some(FlowKind::Torus),
            (_, _, Some(_)) => Some(FlowKind::Heisenberg),
            _ => None,
        });
        match kind {
            None => {}
            Some(FlowKind::Torus) => {
                let gamma = match (&f.gamma, &self.flow) {
                    (Some(g), _) => parse::reals(g)?,
                    (None, Some(FlowSpec::Torus(t))) => t.gamma.clone(),
                    _ => return Err(CliError::Usage("torus flow needs --gamma".into())),
                };
                self.flow = Some(FlowSpec::Torus(TorusFlow::new(gamma)));
            }
            Some(FlowKind::Heisenberg) => {
                let prev = match &self.flow {
                    Some(FlowSpec::Heisenberg(h)) => Some(h.clone()),
                    _ => None,
                };
                let get = |v: &Option<String>, old: Option<f64>, name: &str| -> Result<f64, CliError> {
                    match (v, old) {
                        (Some(t), _) => parse::real(t),
                        (None, Some(o)) => Ok(o),
                        (None, None) if name == "zeta" => Ok(0.0),
                        _ => Err(CliError::Usage(format!("heisenberg flow needs --{name}"))),
                    }
                };
                let alpha = get(&f.alpha, prev.as_ref().map(|h| h.alpha), "alpha")?;
                let beta = get(&f.beta, prev.as_ref().map(|h| h.beta), "beta")?;
                let zeta = get(&f.zeta, prev.as_ref().map(|h| h.zeta), "zeta")?;
                self.flow = Some(FlowSpec::Heisenberg(HeisenbergFlow::new(alpha, beta, zeta)));
            }
        }
        Ok(())
    }

    pub fn apply_observables(&mut self, o: &ObservableArgs) -> Result<(), CliError> {
        if let Some(t) = &o.observables {
            self.observables = Some(parse::observables(t)?);
        }
        if let Some(t) = &o.x {
            self.x = Some(parse::reals(t)?);
        }
        Ok(())
    }

    /// Fills the plan from flags and defaults; `d` is the parameter count.
    pub fn apply_plan(&mut self, p: &PlanArgs, d: usize) -> Result<(), CliError> {
        let prev = self.plan.take();
        let mut r = match (&p.r, &prev) {
            (Some(t), _) => parse::reals(t)?,
            (None, Some(pl)) => pl.r.clone(),
            _ => vec![DEFAULT_R],
        };
        if r.len() == 1 && d > 1 {
            r = vec![r[0]; d];
        }
        let mut plan = SamplingPlan::new(
            r,
            p.scheme.or(prev.as_ref().map(|pl| pl.scheme)).unwrap_or(Scheme::MonteCarlo),
            p.samples.or(prev.as_ref().map(|pl| pl.samples)).unwrap_or(DEFAULT_SAMPLES),
            p.seed.or(prev.as_ref().map(|pl| pl.seed)).unwrap_or(DEFAULT_SEED),
        );
        plan.per_axis = prev.and_then(|pl| pl.per_axis);
        self.plan = Some(plan);
        Ok(())
    }

    pub fn apply_density(&mut self, a: &DensityArgs) {
        let d = self.density.get_or_insert_with(DensityConfig::default);
        let set = |slot: &mut Option<String>, v: &Option<String>| {
            if let Some(v) = v {
                *slot = Some(v.clone());
            }
        };
        if let Some(p) = &a.intervals {
            d.intervals = Some(p.display().to_string());
        }
        set(&mut d.delta, &a.delta);
        set(&mut d.epsilon, &a.epsilon);
        set(&mut d.s_max, &a.smax);
        set(&mut d.step, &a.step);
        set(&mut d.window, &a.window);
        set(&mut d.rule, &a.rule);
        if d.window.is_none() {
            d.window = Some("100".into());
        }
        if d.rule.is_none() {
            d.rule = Some("auto".into());
        }
    }

    pub fn execution(&self) -> Execution {
        self.execution.unwrap_or_default()
    }
}
