//! `flowcx`: complexity reports for polynomial families and numerical checks
//! on torus and Heisenberg flows.

mod config;
mod error;
mod output;
mod parse;
mod run;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{
    Command, DensityArgs, FamilyArgs, FlowArgs, MethodArg, ObservableArgs, OutputArgs, PlanArgs, RunConfig,
};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "flowcx", version, about = "Flow average complexity and numerical checks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Independence, weight vector and certified complexity bounds of a family
    Analyze {
        #[command(flatten)]
        family: FamilyArgs,
        /// Grid candidates examined per search
        #[arg(long)]
        budget: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Estimate the multiparameter average along a family at a point
    Simulate(SampledArgs),
    /// Evaluate the limit of the average via the linearized family
    Kronecker {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        flow: FlowArgs,
        #[command(flatten)]
        obs: ObservableArgs,
        /// Quadrature points per variable and period
        #[arg(long)]
        resolution: Option<usize>,
        #[command(flatten)]
        plan: PlanArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Discrepancy of a polynomial path on a torus, or the Heisenberg
    /// torus-factor check with --flow heisenberg
    Equidist {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        flow: FlowArgs,
        /// Base point on the Heisenberg nilmanifold
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        /// Dyadic depth of the box family
        #[arg(long)]
        depth: Option<u32>,
        /// Bins for the z-coordinate histogram
        #[arg(long)]
        bins: Option<usize>,
        #[command(flatten)]
        plan: PlanArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Host-Kra seminorms of trigonometric polynomials on a circle rotation;
    /// with --family, also the seminorm bound on averages
    Seminorm {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        flow: FlowArgs,
        #[command(flatten)]
        obs: ObservableArgs,
        /// Seminorm order
        #[arg(long)]
        k: Option<usize>,
        /// Evaluation method
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        /// Terms in the recursion estimate [default: 500]
        #[arg(long = "N")]
        n: Option<usize>,
        /// Allowed slack [default: 0.05]
        #[arg(long)]
        slack: Option<f64>,
        #[command(flatten)]
        plan: PlanArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Both sides of the van der Corput inequality
    Vdc {
        #[command(flatten)]
        sampled: SampledArgs,
        /// Shift box, one "a:b" per parameter [default: 0:5]
        #[arg(long)]
        psi: Option<String>,
        /// Allowed slack [default: 0.05]
        #[arg(long)]
        slack: Option<f64>,
    },
    /// Return-time densities and a syndeticity gap scan for a subset of R
    Returns {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        density: DensityArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Args)]
struct SampledArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[command(flatten)]
    flow: FlowArgs,
    #[command(flatten)]
    obs: ObservableArgs,
    #[command(flatten)]
    plan: PlanArgs,
    #[command(flatten)]
    out: OutputArgs,
}

fn base_config(command: Command, out: &OutputArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &out.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(c) = cfg.command {
        if c != command {
            return Err(CliError::Usage(format!("config is for command {c:?}, not {command:?}")));
        }
    }
    cfg.command = Some(command);
    cfg.apply_output(out);
    cfg.execution = Some(cfg.execution());
    Ok(cfg)
}

fn real_nvars(cfg: &RunConfig) -> Result<usize, CliError> {
    Ok(run::real_family(cfg)?.nvars())
}

fn sampled(command: Command, a: &SampledArgs) -> Result<RunConfig, CliError> {
    let mut cfg = base_config(command, &a.out)?;
    cfg.apply_family(&a.family);
    cfg.apply_flow(&a.flow)?;
    cfg.apply_observables(&a.obs)?;
    let d = real_nvars(&cfg)?;
    cfg.apply_plan(&a.plan, d)?;
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    let (mut cfg, out) = match &cli.command {
        Cmd::Analyze { family, budget, out } => {
            let mut cfg = base_config(Command::Analyze, out)?;
            cfg.apply_family(family);
            if budget.is_some() {
                cfg.budget = *budget;
            }
            (cfg, out)
        }
        Cmd::Simulate(a) => (sampled(Command::Simulate, a)?, &a.out),
        Cmd::Kronecker {
            family,
            flow,
            obs,
            resolution,
            plan,
            out,
        } => {
            let mut cfg = base_config(Command::Kronecker, out)?;
            cfg.apply_family(family);
            cfg.apply_flow(flow)?;
            cfg.apply_observables(obs)?;
            if resolution.is_some() {
                cfg.resolution = *resolution;
            }
            // R is the window of the Monte Carlo fallback.
            let mut p = plan.clone();
            if p.r.is_none() && cfg.plan.is_none() {
                p.r = Some("1000".into());
            }
            cfg.apply_plan(&p, 1)?;
            (cfg, out)
        }
        Cmd::Equidist {
            family,
            flow,
            x,
            depth,
            bins,
            plan,
            out,
        } => {
            let mut cfg = base_config(Command::Equidist, out)?;
            cfg.apply_family(family);
            cfg.apply_flow(flow)?;
            if let Some(x) = x {
                cfg.x = Some(parse::reals(x)?);
            }
            if depth.is_some() {
                cfg.depth = *depth;
            }
            if bins.is_some() {
                cfg.bins = *bins;
            }
            let d = real_nvars(&cfg)?;
            cfg.apply_plan(plan, d)?;
            (cfg, out)
        }
        Cmd::Seminorm {
            family,
            flow,
            obs,
            k,
            method,
            n,
            slack,
            plan,
            out,
        } => {
            let mut cfg = base_config(Command::Seminorm, out)?;
            cfg.apply_family(family);
            cfg.apply_flow(flow)?;
            cfg.apply_observables(obs)?;
            if k.is_some() {
                cfg.k = *k;
            }
            if method.is_some() {
                cfg.method = *method;
            }
            if n.is_some() {
                cfg.n = *n;
            }
            if slack.is_some() {
                cfg.slack = *slack;
            }
            if cfg.family.is_some() {
                let d = run::exact_family(&cfg)?.nvars();
                cfg.apply_plan(plan, d)?;
            }
            (cfg, out)
        }
        Cmd::Vdc { sampled: a, psi, slack } => {
            let mut cfg = sampled(Command::Vdc, a)?;
            if let Some(p) = psi {
                cfg.psi = Some(parse::psi(p)?);
            }
            if slack.is_some() {
                cfg.slack = *slack;
            }
            (cfg, &a.out)
        }
        Cmd::Returns { family, density, out } => {
            let mut cfg = base_config(Command::Returns, out)?;
            cfg.apply_family(family);
            cfg.apply_density(density);
            (cfg, out)
        }
    };

    let outcome = match cfg.command.expect("command set") {
        Command::Analyze => run::analyze(&mut cfg),
        Command::Simulate => run::simulate(&mut cfg),
        Command::Kronecker => run::kronecker(&mut cfg),
        Command::Equidist => run::equidist(&mut cfg),
        Command::Seminorm => run::seminorm(&mut cfg),
        Command::Vdc => run::vdc(&mut cfg),
        Command::Returns => run::returns(&mut cfg),
    }?;
    output::write(&cfg, &outcome, out.out.as_deref(), out.format)?;

    let failed: Vec<&str> = outcome.gates.iter().filter(|g| !g.passed).map(|g| g.name).collect();
    if !failed.is_empty() {
        eprintln!("hypothesis checks failed: {}", failed.join(", "));
        if cfg.strict {
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
