//! Command implementations. Each returns a JSON result, CSV rows and the
//! hypothesis gates that `--strict` turns into a failing exit code.

use flowcx_core::complexity::{family_complexity_bounds, SearchOptions, DEFAULT_BUDGET};
use flowcx_core::density::{syndetic_scan, IntervalSet, ScanOptions, ThresholdRule};
use flowcx_core::flows::{
    frac, heisenberg_factor_check, hk_seminorm_with, kronecker_limit, multi_average, path_discrepancy,
    seminorm_bound_check, vdc_check, BoxIndicator, Flow, FlowSpec, KroneckerOptions, Observable,
    RealFamily, SamplingPlan, SeminormMethod, SmoothedBox, TorusFlow, TrigPoly, DEFAULT_BINS,
    DEFAULT_DEPTH,
};
use flowcx_core::polyfam::decompose::independent_decomposition;
use flowcx_core::polyfam::{is_nice, PolyFamily};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{MethodArg, RunConfig, DEFAULT_SLACK};
use crate::error::CliError;
use crate::parse;

#[derive(Debug, Clone, Serialize)]
pub struct Gate {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Gate {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Gate {
            name,
            passed,
            detail: detail.into(),
        }
    }
}

pub struct Outcome {
    pub result: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub gates: Vec<Gate>,
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Internal(e.to_string()))
}

fn missing(flag: &str) -> CliError {
    CliError::Usage(format!("missing --{flag}"))
}

fn family_text(cfg: &RunConfig) -> Result<&str, CliError> {
    cfg.family.as_deref().ok_or_else(|| missing("family"))
}

pub fn exact_family(cfg: &RunConfig) -> Result<PolyFamily, CliError> {
    Ok(PolyFamily::parse(family_text(cfg)?, None)?)
}

pub fn real_family(cfg: &RunConfig) -> Result<RealFamily, CliError> {
    Ok(RealFamily::parse(family_text(cfg)?, None)?)
}

fn flow(cfg: &RunConfig) -> Result<&FlowSpec, CliError> {
    cfg.flow.as_ref().ok_or_else(|| missing("flow"))
}

fn torus(cfg: &RunConfig) -> Result<&TorusFlow, CliError> {
    match flow(cfg)? {
        FlowSpec::Torus(t) => Ok(t),
        FlowSpec::Heisenberg(_) => Err(CliError::Usage("this command needs a torus flow".into())),
    }
}

fn observables(cfg: &RunConfig) -> Result<&[Observable], CliError> {
    cfg.observables.as_deref().ok_or_else(|| missing("observables"))
}

fn trig_polys(cfg: &RunConfig) -> Result<Vec<TrigPoly>, CliError> {
    observables(cfg)?
        .iter()
        .map(|o| {
            o.as_trig()
                .cloned()
                .ok_or_else(|| CliError::Usage("this command needs trigonometric polynomial observables".into()))
        })
        .collect()
}

fn plan(cfg: &RunConfig) -> Result<SamplingPlan, CliError> {
    let p = cfg.plan.clone().ok_or_else(|| CliError::Internal("plan not resolved".into()))?;
    Ok(p.with_execution(cfg.execution()))
}

fn point(cfg: &mut RunConfig, dim: usize) -> Vec<f64> {
    cfg.x.get_or_insert_with(|| vec![0.0; dim]).clone()
}

fn complex_cells(z: Complex64) -> [String; 2] {
    [z.re.to_string(), z.im.to_string()]
}

fn opt_cell<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn ergodic_gate(f: &FlowSpec) -> Gate {
    match f {
        FlowSpec::Torus(t) => match t.resonance(6) {
            None => Gate::new("ergodic", true, "no integer resonance found"),
            Some(n) => Gate::new("ergodic", false, format!("resonance n = {n:?}")),
        },
        FlowSpec::Heisenberg(h) => Gate::new(
            "ergodic",
            h.base_is_ergodic(),
            "base rotation (alpha, beta) must have no integer resonance",
        ),
    }
}

pub fn analyze(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let fam = exact_family(cfg)?;
    let budget = *cfg.budget.get_or_insert(DEFAULT_BUDGET);
    let opts = SearchOptions {
        budget,
        refine: true,
        execution: cfg.execution(),
    };
    let report = family_complexity_bounds(&fam, &opts)?;
    let mut result = to_value(&report)?;
    result["complexity_zero"] = json!(report.independent && is_nice(&fam));
    let rows = report
        .per_j
        .iter()
        .map(|c| {
            vec![
                (c.j + 1).to_string(),
                c.bound.to_string(),
                to_value(&c.rule).map(|v| v.as_str().unwrap_or_default().to_string()).unwrap_or_default(),
                to_value(&c.source).map(|v| v.as_str().unwrap_or_default().to_string()).unwrap_or_default(),
                c.fallback.to_string(),
                c.target.clone(),
                report.family_bound.to_string(),
            ]
        })
        .collect();
    Ok(Outcome {
        result,
        header: vec!["j", "bound", "rule", "source", "fallback", "target", "family_bound"],
        rows,
        gates: Vec::new(),
    })
}

pub fn simulate(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let fam = real_family(cfg)?;
    let fl = flow(cfg)?.clone();
    let fs = observables(cfg)?.to_vec();
    let x = point(cfg, fl.dim());
    let est = multi_average(&fl, &fam, &fs, &x, &plan(cfg)?)?;
    let mut row = complex_cells(est.value).to_vec();
    row.extend([opt_cell(est.stderr), est.samples.to_string(), est.seed.to_string()]);
    Ok(Outcome {
        result: to_value(&est)?,
        header: vec!["re", "im", "stderr", "samples", "seed"],
        rows: vec![row],
        gates: vec![ergodic_gate(&fl)],
    })
}

/// `x -> f(x + h)`.
fn shift(o: &Observable, h: &[f64]) -> Observable {
    let corner = |c: &[f64]| c.iter().zip(h).map(|(a, b)| frac(a - b)).collect();
    match o {
        Observable::TrigPoly(p) => Observable::TrigPoly(p.shift(h)),
        Observable::Box(b) => Observable::Box(BoxIndicator {
            corner: corner(&b.corner),
            widths: b.widths.clone(),
        }),
        Observable::SmoothedBox(b) => Observable::SmoothedBox(SmoothedBox {
            corner: corner(&b.corner),
            widths: b.widths.clone(),
            eta: b.eta,
        }),
    }
}

pub fn kronecker(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let fam = exact_family(cfg)?;
    let dec = independent_decomposition(&fam)?;
    let mut fs = observables(cfg)?.to_vec();
    let m = fs.first().map_or(1, Observable::dim);
    let x = point(cfg, m);
    let gamma = match &cfg.flow {
        Some(FlowSpec::Torus(t)) => Some(t.clone()),
        Some(FlowSpec::Heisenberg(_)) => {
            return Err(CliError::Usage("the limit formula is implemented for torus flows".into()))
        }
        None => None,
    };
    let constants: Vec<f64> = dec.constants.iter().map(|c| c.to_f64()).collect();
    if constants.iter().any(|&c| c != 0.0) {
        let g = gamma
            .as_ref()
            .ok_or_else(|| CliError::Usage("members with constant terms need --gamma".into()))?;
        if g.m() != m {
            return Err(CliError::Usage(format!("--gamma has {} entries, observables live on T^{m}", g.m())));
        }
        for (f, c) in fs.iter_mut().zip(&constants) {
            let h: Vec<f64> = g.gamma.iter().map(|v| v * c).collect();
            *f = shift(f, &h);
        }
    }
    let direction = gamma.as_ref().filter(|g| !g.is_ergodic()).map(|g| g.gamma.clone());
    let p = cfg.plan.clone().ok_or_else(|| CliError::Internal("plan not resolved".into()))?;
    let opts = KroneckerOptions {
        resolution: *cfg.resolution.get_or_insert(64),
        direction: direction.clone(),
        window: p.r[0],
        samples: p.samples,
        seed: p.seed,
        execution: cfg.execution(),
    };
    let lim = kronecker_limit(&dec.alpha, &fs, &x, &opts)?;
    let value = lim.value();
    let result = json!({
        "linearization": dec.linear_family(),
        "basis": dec.basis,
        "basis_kind": dec.basis_kind,
        "alpha": dec.alpha,
        "constants": dec.constants,
        "mode": if direction.is_some() { "direction" } else { "torus" },
        "limit": lim,
        "value": value,
    });
    let mut row = complex_cells(value).to_vec();
    row.extend(complex_cells(lim.quadrature));
    row.push(lim.points.to_string());
    Ok(Outcome {
        result,
        header: vec!["re", "im", "quadrature_re", "quadrature_im", "points"],
        rows: vec![row],
        gates: Vec::new(),
    })
}

pub fn equidist(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let fam = real_family(cfg)?;
    let pl = plan(cfg)?;
    match cfg.flow.clone() {
        Some(FlowSpec::Heisenberg(h)) => {
            let x = point(cfg, 3);
            let bins = *cfg.bins.get_or_insert(DEFAULT_BINS);
            let r = heisenberg_factor_check(&h, &fam, &x, &pl, bins)?;
            Ok(Outcome {
                result: to_value(&r)?,
                header: vec!["base_discrepancy", "z_tv_distance", "non_ergodic", "degenerate", "samples"],
                rows: vec![vec![
                    r.base_discrepancy.to_string(),
                    r.z_tv_distance.to_string(),
                    r.non_ergodic.to_string(),
                    r.degenerate.to_string(),
                    r.samples.to_string(),
                ]],
                gates: vec![
                    Gate::new("ergodic", !r.non_ergodic, "base rotation must be ergodic"),
                    Gate::new("non_degenerate", !r.degenerate, "the path must not be constant"),
                ],
            })
        }
        _ => {
            let depth = *cfg.depth.get_or_insert(DEFAULT_DEPTH);
            let r = path_discrepancy(&fam, &pl, depth)?;
            let detail = match &r.rational_relation {
                Some(n) => format!("integer relation n = {n:?}"),
                None => "no integer relation found".into(),
            };
            Ok(Outcome {
                result: to_value(&r)?,
                header: vec!["discrepancy", "samples", "boxes", "depth", "degenerate"],
                rows: vec![vec![
                    r.discrepancy.to_string(),
                    r.samples.to_string(),
                    r.boxes.to_string(),
                    r.depth.to_string(),
                    r.degenerate.to_string(),
                ]],
                gates: vec![Gate::new("rationally_independent", !r.degenerate, detail)],
            })
        }
    }
}

pub fn seminorm(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let t = torus(cfg)?.clone();
    if t.m() != 1 {
        return Err(CliError::Usage("seminorms are implemented on T^1".into()));
    }
    let fs = trig_polys(cfg)?;
    let k = *cfg.k.get_or_insert(2);
    let method = match cfg.method.get_or_insert(MethodArg::Closed) {
        MethodArg::Closed => SeminormMethod::ClosedForm,
        MethodArg::Recursion => SeminormMethod::Recursion {
            n: *cfg.n.get_or_insert(500),
        },
    };
    let exec = cfg.execution();
    let values = fs
        .iter()
        .map(|f| hk_seminorm_with(f, t.gamma[0], k, method, exec))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows: Vec<Vec<String>> = values
        .iter()
        .enumerate()
        .map(|(i, v)| vec![(i + 1).to_string(), v.k.to_string(), v.value.to_string()])
        .collect();
    let mut result = json!({ "seminorms": values });
    let mut gates = Vec::new();
    if cfg.family.is_some() {
        let fam = exact_family(cfg)?;
        let slack = *cfg.slack.get_or_insert(DEFAULT_SLACK);
        let r = seminorm_bound_check(&t, &fam, &fs, &plan(cfg)?, k, slack)?;
        rows.push(vec!["average".into(), k.to_string(), r.average_norm.to_string()]);
        gates.push(Gate::new("bound", r.pass, format!("margin {}", r.margin)));
        gates.push(Gate::new("sup_bound", r.sup_bound_certified, "coefficient sums at most 1"));
        result["bound_check"] = to_value(&r)?;
    }
    Ok(Outcome {
        result,
        header: vec!["observable", "k", "value"],
        rows,
        gates,
    })
}

pub fn vdc(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let fam = real_family(cfg)?;
    let t = torus(cfg)?.clone();
    let fs = trig_polys(cfg)?;
    let d = fam.nvars();
    let psi = cfg.psi.get_or_insert_with(|| vec![(0.0, 5.0); d]).clone();
    let slack = *cfg.slack.get_or_insert(DEFAULT_SLACK);
    let r = vdc_check(&t, &fam, &fs, &psi, &plan(cfg)?, slack)?;
    Ok(Outcome {
        result: to_value(&r)?,
        header: vec!["lhs", "rhs", "margin", "pass"],
        rows: vec![vec![r.lhs.to_string(), r.rhs.to_string(), r.margin.to_string(), r.pass.to_string()]],
        gates: vec![
            Gate::new("inequality", r.pass, format!("margin {}", r.margin)),
            Gate::new("sup_bound", r.sup_bound_certified, "coefficient sums at most 1"),
        ],
    })
}

pub fn returns(cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    let fam = exact_family(cfg)?;
    let d = cfg.density.clone().unwrap_or_default();
    let path = d.intervals.as_deref().ok_or_else(|| missing("intervals"))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {path}: {e}")))?;
    let e = IntervalSet::parse(&text)?;
    let need = |v: &Option<String>, name: &str| -> Result<_, CliError> {
        parse::exact(v.as_deref().ok_or_else(|| missing(name))?, name)
    };
    let mut opts = ScanOptions::new(
        need(&d.delta, "delta")?,
        need(&d.epsilon, "epsilon")?,
        need(&d.s_max, "smax")?,
        need(&d.step, "step")?,
    );
    opts.window = need(&d.window, "L")?;
    opts.rule = d
        .rule
        .as_deref()
        .unwrap_or("auto")
        .parse::<ThresholdRule>()
        .map_err(CliError::Usage)?;
    opts.execution = cfg.execution();
    let r = syndetic_scan(&e, &fam, &opts)?;
    let rows = r
        .profile
        .iter()
        .map(|p| vec![p.s.to_string(), p.density.to_string(), p.good.to_string()])
        .collect();
    let gates = vec![
        Gate::new("hypothesis", r.hypothesis_certified, "complexity bound or family shape"),
        Gate::new("thickened", !r.experimental, "delta must be positive"),
        Gate::new("good_points", r.max_gap.is_some(), "some grid point must be good"),
    ];
    Ok(Outcome {
        result: json!({ "set": e, "scan": r }),
        header: vec!["s", "density", "good"],
        rows,
        gates,
    })
}
