use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use contest_core::equilibrium::{simulate, welfare_quality_analytic, EquilibriumModel};
use contest_core::format::{sig9, Table};
use contest_core::objective::{evaluate_hm_closed_form, Evaluator};
use contest_core::optimizer::{
    branch_and_bound, grid_search, two_level_line_search, BnbConfig, ConstantsMode, OptResult,
};
use contest_core::policy::classify_structure;
use contest_core::structure::check_gradient_quasiconvexity;
use contest_core::verify::{self, Suite};
use contest_core::{CostParams, Error, ObjectiveSpec, Policy, QuadratureConfig, Rule};
use rayon::prelude::*;

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_BUDGET: u8 = 3;

/// Cells a sweep may run without --full.
const SWEEP_BUDGET: usize = 10_000;
const FULL_SWEEP_CELLS: usize = 1000;

/// Optimal rank-based prize policies for contests with power costs.
#[derive(Debug, Parser)]
#[command(name = "contest-opt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the designer objective G(p), welfare W and quality Q.
    Evaluate(EvaluateArgs),
    /// Search for the optimal policy.
    Optimize(OptimizeArgs),
    /// Optimal two-level policy over an alpha x beta grid.
    ///
    /// CSV columns: alpha, beta, p1, p2, value, structure_tag.
    Sweep(SweepArgs),
    /// Equilibrium CDF table, q_max and an optional Monte Carlo check.
    ///
    /// CSV columns: q, F.
    Equilibrium(EquilibriumArgs),
    /// Run the invariant suites; exits with 2 if any check fails.
    ///
    /// Prints one JSON object per check: name, status, worst_margin, seed.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RuleArg {
    RightRiemann,
    Trapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Number of contestants.
    #[arg(long, default_value_t = 5)]
    n: usize,
    /// Cost exponent in c(q) = q^beta.
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    /// Weight on welfare in the ConvexCombo objective.
    #[arg(long)]
    alpha: Option<f64>,
    /// Objective in key=value form, e.g. "objective=posynomial terms=2:3,-3:2,2:1".
    #[arg(long, conflicts_with = "alpha")]
    objective: Option<String>,
}

impl ModelArgs {
    fn validate(&self) -> anyhow::Result<(CostParams, ObjectiveSpec)> {
        if self.n < 2 {
            bail!(Error::Domain(format!("n must be >= 2, got {}", self.n)));
        }
        let beta = CostParams::new(self.beta)?;
        let spec = match (&self.objective, self.alpha) {
            (Some(text), _) => {
                let text = if text.trim_start().starts_with("objective=") {
                    text.clone()
                } else {
                    format!("objective={}", text.trim_start())
                };
                text.parse::<ObjectiveSpec>()?
            }
            (None, Some(a)) => ObjectiveSpec::convex(a)?,
            (None, None) => bail!(Error::Domain("give --alpha or --objective".into())),
        };
        spec.validate()?;
        Ok((beta, spec))
    }
}

#[derive(Debug, Args)]
struct QuadArgs {
    /// Quadrature points.
    #[arg(long = "quad-m")]
    quad_m: Option<usize>,
    /// Quadrature rule.
    #[arg(long, value_enum)]
    rule: Option<RuleArg>,
}

impl QuadArgs {
    fn config(&self, default: QuadratureConfig) -> anyhow::Result<QuadratureConfig> {
        let rule = match self.rule {
            Some(RuleArg::RightRiemann) => Rule::RightRiemann,
            Some(RuleArg::Trapezoid) => Rule::Trapezoid,
            None => default.rule,
        };
        Ok(QuadratureConfig::new(
            self.quad_m.unwrap_or(default.m),
            rule,
            default.exclude_left_endpoint,
        )?)
    }
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    quad: QuadArgs,
    /// Policy: comma-separated shares, hm, uni or two:<p1>.
    #[arg(long, conflicts_with = "policy_file", required_unless_present = "policy_file")]
    policy: Option<String>,
    /// File holding a policy string or an optimize JSON result.
    #[arg(long)]
    policy_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    quad: QuadArgs,
    #[arg(long, value_enum, default_value = "bnb")]
    method: MethodArg,
    /// Target optimality gap for bnb.
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    /// Report the closed-form gap constants instead of the quadrature ones.
    #[arg(long)]
    rough_constants: bool,
    /// Lattice step for grid.
    #[arg(long, default_value_t = 0.005)]
    granularity: f64,
    /// Scan points for line.
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    /// Skip the golden-section polish in line.
    #[arg(long)]
    no_refine: bool,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Bnb,
    Grid,
    Line,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 5)]
    n: usize,
    /// Cells along alpha in [0.05, 1].
    #[arg(long, default_value_t = 50)]
    alpha_cells: usize,
    /// Cells along beta in [0.1, 5].
    #[arg(long, default_value_t = 50)]
    beta_cells: usize,
    /// Run the 1000 x 1000 grid.
    #[arg(long)]
    full: bool,
    /// Scan points per cell.
    #[arg(long, default_value_t = 200)]
    steps: usize,
    #[command(flatten)]
    quad: QuadArgs,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EquilibriumArgs {
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    /// Policy: comma-separated shares, hm, uni or two:<p1>.
    #[arg(long)]
    policy: String,
    /// Rows in the CDF table.
    #[arg(long, default_value_t = 101)]
    points: usize,
    /// Monte Carlo rounds.
    #[arg(long)]
    simulate: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Deviation qualities tested by the simulation.
    #[arg(long, default_value_t = 50)]
    deviation_grid: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random draws per randomized check.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Comma-separated suites: bernstein, objective, equilibrium, optimizer, schur, minors, structure.
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<String>>,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// A failed verification run, reported with its own exit code.
#[derive(Debug)]
struct VerifyFailed;

impl std::fmt::Display for VerifyFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("verification failed")
    }
}

impl std::error::Error for VerifyFailed {}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_USAGE);
    }
    let outcome = match cli.command {
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Equilibrium(a) => cmd_equilibrium(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<VerifyFailed>().is_some() {
        return EXIT_VERIFY;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::Budget(_)) => EXIT_BUDGET,
        _ => EXIT_USAGE,
    }
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("CONTEST_OPT_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| anyhow!("CONTEST_OPT_THREADS must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the worker pool")?;
    Ok(())
}

fn emit(output: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn read_policy(text: Option<&str>, file: Option<&Path>, n: usize) -> anyhow::Result<Policy> {
    if let Some(t) = text {
        return Ok(Policy::parse(t, Some(n))?);
    }
    let path = file.expect("clap requires --policy or --policy-file");
    let body = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let policy = if body.trim_start().starts_with('{') {
        OptResult::from_json(&body)?.policy
    } else {
        Policy::parse(body.trim(), Some(n))?
    };
    if policy.n() != n {
        bail!(Error::Domain(format!("policy has {} shares but n = {n}", policy.n())));
    }
    Ok(policy)
}

fn cmd_evaluate(a: EvaluateArgs) -> anyhow::Result<()> {
    let (beta, spec) = a.model.validate()?;
    let n = a.model.n;
    let quad = a.quad.config(QuadratureConfig::acceptance())?;
    let p = read_policy(a.policy.as_deref(), a.policy_file.as_deref(), n)?;
    let ev = Evaluator::new(n, quad)?;
    let g = ev.evaluate_general(&spec, beta, &p)?;
    let welfare = ev.evaluate_general(&ObjectiveSpec::convex(1.0)?, beta, &p)?;
    let quality = ev.evaluate_general(&ObjectiveSpec::convex(0.0)?, beta, &p)?;
    let closed = match (&spec, p == Policy::hm(n)?) {
        (ObjectiveSpec::ConvexCombo { alpha }, true) => Some(evaluate_hm_closed_form(*alpha, beta, n)),
        _ => None,
    };
    let mut fields = vec![
        ("policy", p.to_string()),
        ("objective", spec.to_string()),
        ("n", n.to_string()),
        ("beta", sig9(beta.beta())),
        ("value", sig9(g.value)),
        ("error_bound", sig9(g.error_bound)),
        ("welfare", sig9(welfare.value)),
        ("quality", sig9(quality.value)),
    ];
    if let Some(c) = closed {
        fields.push(("closed_form", sig9(c)));
    }
    let text = match a.format {
        Format::Csv => {
            let mut t = Table::new(fields.iter().map(|(k, _)| *k));
            t.push(fields.iter().map(|(_, v)| v.clone()).collect());
            t.to_csv_string()
        }
        Format::Json => {
            let mut map = serde_json::Map::new();
            for (k, v) in fields {
                map.insert(k.to_string(), serde_json::Value::String(v));
            }
            serde_json::to_string_pretty(&map)? + "\n"
        }
    };
    emit(None, &text)
}

fn cmd_optimize(a: OptimizeArgs) -> anyhow::Result<()> {
    let (beta, spec) = a.model.validate()?;
    let n = a.model.n;
    let result = match a.method {
        MethodArg::Bnb => {
            let ObjectiveSpec::ConvexCombo { alpha } = spec else {
                bail!(Error::Domain(format!(
                    "bnb certifies the convex-combination objective only; {} has no interval bounds. \
                     Use --method line (two-level scan) or --method grid",
                    spec.kind()
                )));
            };
            let mut cfg = BnbConfig::new(a.epsilon, n, alpha)?;
            if a.quad.quad_m.is_some() || a.quad.rule.is_some() {
                cfg.quad = a.quad.config(cfg.quad)?;
            }
            if a.rough_constants {
                cfg.constants_mode = ConstantsMode::Rough;
            }
            if n == 2 {
                eprintln!("n = 2: HM is the only policy with p_n = 0, returning it directly");
            }
            branch_and_bound(n, alpha, beta, &cfg)?
        }
        MethodArg::Grid => {
            let quad = a.quad.config(QuadratureConfig::trapezoid(1000)?)?;
            grid_search(&spec, beta, n, a.granularity, &quad)?
        }
        MethodArg::Line => {
            let quad = a.quad.config(QuadratureConfig::trapezoid(20_000)?)?;
            two_level_line_search(&spec, beta, n, a.steps, !a.no_refine, &quad)?
        }
    };
    summarize(&result, &spec, beta)?;
    emit(a.output.as_deref(), &(result.to_json() + "\n"))
}

fn summarize(r: &OptResult, spec: &ObjectiveSpec, beta: CostParams) -> anyhow::Result<()> {
    let tag = r.structure(1e-6);
    eprintln!("method:    {}", r.method.as_str());
    eprintln!("policy:    {}", r.policy);
    eprintln!("structure: {tag}");
    eprintln!("value:     {}", sig9(r.value));
    match r.gap {
        Some(g) => eprintln!("gap:       {} (certified: {})", sig9(g), r.certified),
        None => eprintln!("gap:       none (uncertified)"),
    }
    eprintln!("nodes:     {}", r.nodes);
    if r.policy.n() > 2 && r.policy.last() == 0.0 {
        let ev = Evaluator::new(r.policy.n(), QuadratureConfig::trapezoid(20_000)?)?;
        if let Ok(g) = ev.gradient(spec, beta, &r.policy) {
            let tol = contest_core::structure::gradient_tolerance(&g.values, g.error_estimate);
            let rep = check_gradient_quasiconvexity(&g.values, &r.policy, tol);
            eprintln!("gradient:  quasiconvex = {}", rep.is_quasiconvex);
        }
    }
    Ok(())
}

fn linspace(lo: f64, hi: f64, cells: usize) -> Vec<f64> {
    if cells == 1 {
        return vec![lo];
    }
    (0..cells)
        .map(|k| lo + (hi - lo) * k as f64 / (cells - 1) as f64)
        .collect()
}

fn cmd_sweep(a: SweepArgs) -> anyhow::Result<()> {
    let (na, nb) = if a.full {
        (FULL_SWEEP_CELLS, FULL_SWEEP_CELLS)
    } else {
        (a.alpha_cells, a.beta_cells)
    };
    if na == 0 || nb == 0 {
        bail!(Error::Domain("sweep needs at least one cell per axis".into()));
    }
    let cells = na * nb;
    if cells > SWEEP_BUDGET && !a.full {
        bail!(Error::Budget(format!(
            "{na} x {nb} = {cells} cells exceeds the desk budget of {SWEEP_BUDGET}; pass --full to run it"
        )));
    }
    let n = a.n;
    let quad = a.quad.config(QuadratureConfig::plotting())?;
    let grid: Vec<(f64, f64)> = linspace(0.05, 1.0, na)
        .into_iter()
        .flat_map(|al| linspace(0.1, 5.0, nb).into_iter().map(move |b| (al, b)))
        .collect();
    let mut rows = grid
        .par_iter()
        .map(|(alpha, b)| -> anyhow::Result<(f64, f64, OptResult)> {
            let spec = ObjectiveSpec::convex(*alpha)?;
            let r = two_level_line_search(&spec, CostParams::new(*b)?, n, a.steps, true, &quad)?;
            Ok((*alpha, *b, r))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    rows.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let mut table = Table::new(["alpha", "beta", "p1", "p2", "value", "structure_tag"]);
    for (alpha, b, r) in rows {
        let s = r.policy.shares();
        table.push(vec![
            sig9(alpha),
            sig9(b),
            sig9(s[0]),
            sig9(s.get(1).copied().unwrap_or(0.0)),
            sig9(r.value),
            classify_structure(&r.policy, 1e-9).tag().to_string(),
        ]);
    }
    emit(a.output.as_deref(), &table.to_csv_string())
}

fn cmd_equilibrium(a: EquilibriumArgs) -> anyhow::Result<()> {
    let beta = CostParams::new(a.beta)?;
    let p = Policy::parse(&a.policy, Some(a.n))?;
    let model = EquilibriumModel::new(p.clone(), beta)?;
    let table = model.cdf_table(a.points)?;
    let sim = match a.simulate {
        Some(samples) => Some(simulate(&model, samples, a.seed, a.deviation_grid)?),
        None => None,
    };
    let text = match a.format {
        Format::Csv => {
            eprintln!("q_max: {}", sig9(model.q_max()));
            if let Some(s) = &sim {
                if p.last() == 0.0 {
                    let (w, q) = welfare_quality_analytic(&p, beta, &QuadratureConfig::trapezoid(20_000)?)?;
                    eprintln!("analytic welfare: {}  quality: {}", sig9(w.value), sig9(q.value));
                }
                eprintln!("simulation: {}", serde_json::to_string(s)?);
            }
            table.to_csv_string()
        }
        Format::Json => {
            let doc = serde_json::json!({
                "policy": p,
                "beta": beta.beta(),
                "q_max": model.q_max(),
                "q": table.column_f64("q")?,
                "cdf": table.column_f64("F")?,
                "simulation": sim,
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    emit(a.output.as_deref(), &text)
}

fn cmd_verify(a: VerifyArgs) -> anyhow::Result<()> {
    let only: Option<Vec<Suite>> = a
        .only
        .map(|v| v.iter().map(|s| s.trim().parse::<Suite>()).collect::<Result<_, _>>())
        .transpose()?;
    let report = verify::run(a.seed, a.trials, only.as_deref())?;
    emit(a.output.as_deref(), &report.to_json_lines())?;
    if !report.passed() {
        for c in report.checks.iter().filter(|c| c.status == verify::Status::Fail) {
            eprintln!("FAIL {} (worst margin {})", c.name, sig9(c.worst_margin));
        }
        return Err(VerifyFailed.into());
    }
    Ok(())
}
