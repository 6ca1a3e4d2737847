//! `ppg-smc`: command-line front end for the particle-filter engine.
//!
//! Subcommands:
//! - `run` — estimate a model's target, printing certified bounds;
//! - `bench` — sweep models × particle counts and emit a CSV table;
//! - `validate` — structural and sampled semantic checks on a model;
//! - `compile` — print the compiled graph as JSON or Graphviz dot.
//!
//! Models are named by `.pp` file path, bundled-model name (`niid`),
//! or explicit `zoo:` prefix (`zoo:niid`). Exit codes: 0 success,
//! 1 usage error, 2 model parse/validation failure, 3 degenerate
//! termination (no terminated mass at the horizon). `--seed` falls
//! back to `$PPG_SMC_SEED`, then 0.

use clap::{Parser, Subcommand, ValueEnum};
use ppg_core::{ppg_to_json_string, validate_ppg};
use ppg_dsl::{
    compile, lower_target, model_zoo, parse, parse_expr, resolve_model, to_dot, Compiled,
};
use ppg_engine::ResamplingScheme;
use ppg_estimator::{
    replicate, run_estimate, EstimateReport, EstimatorError, ReplicateReport, RunConfig, Spread,
    TargetFunction, CSV_HEADER,
};
use serde::Serialize;
use std::path::Path;
use std::process::ExitCode;

/// Seed for the sampled-store validation pass that precedes every run;
/// fixed so a model's accept/reject verdict never depends on `--seed`.
const VALIDATE_SAMPLES: usize = 256;
const VALIDATE_SEED: u64 = 1;

#[derive(Parser)]
#[command(
    name = "ppg-smc",
    version,
    about = "Bounded-estimate particle filtering for probabilistic program graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the filter on one model and print the certified estimate.
    Run(RunArgs),
    /// Sweep models × particle counts; CSV table on stdout.
    Bench(BenchArgs),
    /// Check a model: parse, compile, and validate the graph.
    Validate(ModelArgs),
    /// Compile a model and print the graph as JSON or Graphviz dot.
    Compile(CompileArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Model: .pp file path, bundled name, or zoo:<name>.
    #[arg(long)]
    model: String,
    /// Particle count N.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    particles: u64,
    /// Step horizon t. Defaults to the bundled model's natural horizon;
    /// required for file models.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    horizon: Option<u64>,
    /// RNG seed (fallback: $PPG_SMC_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Resampling scheme.
    #[arg(long, value_enum, default_value_t = SchemeArg::Systematic)]
    scheme: SchemeArg,
    /// Expression overriding the model's return target, e.g. "x + 1 > 0".
    #[arg(long)]
    target: Option<String>,
    /// Declared upper bound M on the target's range [0, M]; enables a
    /// finite upper estimate before all mass has terminated.
    #[arg(long)]
    bound: Option<f64>,
    /// Independent replicates (replicate 0 reuses the base seed).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    replicates: u64,
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputArg::Table)]
    output: OutputArg,
    /// Worker threads; 0 = sequential reference runner.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(clap::Args)]
struct BenchArgs {
    /// Model to include (repeatable); default: the full bundled zoo.
    #[arg(long = "model")]
    models: Vec<String>,
    /// Particle count to sweep (repeatable).
    #[arg(long = "particles", default_values_t = vec![1_000], value_parser = clap::value_parser!(u64).range(1..))]
    particles: Vec<u64>,
    /// Horizon override; default: each bundled model's natural horizon.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    horizon: Option<u64>,
    /// RNG seed (fallback: $PPG_SMC_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Resampling scheme.
    #[arg(long, value_enum, default_value_t = SchemeArg::Systematic)]
    scheme: SchemeArg,
    /// Replicates per table cell; cells report replicate means.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    replicates: u64,
    /// Worker threads; 0 = sequential reference runner.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(clap::Args)]
struct ModelArgs {
    /// Model: .pp file path, bundled name, or zoo:<name>.
    #[arg(long)]
    model: String,
    /// Seed for the sampled semantic checks.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(clap::Args)]
struct CompileArgs {
    /// Model: .pp file path, bundled name, or zoo:<name>.
    #[arg(long)]
    model: String,
    /// Output format.
    #[arg(long, value_enum, default_value_t = CompileFormat::Json)]
    output: CompileFormat,
}

#[derive(ValueEnum, Clone, Copy)]
enum SchemeArg {
    Systematic,
    Multinomial,
}

impl From<SchemeArg> for ResamplingScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Systematic => ResamplingScheme::Systematic,
            SchemeArg::Multinomial => ResamplingScheme::Multinomial,
        }
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum OutputArg {
    Table,
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy)]
enum CompileFormat {
    Json,
    Dot,
}

/// An error bound for the process exit code.
#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: 1,
        message: message.into(),
    }
}

fn invalid(message: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        message: message.into(),
    }
}

impl From<EstimatorError> for CliError {
    fn from(e: EstimatorError) -> Self {
        let code = match &e {
            // Degenerate termination mass gets its own exit code so
            // scripts can distinguish "raise t" from "fix the model".
            EstimatorError::NoTerminatedWeight { .. } => 3,
            // A bad --bound is a flag problem, not a model problem.
            EstimatorError::BadBound { .. } => 1,
            _ => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

/// A model ready to run: compiled graph plus run defaults.
#[derive(Debug)]
struct ResolvedModel {
    /// Bundled name or file stem; lands in the report's `model` field.
    name: Option<String>,
    compiled: Compiled,
    /// The model's own target (from `return`), if it has one.
    target: Option<TargetFunction>,
    /// Natural horizon for bundled models.
    horizon: Option<u64>,
}

/// Resolve `zoo:<name>`, a bare bundled name, or a `.pp` file path.
fn resolve(model: &str) -> Result<ResolvedModel, CliError> {
    if let Some(name) = model.strip_prefix("zoo:") {
        return from_zoo(name);
    }
    let path = Path::new(model);
    if path.exists() {
        return from_file(path);
    }
    from_zoo(model)
        .map_err(|e| invalid(format!("{model}: no such file, and {message}", message = e.message)))
}

fn from_zoo(name: &str) -> Result<ResolvedModel, CliError> {
    let m = resolve_model(name).map_err(|e| invalid(e.to_string()))?;
    Ok(ResolvedModel {
        name: Some(m.name.to_string()),
        compiled: m.compiled,
        target: Some(m.target),
        horizon: Some(m.horizon as u64),
    })
}

fn from_file(path: &Path) -> Result<ResolvedModel, CliError> {
    let source = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let ast = parse(&source).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let compiled = compile(&ast).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let target = compiled.target.clone().map(TargetFunction::new);
    Ok(ResolvedModel {
        name: path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned()),
        compiled,
        target,
        horizon: None,
    })
}

/// Reject graphs that fail structural or sampled semantic checks.
fn ensure_valid(m: &ResolvedModel) -> Result<(), CliError> {
    let report = validate_ppg(&m.compiled.ppg, VALIDATE_SAMPLES, VALIDATE_SEED);
    if report.is_valid() {
        Ok(())
    } else {
        Err(invalid(format!(
            "{}: {report}",
            m.name.as_deref().unwrap_or("model")
        )))
    }
}

/// `--seed` flag, else `$PPG_SMC_SEED`, else 0.
fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("PPG_SMC_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("PPG_SMC_SEED must be an unsigned integer (got {v:?})"))),
        Err(_) => Ok(0),
    }
}

/// Build the target: `--target` override, else the model's `return`.
fn resolve_target(
    m: &ResolvedModel,
    target: Option<&str>,
    bound: Option<f64>,
) -> Result<TargetFunction, CliError> {
    let h = match target {
        Some(src) => {
            let expr = parse_expr(src).map_err(|e| usage(format!("--target: {e}")))?;
            lower_target(&expr, m.compiled.ppg.var_names())
                .map_err(|e| usage(format!("--target: {e}")))?
        }
        None => match &m.target {
            Some(t) => t.h().clone(),
            None => {
                return Err(invalid(
                    "model has no return expression; pass --target".to_string(),
                ))
            }
        },
    };
    match bound {
        Some(b) => Ok(TargetFunction::bounded(h, b)?),
        // Keep the model's own bound when the target is untouched.
        None if target.is_none() => Ok(m.target.clone().expect("checked above")),
        None => Ok(TargetFunction::new(h)),
    }
}

/// Versioning envelope for JSON reports; the schema tag comes first.
#[derive(Serialize)]
struct Versioned<T: Serialize> {
    report_schema: &'static str,
    #[serde(flatten)]
    body: T,
}

fn to_versioned_json<T: Serialize>(schema: &'static str, body: &T) -> String {
    serde_json::to_string_pretty(&Versioned {
        report_schema: schema,
        body,
    })
    .expect("report serializes")
}

fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let model = resolve(&args.model)?;
    ensure_valid(&model)?;
    let horizon = args
        .horizon
        .or(model.horizon)
        .ok_or_else(|| usage("--horizon is required for file models"))?;
    let seed = resolve_seed(args.seed)?;
    let target = resolve_target(&model, args.target.as_deref(), args.bound)?;
    let cfg = RunConfig {
        graph: &model.compiled.ppg,
        start: model.compiled.start,
        horizon: horizon as usize,
        n_particles: args.particles as usize,
        scheme: args.scheme.into(),
        seed,
        threads: args.threads,
    };
    if args.replicates == 1 {
        let mut report = run_estimate(&cfg, &target)?;
        report.model = model.name.clone();
        match args.output {
            OutputArg::Json => println!("{}", to_versioned_json("ppg-smc.report/v1", &report)),
            OutputArg::Csv => println!("{CSV_HEADER}\n{}", report.csv_row()),
            OutputArg::Table => print_run_table(&report),
        }
    } else {
        let mut rep = replicate(&cfg, &target, args.replicates as usize)?;
        for run in &mut rep.runs {
            run.model = model.name.clone();
        }
        match args.output {
            OutputArg::Json => println!("{}", to_versioned_json("ppg-smc.replicates/v1", &rep)),
            OutputArg::Csv => {
                println!("{CSV_HEADER}");
                for run in &rep.runs {
                    println!("{}", run.csv_row());
                }
            }
            OutputArg::Table => print_replicate_table(&rep, seed),
        }
    }
    Ok(())
}

fn print_run_table(r: &EstimateReport) {
    if let Some(name) = &r.model {
        println!("model            : {name}");
    }
    println!(
        "config           : N = {}, t = {}, seed = {}, scheme = {}",
        r.n_particles, r.horizon, r.seed, r.scheme
    );
    println!("beta_l           : {:.6}", r.beta_l);
    match r.beta_u {
        Some(u) => println!("beta_u           : {u:.6}"),
        None => println!("beta_u           : inf (unbounded target, mass still live)"),
    }
    println!("alpha_t          : {:.6}", r.alpha_t);
    println!("termination_mass : {:.6}", r.termination_mass);
    println!("ess              : {:.1}", r.ess);
    println!("degenerate steps : {}", r.degenerate_weight_steps);
    println!("wall_time_s      : {:.3}", r.wall_time_s);
}

fn spread_line(name: &str, s: &Spread) {
    println!(
        "{name:<17}: mean {:.6}  std {:.6}  min {:.6}  max {:.6}",
        s.mean, s.std, s.min, s.max
    );
}

fn print_replicate_table(rep: &ReplicateReport, base_seed: u64) {
    let first = &rep.runs[0];
    if let Some(name) = &first.model {
        println!("model            : {name}");
    }
    println!(
        "config           : N = {}, t = {}, base seed = {}, scheme = {}, replicates = {}",
        first.n_particles, first.horizon, base_seed, first.scheme, rep.summary.replicates
    );
    spread_line("beta_l", &rep.summary.beta_l);
    match &rep.summary.beta_u {
        Some(s) => spread_line("beta_u", s),
        None => println!("beta_u           : inf in at least one replicate"),
    }
    spread_line("alpha_t", &rep.summary.alpha_t);
    spread_line("ess", &rep.summary.ess);
}

fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    let names: Vec<String> = if args.models.is_empty() {
        model_zoo().into_iter().map(|m| m.name.to_string()).collect()
    } else {
        args.models.clone()
    };
    let seed = resolve_seed(args.seed)?;
    println!("model,n_particles,wall_time_s,beta_l,beta_u,ess");
    for name in &names {
        let model = resolve(name)?;
        ensure_valid(&model)?;
        let horizon = args
            .horizon
            .or(model.horizon)
            .ok_or_else(|| usage(format!("{name}: file models need --horizon")))?;
        let target = resolve_target(&model, None, None)?;
        for &n in &args.particles {
            let cfg = RunConfig {
                graph: &model.compiled.ppg,
                start: model.compiled.start,
                horizon: horizon as usize,
                n_particles: n as usize,
                scheme: args.scheme.into(),
                seed,
                threads: args.threads,
            };
            let rep = replicate(&cfg, &target, args.replicates as usize)?;
            let time = mean(rep.runs.iter().map(|r| r.wall_time_s));
            let beta_u = match rep.summary.beta_u {
                Some(s) => format!("{:.6}", s.mean),
                None => "inf".to_string(),
            };
            println!(
                "{},{},{:.4},{:.6},{},{:.1}",
                model.name.as_deref().unwrap_or(name),
                n,
                time,
                rep.summary.beta_l.mean,
                beta_u,
                rep.summary.ess.mean,
            );
        }
    }
    Ok(())
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn cmd_validate(args: &ModelArgs) -> Result<(), CliError> {
    let model = resolve(&args.model)?;
    let seed = match args.seed {
        Some(s) => s,
        None => VALIDATE_SEED,
    };
    let g = &model.compiled.ppg;
    let report = validate_ppg(g, VALIDATE_SAMPLES, seed);
    let name = model.name.as_deref().unwrap_or("model");
    if report.is_valid() {
        println!(
            "{name}: {report}; {} checkpoints, {} transitions, {} variables",
            g.checkpoint_count(),
            g.transitions().len(),
            g.var_names().len()
        );
        Ok(())
    } else {
        Err(invalid(format!("{name}: {report}")))
    }
}

fn cmd_compile(args: &CompileArgs) -> Result<(), CliError> {
    let model = resolve(&args.model)?;
    match args.output {
        CompileFormat::Json => println!("{}", ppg_to_json_string(&model.compiled.ppg)),
        CompileFormat::Dot => println!("{}", to_dot(&model.compiled.ppg)),
    }
    Ok(())
}

fn main() -> ExitCode {
    // Die quietly when stdout closes early (`ppg-smc compile … | head`):
    // Rust ignores SIGPIPE by default, turning EPIPE into a panic.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help/--version land here too; those are successes.
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Compile(args) => cmd_compile(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
