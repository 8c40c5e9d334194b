//! Command-line front end tying ingestion, analysis, transformation, solving
//! and kernel emission together with machine-readable reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sptrsv_core::{
    apply_plan, build_levels, code_size, compute_plan_avg, compute_plan_manual, default_rhs, emit,
    extract_lower, read_matrix_market, solve_levels, solve_reference, to_affine, verify,
    AffineSystem, DiagPolicy, Guards, LevelSchedule, LowerCsr, Rhs, TransformReport,
};

#[derive(Parser)]
#[command(
    name = "sptrsv",
    about = "Transform the dependency graph of a sparse lower-triangular system, then solve, verify or emit a specialized kernel",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report baseline level structure and costs
    Analyze(RunConfig),
    /// Compute and apply a rewrite plan, report before/after metrics
    Transform(RunConfig),
    /// Solve with the level executor and verify against the serial reference
    Solve(RunConfig),
    /// Emit specialized straight-line solver code
    Codegen(RunConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    None,
    Avg,
    Manual,
}

#[derive(Args)]
struct RunConfig {
    /// Matrix Market file with the system matrix
    #[arg(long)]
    matrix: PathBuf,

    /// Right-hand side file, one value per line; defaults to the row sums
    #[arg(long)]
    rhs: Option<PathBuf>,

    /// Rewrite strategy to apply before the command runs
    #[arg(long, value_enum, default_value_t = StrategyArg::None)]
    strategy: StrategyArg,

    /// Levels per group for the manual strategy
    #[arg(long, default_value_t = 10)]
    group_size: usize,

    /// Guard: maximum levels a row may travel
    #[arg(long)]
    max_distance: Option<usize>,

    /// Guard: reject rewrites keeping alpha or more dependencies
    #[arg(long)]
    alpha: Option<usize>,

    /// Guard: maximum dependency index span
    #[arg(long)]
    beta: Option<usize>,

    /// Guard: maximum folded coefficient magnitude
    #[arg(long)]
    coeff_cap: Option<f64>,

    /// Guard: only rewrite rows on the critical path
    #[arg(long)]
    critical_path_only: bool,

    /// Worker threads for the level executor
    #[arg(long, default_value_t = 1)]
    workers: usize,

    /// Verification tolerance on the normwise relative error
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,

    /// Write the metrics report as JSON
    #[arg(long)]
    report: Option<PathBuf>,

    /// Write the pre-transform level profile as CSV
    #[arg(long)]
    profile_before: Option<PathBuf>,

    /// Write the post-transform level profile as CSV
    #[arg(long)]
    profile_after: Option<PathBuf>,

    /// Write the solution vector, one value per line
    #[arg(long)]
    solution: Option<PathBuf>,

    /// Write the emitted kernel source
    #[arg(long)]
    emit: Option<PathBuf>,
}

impl RunConfig {
    fn guards(&self) -> Guards {
        Guards {
            max_rewriting_distance: self.max_distance,
            max_indegree_alpha: self.alpha,
            max_coeff_magnitude: self.coeff_cap,
            max_index_span_beta: self.beta,
            critical_path_only: self.critical_path_only,
        }
    }

    fn strategy_name(&self) -> String {
        match self.strategy {
            StrategyArg::None => "none".into(),
            StrategyArg::Avg => "avg".into(),
            StrategyArg::Manual => format!("manual(g={})", self.group_size),
        }
    }
}

/// Report schema shared by every subcommand.
#[derive(Serialize)]
struct Report {
    matrix: String,
    n: usize,
    nnz_lower: usize,
    strategy: String,
    threshold: f64,
    num_levels_before: usize,
    num_levels_after: usize,
    avg_level_cost_before: f64,
    avg_level_cost_after: f64,
    total_level_cost_before: u64,
    total_level_cost_after: u64,
    rows_rewritten: usize,
    barriers: usize,
    max_rewriting_distance_used: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    code_size_bytes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verify: Option<VerifySection>,
}

#[derive(Serialize)]
struct VerifySection {
    max_abs_error: f64,
    max_rel_error: f64,
    residual_inf: f64,
    pass: bool,
}

/// Everything the subcommands share: the loaded system, its schedules, and
/// the transform outcome when a strategy was requested.
struct Pipeline {
    matrix: Arc<LowerCsr>,
    rhs: Rhs,
    system: AffineSystem,
    schedule: LevelSchedule,
    baseline: LevelSchedule,
    strategy_name: String,
    threshold: f64,
    transform: Option<TransformReport>,
}

fn load(config: &RunConfig, apply_strategy: bool) -> Result<Pipeline> {
    let parsed = read_matrix_market(&config.matrix)
        .with_context(|| format!("reading {}", config.matrix.display()))?;
    if parsed.rows != parsed.cols {
        bail!(
            "matrix {} is {}x{}, expected square",
            config.matrix.display(),
            parsed.rows,
            parsed.cols
        );
    }
    let matrix = Arc::new(extract_lower(
        &parsed.entries,
        parsed.rows,
        DiagPolicy::RequireNonzero,
    )?);
    let rhs = match &config.rhs {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Rhs::parse(&text, matrix.n())?
        }
        None => default_rhs(&matrix),
    };

    let baseline = build_levels(&matrix);
    let threshold = baseline.avg_level_cost();
    let mut system = to_affine(matrix.clone(), rhs.clone());

    let plan = if apply_strategy {
        let guards = config.guards();
        match config.strategy {
            StrategyArg::None => None,
            StrategyArg::Avg => Some(compute_plan_avg(&system, &baseline, &guards)),
            StrategyArg::Manual => {
                if config.group_size < 2 {
                    bail!("--group-size must be at least 2");
                }
                Some(compute_plan_manual(
                    &system,
                    &baseline,
                    config.group_size,
                    &guards,
                ))
            }
        }
    } else {
        None
    };

    let (schedule, transform) = match &plan {
        Some(plan) => {
            let (schedule, report) = apply_plan(&mut system, &baseline, plan)?;
            (schedule, Some(report))
        }
        None => (baseline.clone(), None),
    };

    Ok(Pipeline {
        matrix,
        rhs,
        system,
        schedule,
        baseline,
        strategy_name: if apply_strategy {
            config.strategy_name()
        } else {
            "none".into()
        },
        threshold,
        transform,
    })
}

impl Pipeline {
    fn report(&self, config: &RunConfig) -> Report {
        let before = &self.baseline;
        let after = &self.schedule;
        Report {
            matrix: config.matrix.display().to_string(),
            n: self.matrix.n(),
            nnz_lower: self.matrix.nnz(),
            strategy: self.strategy_name.clone(),
            threshold: self.threshold,
            num_levels_before: before.num_levels(),
            num_levels_after: after.num_levels(),
            avg_level_cost_before: before.avg_level_cost(),
            avg_level_cost_after: after.avg_level_cost(),
            total_level_cost_before: before.total_cost(),
            total_level_cost_after: after.total_cost(),
            rows_rewritten: self.transform.as_ref().map_or(0, |t| t.rows_rewritten),
            barriers: after.num_levels().saturating_sub(1),
            max_rewriting_distance_used: self
                .transform
                .as_ref()
                .map_or(0, |t| t.max_rewriting_distance_used),
            code_size_bytes: None,
            verify: None,
        }
    }

    fn write_profiles(&self, config: &RunConfig) -> Result<()> {
        if let Some(path) = &config.profile_before {
            write_text(path, &self.baseline.profile_csv())?;
        }
        if let Some(path) = &config.profile_after {
            write_text(path, &self.schedule.profile_csv())?;
        }
        Ok(())
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_report(path: Option<&PathBuf>, report: &Report) -> Result<()> {
    let json = serde_json::to_string_pretty(report)?;
    match path {
        Some(path) => write_text(path, &format!("{json}\n")),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn write_solution(path: &Path, x: &[f64]) -> Result<()> {
    let mut text = String::with_capacity(x.len() * 24);
    for v in x {
        text.push_str(&format!("{v:.16e}\n"));
    }
    write_text(path, &text)
}

fn cmd_analyze(config: &RunConfig) -> Result<ExitCode> {
    let pipeline = load(config, false)?;
    pipeline.write_profiles(config)?;
    write_report(config.report.as_ref(), &pipeline.report(config))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_transform(config: &RunConfig) -> Result<ExitCode> {
    if config.strategy == StrategyArg::None {
        bail!("transform requires --strategy avg or --strategy manual");
    }
    let pipeline = load(config, true)?;
    pipeline.write_profiles(config)?;
    let mut report = pipeline.report(config);
    if let Some(path) = &config.emit {
        let kernel = emit(&pipeline.system, &pipeline.schedule, None);
        report.code_size_bytes = Some(code_size(&kernel));
        write_text(path, &kernel.source_text)?;
    }
    write_report(config.report.as_ref(), &report)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve(config: &RunConfig) -> Result<ExitCode> {
    let pipeline = load(config, true)?;
    pipeline.write_profiles(config)?;

    let result = solve_levels(&pipeline.system, &pipeline.schedule, config.workers)?;
    let reference = solve_reference(&pipeline.matrix, &pipeline.rhs);
    let check = verify(
        &result.x,
        &reference,
        &pipeline.matrix,
        &pipeline.rhs,
        config.tol,
    );

    if let Some(path) = &config.solution {
        write_solution(path, &result.x)?;
    }
    let mut report = pipeline.report(config);
    report.verify = Some(VerifySection {
        max_abs_error: check.max_abs_error,
        max_rel_error: check.max_rel_error,
        residual_inf: check.residual_inf,
        pass: check.pass,
    });
    write_report(config.report.as_ref(), &report)?;

    if check.pass {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "verification failed: max_abs_error={:e} max_rel_error={:e} residual_inf={:e} tol={:e}",
            check.max_abs_error, check.max_rel_error, check.residual_inf, config.tol
        );
        Ok(ExitCode::FAILURE)
    }
}

fn cmd_codegen(config: &RunConfig) -> Result<ExitCode> {
    let Some(emit_path) = &config.emit else {
        bail!("codegen requires --emit PATH");
    };
    let pipeline = load(config, true)?;
    pipeline.write_profiles(config)?;
    let kernel = emit(&pipeline.system, &pipeline.schedule, None);
    write_text(emit_path, &kernel.source_text)?;
    let mut report = pipeline.report(config);
    report.code_size_bytes = Some(code_size(&kernel));
    write_report(config.report.as_ref(), &report)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Analyze(config) => cmd_analyze(config),
        Command::Transform(config) => cmd_transform(config),
        Command::Solve(config) => cmd_solve(config),
        Command::Codegen(config) => cmd_codegen(config),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
