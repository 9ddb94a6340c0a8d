//! Command-line front end: load a knowledgebase, solve or compare
//! allocation strategies, and validate documents and allocations.
//!
//! Exit codes: 0 success, 2 parse/validation problems, 3 infeasible
//! requirements, 4 solver non-convergence.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use output::{format_g, CompareRow};
use vnfalloc::ca::{
    baseline_absolute_advantage, baseline_even_split, check_ca_structure, StructureCheck,
};
use vnfalloc::kb::{self, KbDocument};
use vnfalloc::model::{
    validate_allocation, Allocation, CapacityModel, UtilitySpec,
};
use vnfalloc::error::SolveError;
use vnfalloc::report::{SolveReport, Strategy};
use vnfalloc::solver::{
    compare_strategies, evaluate_fixed, lp::solve_requirements_lp, oracle::brute_force_oracle,
    oracle::OracleConfig, solve_ca, solve_general,
};

const EXIT_OK: u8 = 0;
const EXIT_INVALID: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_NO_CONVERGENCE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "vnfalloc",
    version,
    about = "Allocate fractions of heterogeneous machines to VNFs by comparative advantage"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one strategy and report the allocation
    Solve(RunArgs),
    /// Run every strategy on the same instance and rank them by utility
    Compare(RunArgs),
    /// Check a knowledgebase, and optionally an allocation against it
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Knowledgebase JSON file
    #[arg(long)]
    kb: PathBuf,
    /// Machines to include, comma-separated, in model order (default: all)
    #[arg(long, value_delimiter = ',')]
    machines: Option<Vec<String>>,
    /// VNFs to include, comma-separated, in model order (default: all)
    #[arg(long, value_delimiter = ',')]
    vnfs: Option<Vec<String>>,
    #[arg(long, value_enum, default_value_t = UtilityArg::CobbDouglas)]
    utility: UtilityArg,
    /// Cobb-Douglas exponents, one per VNF (default uniform; normalized
    /// with a warning when the sum is not 1)
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    /// Linear utility weights, one per VNF (default all 1)
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Per-VNF throughput floors; linear utility only
    #[arg(long, value_delimiter = ',')]
    requirements: Option<Vec<f64>>,
    /// Strategy for `solve` (default ca); `compare` always runs all of them
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    /// Grid resolution for the oracle strategy
    #[arg(long, default_value_t = 0.05)]
    oracle_step: f64,
    #[arg(long, value_enum, default_value_t = OutputArg::Table)]
    output: OutputArg,
    /// Write the report to this file instead of stdout
    #[arg(long)]
    out_file: Option<PathBuf>,
    /// Echoed into JSON reports, for bookkeeping randomized fixtures
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Knowledgebase JSON file
    #[arg(long)]
    kb: PathBuf,
    /// Allocation JSON file ({"machines":[...],"vnfs":[...],"u":[[...]]})
    /// to check against the knowledgebase
    allocation: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum UtilityArg {
    CobbDouglas,
    Linear,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Ca,
    Even,
    Absolute,
    General,
    Oracle,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputArg {
    Table,
    Json,
    Csv,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve(args) => cmd_solve(&args),
        Command::Compare(args) => cmd_compare(&args),
        Command::Validate(args) => cmd_validate(&args),
    };
    ExitCode::from(code)
}

fn invalid(message: impl std::fmt::Display) -> u8 {
    eprintln!("error: {message}");
    EXIT_INVALID
}

fn solve_exit(err: &SolveError) -> u8 {
    match err {
        SolveError::Infeasible(_) => EXIT_INFEASIBLE,
        // The pivot cap is the only way a bounded instance reports
        // Unbounded, so it maps to non-convergence rather than bad input.
        SolveError::Unbounded => EXIT_NO_CONVERGENCE,
        _ => EXIT_INVALID,
    }
}

fn load_inputs(args: &RunArgs) -> Result<(KbDocument, CapacityModel), String> {
    let doc = kb::read_document(&args.kb).map_err(|e| e.to_string())?;
    let model = kb::build_model_subset(&doc, args.machines.as_deref(), args.vnfs.as_deref())
        .map_err(|e| e.to_string())?;
    Ok((doc, model))
}

fn build_spec(args: &RunArgs, m_vnfs: usize) -> Result<UtilitySpec, String> {
    match args.utility {
        UtilityArg::CobbDouglas => {
            if args.weights.is_some() {
                return Err("--weights applies to --utility linear; use --alpha".to_string());
            }
            if args.requirements.is_some() {
                return Err("--requirements applies to --utility linear".to_string());
            }
            let mut alpha = args
                .alpha
                .clone()
                .unwrap_or_else(|| vec![1.0 / m_vnfs as f64; m_vnfs]);
            if alpha.len() != m_vnfs {
                return Err(format!(
                    "expected {m_vnfs} alpha values (one per vnf), got {}",
                    alpha.len()
                ));
            }
            let sum: f64 = alpha.iter().sum();
            if !sum.is_finite() || sum <= 0.0 {
                return Err(format!("alpha values must sum to a positive number, got {sum}"));
            }
            if (sum - 1.0).abs() > 1e-9 {
                eprintln!("warning: alpha sums to {}; normalizing", format_g(sum));
                for a in &mut alpha {
                    *a /= sum;
                }
            }
            UtilitySpec::cobb_douglas(alpha).map_err(|e| e.to_string())
        }
        UtilityArg::Linear => {
            if args.alpha.is_some() {
                return Err("--alpha applies to --utility cobb-douglas; use --weights".to_string());
            }
            let weights = args.weights.clone().unwrap_or_else(|| vec![1.0; m_vnfs]);
            if weights.len() != m_vnfs {
                return Err(format!("expected {m_vnfs} weights, got {}", weights.len()));
            }
            match args.requirements.clone() {
                Some(requirements) => {
                    if requirements.len() != m_vnfs {
                        return Err(format!(
                            "expected {m_vnfs} requirements, got {}",
                            requirements.len()
                        ));
                    }
                    UtilitySpec::linear_with_requirements(weights, requirements)
                        .map_err(|e| e.to_string())
                }
                None => UtilitySpec::linear(weights).map_err(|e| e.to_string()),
            }
        }
    }
}

fn run_strategy(
    args: &RunArgs,
    strategy: StrategyArg,
    model: &CapacityModel,
    spec: &UtilitySpec,
) -> Result<SolveReport, SolveError> {
    match strategy {
        StrategyArg::Ca => solve_ca(model, spec),
        StrategyArg::Even => {
            evaluate_fixed(Strategy::EvenSplit, baseline_even_split(model), model, spec)
        }
        StrategyArg::Absolute => baseline_absolute_advantage(model)
            .and_then(|u| evaluate_fixed(Strategy::AbsoluteAdvantage, u, model, spec)),
        StrategyArg::General => match spec {
            UtilitySpec::CobbDouglas { .. } => solve_general(model, spec),
            UtilitySpec::Linear { .. } => solve_requirements_lp(model, spec),
        },
        StrategyArg::Oracle => brute_force_oracle(
            model,
            spec,
            &OracleConfig {
                step: args.oracle_step,
                ..OracleConfig::default()
            },
        ),
        StrategyArg::All => unreachable!("rejected before solving"),
    }
}

fn write_output(out_file: Option<&Path>, text: &str) -> Result<(), String> {
    match out_file {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_solve(args: &RunArgs) -> u8 {
    let strategy = args.strategy.unwrap_or(StrategyArg::Ca);
    if strategy == StrategyArg::All {
        return invalid("--strategy all applies to `compare`; pick one strategy for `solve`");
    }
    let (doc, model) = match load_inputs(args) {
        Ok(v) => v,
        Err(e) => return invalid(e),
    };
    let spec = match build_spec(args, model.m_vnfs()) {
        Ok(v) => v,
        Err(e) => return invalid(e),
    };
    let report = match run_strategy(args, strategy, &model, &spec) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return solve_exit(&e);
        }
    };
    let text = match args.output {
        OutputArg::Table => output::solve_table(&report, &model, &doc.units),
        OutputArg::Json => output::solve_json(&report, &model, &doc.units, args.seed),
        OutputArg::Csv => output::solve_csv(&report, &model),
    };
    if let Err(e) = write_output(args.out_file.as_deref(), &text) {
        return invalid(e);
    }
    if !report.diagnostics.converged {
        eprintln!("warning: solver stopped without converging");
        return EXIT_NO_CONVERGENCE;
    }
    EXIT_OK
}

/// Structure verdict for a compare row or validate run: only linear
/// models with a two-sided shape admit the threshold pattern.
fn structure_of(model: &CapacityModel, u: &Allocation) -> Option<StructureCheck> {
    if !model.linear_only() || (model.m_vnfs() != 2 && model.n_machines() != 2) {
        return None;
    }
    check_ca_structure(u, model).ok()
}

fn cmd_compare(args: &RunArgs) -> u8 {
    if args.strategy.is_some_and(|s| s != StrategyArg::All) {
        eprintln!("warning: `compare` always runs every strategy; --strategy ignored");
    }
    let (doc, model) = match load_inputs(args) {
        Ok(v) => v,
        Err(e) => return invalid(e),
    };
    let spec = match build_spec(args, model.m_vnfs()) {
        Ok(v) => v,
        Err(e) => return invalid(e),
    };
    let oracle_config = OracleConfig {
        step: args.oracle_step,
        ..OracleConfig::default()
    };
    let outcomes = compare_strategies(&model, &spec, Some(&oracle_config));
    let rows: Vec<CompareRow<'_>> = outcomes
        .iter()
        .map(|outcome| CompareRow {
            structure: outcome.outcome.as_ref().ok().and_then(|r| {
                r.diagnostics
                    .structure
                    .clone()
                    .or_else(|| structure_of(&model, &r.allocation))
            }),
            outcome,
        })
        .collect();
    let text = match args.output {
        OutputArg::Table => output::compare_table(&rows, &model, &doc.units),
        OutputArg::Json => output::compare_json(&rows, &model, &doc.units, args.seed),
        OutputArg::Csv => output::compare_csv(&rows, &model),
    };
    if let Err(e) = write_output(args.out_file.as_deref(), &text) {
        return invalid(e);
    }
    for outcome in &outcomes {
        if let Err(e) = &outcome.outcome {
            eprintln!("warning: strategy {} failed: {e}", outcome.strategy.label());
        }
    }
    if outcomes.iter().any(|o| o.outcome.is_ok()) {
        EXIT_OK
    } else if outcomes
        .iter()
        .any(|o| matches!(o.outcome, Err(SolveError::Infeasible(_))))
    {
        EXIT_INFEASIBLE
    } else {
        EXIT_INVALID
    }
}

/// On-disk allocation report: the matrix plus the names that give its
/// rows and columns meaning. Extra fields (e.g. from a solve report) are
/// ignored.
#[derive(Deserialize)]
struct AllocationFile {
    machines: Vec<String>,
    vnfs: Vec<String>,
    u: Vec<Vec<f64>>,
}

fn cmd_validate(args: &ValidateArgs) -> u8 {
    let doc = match kb::read_document(&args.kb) {
        Ok(doc) => doc,
        Err(e) => return invalid(e),
    };
    let model = match kb::build_model(&doc) {
        Ok(model) => model,
        Err(e) => return invalid(e),
    };
    println!(
        "valid, {} machines, {} vnfs, {}",
        model.n_machines(),
        model.m_vnfs(),
        if model.linear_only() { "linear" } else { "nonlinear" }
    );

    let Some(path) = &args.allocation else {
        return EXIT_OK;
    };
    let text = match std::fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) => return invalid(format!("cannot read {}: {e}", path.display())),
    };
    let file: AllocationFile = match serde_json::from_str(&text) {
        Ok(file) => file,
        Err(e) => return invalid(format!("{}: {e}", path.display())),
    };
    if file.u.len() != file.machines.len()
        || file.u.iter().any(|row| row.len() != file.vnfs.len())
    {
        return invalid(format!(
            "{}: u must be a {} x {} matrix matching the machine and vnf lists",
            path.display(),
            file.machines.len(),
            file.vnfs.len()
        ));
    }
    // Rebuild the model in the allocation's own name order so row i /
    // column j of u line up with its machine i / vnf j.
    let model = match kb::build_model_subset(&doc, Some(&file.machines), Some(&file.vnfs)) {
        Ok(model) => model,
        Err(e) => return invalid(e),
    };
    let allocation = Allocation::new(file.u);
    let violations = match validate_allocation(&allocation, &model) {
        Ok(violations) => violations,
        Err(e) => return invalid(e),
    };
    match structure_of(&model, &allocation) {
        Some(check) => {
            let threshold = check
                .threshold
                .map_or_else(|| "ambiguous".to_string(), |t| format!("threshold {t}"));
            println!(
                "structure: {} ({threshold})",
                output::structure_summary(Some(&check))
            );
        }
        None => println!("structure: n/a"),
    }
    if violations.is_empty() {
        println!("allocation: feasible");
        EXIT_OK
    } else {
        for violation in &violations {
            println!("allocation: {violation}");
        }
        EXIT_INVALID
    }
}
