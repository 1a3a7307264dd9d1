use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use contplan::document::{normalize, PlanDocument};
use contplan::planner::{plan, SearchConfig, SearchOutcome};
use contplan::syntax::{parse_domain, parse_problem};
use contplan::validator::validate;

/// Contingency planner: builds branching plans with decision steps and
/// checks them by simulated execution.
#[derive(Parser)]
#[command(name = "contplan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a plan and print it.
    ///
    /// Exit status: 0 complete plan, 2 budget exhausted, 3 no plan exists
    /// in the search space, 1 input error.
    Plan {
        domain: PathBuf,
        problem: PathBuf,
        /// Maximum number of node expansions.
        #[arg(long, default_value_t = 50_000)]
        budget: usize,
        /// Rank charge per source of uncertainty.
        #[arg(long, default_value_t = 1.0)]
        contingency_weight: f64,
        /// Nonzero seeds shuffle sibling order.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print search statistics to stderr.
        #[arg(long)]
        trace: bool,
    },
    /// Execute a plan under every contingency and sampled step orders.
    ///
    /// Exit status: 0 sound, 4 unsound, 1 input error.
    Validate {
        domain: PathBuf,
        problem: PathBuf,
        plan: PathBuf,
        /// Random linearizations per contingency, on top of the canonical one.
        #[arg(long, default_value_t = 8)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also print one row per trial.
        #[arg(long)]
        table: bool,
    },
    /// Print the renaming-invariant normal form of a plan document.
    Normalize { plan: PathBuf },
}

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Plan {
            domain,
            problem,
            budget,
            contingency_weight,
            seed,
            trace,
        } => {
            if budget == 0 {
                return Err("--budget must be at least 1".into());
            }
            if contingency_weight.is_nan() || contingency_weight < 0.0 {
                return Err("--contingency-weight must be nonnegative".into());
            }
            let d = parse_domain(&read(&domain)?).map_err(|e| format!("{}: {e}", domain.display()))?;
            let p = parse_problem(&read(&problem)?).map_err(|e| format!("{}: {e}", problem.display()))?;
            let config = SearchConfig {
                node_budget: budget,
                contingency_weight,
                seed,
            };
            let result = plan(&p, &d, &config);
            if trace {
                let s = &result.stats;
                eprintln!(
                    "expanded {} generated {} peak-queue {}",
                    s.expanded, s.generated, s.peak_queue
                );
            }
            match result.outcome {
                SearchOutcome::Complete(pl) => {
                    print!("{}", PlanDocument::from_plan(&pl).render());
                    Ok(0)
                }
                SearchOutcome::BudgetExhausted => {
                    eprintln!("node budget exhausted after {} expansions", result.stats.expanded);
                    Ok(2)
                }
                SearchOutcome::SearchSpaceExhausted => {
                    eprintln!("no plan: search space exhausted");
                    Ok(3)
                }
            }
        }
        Command::Validate {
            domain,
            problem,
            plan,
            samples,
            seed,
            table,
        } => {
            let d = parse_domain(&read(&domain)?).map_err(|e| format!("{}: {e}", domain.display()))?;
            let p = parse_problem(&read(&problem)?).map_err(|e| format!("{}: {e}", problem.display()))?;
            let doc = PlanDocument::parse(&read(&plan)?).map_err(|e| format!("{}: {e}", plan.display()))?;
            let report = validate(&doc, &p, &d, samples, seed).map_err(|e| e.to_string())?;
            print!("{}", report.summary());
            if table {
                print!("{}", report.table());
            }
            Ok(if report.is_sound() { 0 } else { 4 })
        }
        Command::Normalize { plan } => {
            let doc = PlanDocument::parse(&read(&plan)?).map_err(|e| format!("{}: {e}", plan.display()))?;
            println!("{}", normalize(&doc));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("contplan: {msg}");
            ExitCode::from(1)
        }
    }
}
