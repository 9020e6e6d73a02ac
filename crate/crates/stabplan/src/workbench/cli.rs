//! The thin command-line front end. Each verb wraps library calls; all
//! outputs are CSV or structured text under `--out`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::linearize::MetricTag;
use crate::network::UnitState;
use crate::planning::{validate_solution, CostConfig, PlanningOptions, PlanningSolution};
use crate::shortcircuit::{scc_iterative, SccState};
use crate::strength::gscr;
use crate::workbench::pipeline::{
    case_comparison, plan_once, run_active_sampling, RunConfig,
};
use crate::workbench::{casefile, coeffs as coeff_io, reports, treefile};

#[derive(Parser)]
#[command(
    name = "stabplan",
    about = "Condenser and grid-forming storage planning under fault-current and grid-strength limits",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonIo {
    /// Case file (TOML).
    #[arg(long)]
    case: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Fault-current table and iteration traces at monitored (or all) buses.
    Scc {
        #[command(flatten)]
        io: CommonIo,
        /// Fault bus; all monitored buses when omitted, every bus with
        /// `--all`.
        #[arg(long)]
        bus: Option<usize>,
        #[arg(long, default_value_t = false)]
        all: bool,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, default_value_t = 60)]
        k_max: usize,
    },
    /// Grid-strength series over a scenario tree.
    Gscr {
        #[command(flatten)]
        io: CommonIo,
        /// Tree file; defaults to a single node on the base profiles.
        #[arg(long)]
        tree: Option<PathBuf>,
    },
    /// Fit stability surrogates by planner-in-the-loop sampling.
    Linearize {
        #[command(flatten)]
        io: CommonIo,
        #[arg(long)]
        tree: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        m_max: usize,
        #[arg(long, default_value_t = 0.005)]
        gap: f64,
    },
    /// Solve the planning MILP under fitted surrogates.
    Plan {
        #[command(flatten)]
        io: CommonIo,
        #[arg(long)]
        tree: Option<PathBuf>,
        /// Coefficient file from `linearize`.
        #[arg(long)]
        coeffs: PathBuf,
        #[arg(long, default_value_t = 0.005)]
        gap: f64,
        #[arg(long, default_value_t = false)]
        no_scc: bool,
        #[arg(long, default_value_t = false)]
        no_gscr: bool,
        #[arg(long, default_value_t = false)]
        no_sc: bool,
        #[arg(long, default_value_t = false)]
        no_gfm: bool,
    },
    /// Exact-metric audit of a saved solution.
    Validate {
        #[command(flatten)]
        io: CommonIo,
        #[arg(long)]
        tree: Option<PathBuf>,
        /// Solution file from `plan` (JSON).
        #[arg(long)]
        solution: PathBuf,
    },
    /// Full study: linearize, plan the four comparison cases, audit each.
    Report {
        #[command(flatten)]
        io: CommonIo,
        #[arg(long)]
        tree: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        m_max: usize,
        #[arg(long, default_value_t = 0.005)]
        gap: f64,
    },
}

/// Run the CLI; returns the process exit code (0 ok, 1 domain error, 2
/// usage).
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // Help/version are successful exits in clap's model.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn load_tree_or_default(
    tree: &Option<PathBuf>,
    bundle: &casefile::CaseBundle,
) -> Result<crate::planning::ScenarioTree> {
    match tree {
        Some(path) => treefile::load_tree(path, bundle),
        None => {
            let steps = bundle.load.len();
            let t = crate::planning::ScenarioTree {
                nodes: vec![crate::planning::TreeNode {
                    probability: 1.0,
                    load: bundle.load.clone(),
                    gfl_available: bundle.wind.clone(),
                }],
                delta_t_hours: 1.0,
                steps,
            };
            t.validate(&bundle.system)?;
            Ok(t)
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Scc {
            io,
            bus,
            all,
            eps,
            k_max,
        } => {
            let bundle = casefile::parse_case(&io.case)?;
            std::fs::create_dir_all(&io.out)?;
            let system = &bundle.system;
            let state = SccState::from_system(system, &UnitState::all_on(system))?;
            let buses: Vec<usize> = if let Some(b) = bus {
                vec![b]
            } else if all {
                (0..system.buses.len()).collect()
            } else if system.limits.scc.is_empty() {
                (0..system.buses.len()).collect()
            } else {
                system.limits.scc.iter().map(|&(b, _)| b).collect()
            };
            let mut results = Vec::new();
            for b in buses {
                if b >= system.buses.len() {
                    return Err(Error::invalid("bus", format!("bus {b} out of range")));
                }
                results.push(scc_iterative(&state, b, eps, k_max)?);
            }
            reports::write_scc_results(&io.out.join("scc_results.csv"), &results)?;
            reports::write_scc_traces(&io.out.join("scc_trace.csv"), &results)?;
            println!("wrote {}", io.out.join("scc_results.csv").display());
            Ok(())
        }
        Command::Gscr { io, tree } => {
            let bundle = casefile::parse_case(&io.case)?;
            std::fs::create_dir_all(&io.out)?;
            let system = &bundle.system;
            let tree = load_tree_or_default(&tree, &bundle)?;
            let state = UnitState::all_on(system);
            let mut series = Vec::new();
            for (n, node) in tree.nodes.iter().enumerate() {
                for t in 0..tree.steps {
                    let powers_pu: Vec<f64> = node.gfl_available[t]
                        .iter()
                        .map(|p| p / system.s_base)
                        .collect();
                    if powers_pu.iter().all(|&p| p <= 0.0) {
                        continue;
                    }
                    series.push((n, t, gscr(system, &state, &powers_pu)?));
                }
            }
            reports::write_gscr_series(&io.out.join("gscr_series.csv"), &series)?;
            println!("wrote {}", io.out.join("gscr_series.csv").display());
            Ok(())
        }
        Command::Linearize {
            io,
            tree,
            m_max,
            gap,
        } => {
            let bundle = casefile::parse_case(&io.case)?;
            std::fs::create_dir_all(&io.out)?;
            let tree = load_tree_or_default(&tree, &bundle)?;
            let cfg = RunConfig {
                m_max,
                gap,
                ..RunConfig::default()
            };
            let outcome = run_active_sampling(
                &bundle.system,
                std::slice::from_ref(&tree),
                &CostConfig::default(),
                &PlanningOptions::default(),
                &cfg,
            )?;
            coeff_io::write_coeffs(&io.out.join("coefficients.toml"), &outcome.coefficients)?;
            reports::write_sampling_log(&io.out.join("sampling_log.csv"), &outcome.log)?;
            println!(
                "converged after {} iterations; wrote {}",
                outcome.iterations,
                io.out.join("coefficients.toml").display()
            );
            Ok(())
        }
        Command::Plan {
            io,
            tree,
            coeffs,
            gap,
            no_scc,
            no_gscr,
            no_sc,
            no_gfm,
        } => {
            let bundle = casefile::parse_case(&io.case)?;
            std::fs::create_dir_all(&io.out)?;
            let tree = load_tree_or_default(&tree, &bundle)?;
            let sets = coeff_io::read_coeffs(&coeffs)?;
            let options = PlanningOptions {
                scc_enabled: !no_scc,
                gscr_enabled: !no_gscr,
                sc_allowed: !no_sc,
                gfm_allowed: !no_gfm,
                ..PlanningOptions::default()
            };
            let costs = CostConfig {
                mip_gap: gap,
                ..CostConfig::default()
            };
            let solution = plan_once(&bundle.system, &tree, &sets, &costs, &options, gap)?;
            write_solution(&io.out.join("solution.json"), &solution)?;
            let (row, report) =
                crate::workbench::pipeline::case_row("plan", &bundle.system, &tree, &solution, &costs)?;
            reports::write_cost_comparison(&io.out.join("cost_summary.csv"), &[row])?;
            reports::write_violation_report(
                &io.out.join("violation_hours.csv"),
                &io.out.join("violation_summary.csv"),
                &report,
            )?;
            println!(
                "objective {:.2}, total {:.2} m/yr; wrote {}",
                solution.costs.objective,
                solution.costs.total_per_year / 1e6,
                io.out.join("solution.json").display()
            );
            Ok(())
        }
        Command::Validate { io, tree, solution } => {
            let bundle = casefile::parse_case(&io.case)?;
            std::fs::create_dir_all(&io.out)?;
            let tree = load_tree_or_default(&tree, &bundle)?;
            let sol = read_solution(&solution)?;
            let report = validate_solution(&bundle.system, &tree, &sol)?;
            reports::write_violation_report(
                &io.out.join("violation_hours.csv"),
                &io.out.join("violation_summary.csv"),
                &report,
            )?;
            println!(
                "scc violations {:.2}%, gscr violations {:.2}%",
                report.scc_violation_rate * 100.0,
                report.gscr_violation_rate * 100.0
            );
            Ok(())
        }
        Command::Report {
            io,
            tree,
            m_max,
            gap,
        } => {
            let bundle = casefile::parse_case(&io.case)?;
            std::fs::create_dir_all(&io.out)?;
            let tree = load_tree_or_default(&tree, &bundle)?;
            let cfg = RunConfig {
                m_max,
                gap,
                ..RunConfig::default()
            };
            let costs = CostConfig::default();
            let outcome = run_active_sampling(
                &bundle.system,
                std::slice::from_ref(&tree),
                &costs,
                &PlanningOptions::default(),
                &cfg,
            )?;
            coeff_io::write_coeffs(&io.out.join("coefficients.toml"), &outcome.coefficients)?;
            reports::write_sampling_log(&io.out.join("sampling_log.csv"), &outcome.log)?;
            let study = case_comparison(&bundle.system, &tree, &outcome.coefficients, &costs, gap)?;
            reports::write_cost_comparison(&io.out.join("cost_comparison.csv"), &study.rows)?;
            for (label, solution) in &study.solutions {
                write_solution(&io.out.join(format!("solution_{label}.json")), solution)?;
            }
            // Constraint on/off table in the spirit of the violation study.
            let mut toggle_rows = Vec::new();
            for (label, scc_on, gscr_on) in [
                ("both", true, true),
                ("gscr_only", false, true),
                ("scc_only", true, false),
            ] {
                let options = PlanningOptions {
                    scc_enabled: scc_on,
                    gscr_enabled: gscr_on,
                    ..PlanningOptions::default()
                };
                let sol = plan_once(&bundle.system, &tree, &outcome.coefficients, &costs, &options, gap)?;
                toggle_rows
                    .push(crate::workbench::pipeline::case_row(label, &bundle.system, &tree, &sol, &costs)?.0);
            }
            reports::write_cost_comparison(&io.out.join("violation_comparison.csv"), &toggle_rows)?;
            println!("wrote study to {}", io.out.display());
            Ok(())
        }
    }
}

pub fn write_solution(path: &Path, solution: &PlanningSolution) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let text = serde_json::to_string_pretty(solution)?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_solution(path: &Path) -> Result<PlanningSolution> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

// Referenced from the docs; kept here so the metric naming stays in one
// place when the CSVs are extended.
#[allow(dead_code)]
fn metric_name(tag: MetricTag) -> String {
    tag.to_string()
}
