//! File formats and the `ppm` command line.
//!
//! [`run`] parses arguments, executes one subcommand and returns the process
//! exit code. The JSON report goes to `--out` (or standard output) and a short
//! table goes to whichever stream the report does not use.

pub mod error;
pub mod files;
pub mod report;
mod table;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use ppm_core::dynamics::{best_response_iteration, DynamicsOptions};
use ppm_core::interior::{solve_interior, SolveOptions};
use ppm_core::oracle::{grid_search_equilibria_with, GridSpec};
use ppm_core::payoff::payoff_breakdown;
use ppm_core::portfolio::{enumerate_portfolios, portfolio_to_product, product_to_portfolio};
use ppm_core::verifier::{profile_regret, NumericOptions, VerifyOptions};
use ppm_core::{Error, Execution, StrategyProfile};

pub use error::{CliError, CliResult, EXIT_INTERNAL, EXIT_INVALID, EXIT_NO_CANDIDATE, EXIT_OK};
pub use files::{load_scenario, Scenario};

use report::{
    CandidateView, ConvertView, DynamicsView, EvalView, OracleView, Report, ScenarioInfo,
    SolveView, Timing, ToolInfo, VerificationView,
};

#[derive(Debug, Parser)]
#[command(
    name = "ppm",
    version,
    about = "Equilibrium analysis of product-portfolio games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Leave timestamp and timing out of the report.
    #[arg(long)]
    no_timestamp: bool,
    /// Run on one thread.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Payoffs and choice probabilities of a profile.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        profile: PathBuf,
    },
    /// Interior stationary candidates of a single-segment game, each verified.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        starts: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        /// Certification tolerance relative to the payoff scale.
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
    },
    /// Regret of every firm at a profile.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        profile: PathBuf,
        /// Tolerance relative to the payoff scale.
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
    },
    /// Brute-force search for grid equilibria.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Grid resolution; must divide 1. Defaults to 0.005 for two firms
        /// with two products each and 0.05 otherwise.
        #[arg(long)]
        grid: Option<f64>,
        /// Tolerance relative to the payoff scale.
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
    },
    /// Round-robin best-response dynamics.
    Dynamics {
        #[command(flatten)]
        common: Common,
        /// Initial profile file, or `uniform`.
        #[arg(long, default_value = "uniform")]
        init: String,
        #[arg(long, default_value_t = 500)]
        max_rounds: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Convert between portfolio-level and product-level strategies of a firm.
    Convert {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        firm: String,
        #[arg(
            long,
            required_unless_present = "product_dist",
            conflicts_with = "product_dist"
        )]
        portfolio_dist: Option<PathBuf>,
        #[arg(long)]
        product_dist: Option<PathBuf>,
    },
}

struct Output {
    command: &'static str,
    scenario: ScenarioInfo,
    parameters: serde_json::Value,
    result: serde_json::Value,
    table: String,
}

fn to_value<T: Serialize>(value: &T) -> CliResult<serde_json::Value> {
    serde_json::to_value(value).map_err(|e| CliError::Internal(e.to_string()))
}

fn execute(command: &Command) -> CliResult<Output> {
    match command {
        Command::Eval { common, profile } => {
            let sc = load_scenario(&common.scenario)?;
            let game = &sc.game;
            let profile = files::load_profile(profile, game)?;
            let view = EvalView::new(game, &profile, &payoff_breakdown(game, &profile));
            Ok(Output {
                command: "eval",
                scenario: ScenarioInfo::new(&sc),
                parameters: json!({}),
                result: to_value(&view)?,
                table: table::eval(&view),
            })
        }
        Command::Solve {
            common,
            seed,
            starts,
            tol,
            max_iter,
            eps,
        } => {
            let sc = load_scenario(&common.scenario)?;
            let game = &sc.game;
            let options = SolveOptions {
                seed: *seed,
                starts: *starts,
                tol: *tol,
                max_iter: *max_iter,
                execution: common.execution(),
            };
            let candidates = solve_interior(game, &options)?;
            let verify = VerifyOptions {
                numeric: NumericOptions {
                    seed: *seed,
                    ..NumericOptions::default()
                },
                execution: common.execution(),
            };
            let mut views = Vec::with_capacity(candidates.len());
            for c in &candidates {
                let regret = profile_regret(game, &c.profile, *eps, &verify)?;
                views.push(CandidateView::new(game, c, &regret));
            }
            let view = SolveView {
                certified: views
                    .iter()
                    .filter(|v| v.verification.is_epsilon_nash)
                    .count(),
                candidates: views,
            };
            Ok(Output {
                command: "solve",
                scenario: ScenarioInfo::new(&sc),
                parameters: json!({
                    "seed": seed, "starts": starts, "tol": tol, "max_iter": max_iter, "eps": eps,
                }),
                result: to_value(&view)?,
                table: table::solve(&view),
            })
        }
        Command::Verify {
            common,
            profile,
            eps,
        } => {
            let sc = load_scenario(&common.scenario)?;
            let game = &sc.game;
            let profile = files::load_profile(profile, game)?;
            let verify = VerifyOptions {
                execution: common.execution(),
                ..VerifyOptions::default()
            };
            let view = VerificationView::new(game, &profile_regret(game, &profile, *eps, &verify)?);
            Ok(Output {
                command: "verify",
                scenario: ScenarioInfo::new(&sc),
                parameters: json!({ "eps": eps, "profile": profile.to_named(game) }),
                result: to_value(&view)?,
                table: table::verification(&view),
            })
        }
        Command::Oracle { common, grid, eps } => {
            let sc = load_scenario(&common.scenario)?;
            let game = &sc.game;
            let spec = match grid {
                Some(h) => GridSpec::new(*h)?,
                None => GridSpec::default_for(game),
            };
            let found = grid_search_equilibria_with(
                game,
                &spec,
                eps * game.payoff_scale(),
                common.execution(),
            )?;
            let view = OracleView::new(game, spec.profile_count(game), &found);
            Ok(Output {
                command: "oracle",
                scenario: ScenarioInfo::new(&sc),
                parameters: json!({ "grid": spec.resolution, "eps": eps }),
                result: to_value(&view)?,
                table: table::oracle(&view),
            })
        }
        Command::Dynamics {
            common,
            init,
            max_rounds,
            tol,
        } => {
            let sc = load_scenario(&common.scenario)?;
            let game = &sc.game;
            let initial = if init == "uniform" {
                StrategyProfile::uniform(game)
            } else {
                files::load_profile(init, game)?
            };
            let options = DynamicsOptions {
                max_rounds: *max_rounds,
                tol: *tol,
                ..DynamicsOptions::default()
            };
            let trace = best_response_iteration(game, &initial, &options)?;
            let verify = VerifyOptions {
                execution: common.execution(),
                ..VerifyOptions::default()
            };
            let regret = profile_regret(game, trace.final_profile(), 10.0 * tol, &verify)?;
            let view = DynamicsView::new(game, &trace, &regret);
            Ok(Output {
                command: "dynamics",
                scenario: ScenarioInfo::new(&sc),
                parameters: json!({ "init": init, "max_rounds": max_rounds, "tol": tol }),
                result: to_value(&view)?,
                table: table::dynamics(&view),
            })
        }
        Command::Convert {
            common,
            firm,
            portfolio_dist,
            product_dist,
        } => {
            let sc = load_scenario(&common.scenario)?;
            let game = &sc.game;
            let i = game
                .firm_index(firm)
                .ok_or_else(|| Error::UnknownFirm(firm.clone()))?;
            let enumeration = enumerate_portfolios(game, i)?;
            let view = match (portfolio_dist, product_dist) {
                (Some(path), _) => {
                    let dist = files::load_portfolio_distribution(path, game, i)?;
                    let sigma = portfolio_to_product(&enumeration, &dist);
                    ConvertView::new(game, &enumeration, "portfolio-to-product", &sigma, &dist)
                }
                (None, Some(path)) => {
                    let sigma = files::load_product_distribution(path, game, i)?;
                    let dist = product_to_portfolio(&enumeration, &sigma);
                    ConvertView::new(game, &enumeration, "product-to-portfolio", &sigma, &dist)
                }
                (None, None) => {
                    return Err(CliError::Usage(
                        "one of --portfolio-dist or --product-dist is required".into(),
                    ))
                }
            };
            Ok(Output {
                command: "convert",
                scenario: ScenarioInfo::new(&sc),
                parameters: json!({ "firm": firm }),
                result: to_value(&view)?,
                table: table::convert(&view),
            })
        }
    }
}

fn common(command: &Command) -> &Common {
    match command {
        Command::Eval { common, .. }
        | Command::Solve { common, .. }
        | Command::Verify { common, .. }
        | Command::Oracle { common, .. }
        | Command::Dynamics { common, .. }
        | Command::Convert { common, .. } => common,
    }
}

fn run_parsed(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let started = Instant::now();
    let out = execute(&cli.command)?;
    let common = common(&cli.command);
    let report = Report {
        tool: ToolInfo::default(),
        command: out.command,
        scenario: out.scenario,
        parameters: out.parameters,
        result: out.result,
        timing: (!common.no_timestamp).then(|| Timing {
            elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        }),
        timestamp: (!common.no_timestamp)
            .then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
    };
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Internal(e.to_string()))?
        + "\n";
    let stream_error = |e: std::io::Error| CliError::Internal(format!("cannot write output: {e}"));
    match &common.out {
        Some(path) => {
            fs::write(path, text).map_err(|source| CliError::Write {
                path: path.clone(),
                source,
            })?;
            stdout
                .write_all(out.table.as_bytes())
                .map_err(stream_error)?;
        }
        None => {
            stdout.write_all(text.as_bytes()).map_err(stream_error)?;
            stderr
                .write_all(out.table.as_bytes())
                .map_err(stream_error)?;
        }
    }
    Ok(())
}

/// Runs one command line (`args[0]` is the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_INVALID
                }
            };
        }
    };
    match run_parsed(&cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
