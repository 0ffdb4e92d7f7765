//! `nfvplan` command line. Exit codes: 0 success (optimal), 2 infeasible,
//! 1 any error.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nfvplan_core::analysis::{plan_report_csv, SweepParameter, SweepSpec};
use nfvplan_core::fixtures;
use nfvplan_core::formulation::export_lp;
use nfvplan_core::gen::{paper_workload_with, random_scenario, Policy, RandomParams, VariabilityModel, WorkloadParams};
use nfvplan_core::model::{validate, Scenario};
use nfvplan_core::Error as CoreError;

use crate::jobs::{execute, Artifact, CompareRequest, JobRequest, SolveRequest};
use crate::server::{serve, ServiceConfig};

const DEFAULT_NODE_BUDGET: usize = 100_000;

#[derive(Debug, Parser)]
#[command(name = "nfvplan", version, about = "Plan NFV deployments: validate, solve, compare and sweep scenarios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a scenario file and list its violations.
    Validate { scenario: PathBuf },
    /// Solve a scenario; writes plan.json and report.csv.
    Solve {
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        node_budget: usize,
        /// Also write the program as problem.lp.
        #[arg(long)]
        export_lp: bool,
    },
    /// Solve under each deployment model; prints the comparison CSV.
    Compare {
        scenario: PathBuf,
        /// Also write comparison.csv and comparison.json here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        node_budget: usize,
        /// Label for the traffic variability, copied into the report.
        #[arg(long, default_value = "unspecified")]
        variability: String,
    },
    /// Re-solve over a list of parameter values; prints the sweep CSV.
    Sweep {
        scenario: PathBuf,
        #[arg(long)]
        param: String,
        /// Comma-separated, strictly monotone.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        /// Also write sweep.csv and sweep.json here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        node_budget: usize,
    },
    /// Write a generated scenario as JSON.
    Generate {
        #[command(subcommand)]
        what: Generate,
        /// Write scenario.json here instead of standard output.
        #[arg(long, global = true)]
        out_dir: Option<PathBuf>,
        #[arg(long, global = true, default_value_t = 2014)]
        seed: u64,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        #[arg(long, env = "NFVPLAN_STORE", default_value = "nfvplan-store")]
        store: PathBuf,
        #[arg(long, default_value_t = 2)]
        workers: usize,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        node_budget: usize,
        /// Serve static files from here for unknown paths.
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum Generate {
    /// Four-class backbone workload on the Abilene topology.
    Workload {
        /// `none`, `jitter:ALPHA` or `spike:EPOCH:FACTOR`.
        #[arg(long, default_value = "jitter:0.2")]
        variability: String,
        #[arg(long, default_value = "full-hybrid")]
        policy: String,
        #[arg(long, default_value = "paper-2014")]
        preset: String,
        #[arg(long, default_value_t = 3)]
        sites: usize,
        #[arg(long, default_value_t = 4)]
        epochs: usize,
        #[arg(long, default_value_t = 1500.0)]
        total_volume: f64,
        /// Leave out ingress and egress latency legs.
        #[arg(long)]
        no_legs: bool,
    },
    /// Small random scenario.
    Random,
    /// One of the bundled fixtures.
    Fixture { name: String },
}

/// A failure with its exit code.
struct Fail(u8, String);

impl From<CoreError> for Fail {
    fn from(e: CoreError) -> Self {
        Fail(1, e.to_string())
    }
}

fn io_fail(path: &Path) -> impl FnOnce(std::io::Error) -> Fail + '_ {
    move |e| Fail(1, format!("{}: {e}", path.display()))
}

fn load(path: &Path) -> Result<Scenario, Fail> {
    let text = fs::read_to_string(path).map_err(io_fail(path))?;
    Scenario::from_json(&text).map_err(|e| match e {
        CoreError::Parse { line, column, msg } => Fail(1, format!("{}:{line}:{column}: {msg}", path.display())),
        other => Fail(1, format!("{}: {other}", path.display())),
    })
}

fn load_valid(path: &Path) -> Result<Scenario, Fail> {
    let s = load(path)?;
    let violations = validate(&s);
    if violations.is_empty() {
        return Ok(s);
    }
    let lines: Vec<String> = violations.iter().map(|v| format!("  {v}")).collect();
    Err(Fail(1, format!("{}: {} violation(s)\n{}", path.display(), violations.len(), lines.join("\n"))))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), Fail> {
    fs::create_dir_all(dir).map_err(io_fail(dir))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(io_fail(&path))
}

fn parse_values(text: &str) -> Result<Vec<f64>, Fail> {
    if text.trim().is_empty() {
        return Err(Fail(1, "--values is empty".into()));
    }
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Fail(1, format!("--values: `{}` is not a number", v.trim())))
        })
        .collect()
}

fn parse_variability(text: &str, seed: u64) -> Result<VariabilityModel, Fail> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| s.parse::<f64>().map_err(|_| Fail(1, format!("--variability: `{s}` is not a number")));
    let model = match parts.as_slice() {
        ["none"] => VariabilityModel::None,
        ["jitter", alpha] => VariabilityModel::UniformJitter { alpha: num(alpha)?, seed },
        ["spike", epoch, factor] => VariabilityModel::SingleSpike {
            epoch: epoch
                .parse()
                .map_err(|_| Fail(1, format!("--variability: `{epoch}` is not an epoch")))?,
            factor: num(factor)?,
        },
        _ => {
            return Err(Fail(
                1,
                format!("--variability `{text}`; expected none, jitter:ALPHA or spike:EPOCH:FACTOR"),
            ))
        }
    };
    model.check()?;
    Ok(model)
}

fn run(command: Command) -> Result<u8, Fail> {
    match command {
        Command::Validate { scenario } => {
            load_valid(&scenario)?;
            println!("{}: valid", scenario.display());
            Ok(0)
        }
        Command::Solve {
            scenario,
            out_dir,
            node_budget,
            export_lp: lp,
        } => {
            let s = load_valid(&scenario)?;
            if lp {
                write(&out_dir, "problem.lp", &export_lp(&s)?)?;
            }
            let request = JobRequest::Solve(SolveRequest {
                node_budget: Some(node_budget),
            });
            match execute(&s, &request, node_budget)? {
                Artifact::Plan(plan) => {
                    write(&out_dir, "plan.json", &plan.to_json())?;
                    write(&out_dir, "report.csv", &plan_report_csv(&s, &plan)?)?;
                    println!(
                        "optimal: cost {} ({} nodes); active: {}",
                        plan.cost_total,
                        plan.solver.nodes,
                        plan.active.join(", ")
                    );
                    Ok(0)
                }
                Artifact::Infeasible { nodes, .. } => {
                    println!("infeasible ({nodes} nodes)");
                    Ok(2)
                }
                _ => unreachable!("a solve yields a plan or infeasibility"),
            }
        }
        Command::Compare {
            scenario,
            out_dir,
            node_budget,
            variability,
        } => {
            let s = load_valid(&scenario)?;
            let request = JobRequest::Compare(CompareRequest {
                variability,
                node_budget: Some(node_budget),
            });
            let Artifact::Comparison(report) = execute(&s, &request, node_budget)? else {
                unreachable!("a comparison yields a report")
            };
            let csv = report.to_csv()?;
            if let Some(dir) = out_dir {
                write(&dir, "comparison.csv", &csv)?;
                write(&dir, "comparison.json", &report.to_json())?;
            }
            print!("{csv}");
            Ok(0)
        }
        Command::Sweep {
            scenario,
            param,
            values,
            out_dir,
            node_budget,
        } => {
            let parameter: SweepParameter = param.parse()?;
            let spec = SweepSpec::new(parameter, parse_values(&values)?);
            spec.check()?;
            let s = load_valid(&scenario)?;
            let Artifact::Sweep(report) = execute(&s, &JobRequest::Sweep(spec), node_budget)? else {
                unreachable!("a sweep yields a report")
            };
            let csv = report.to_csv()?;
            if let Some(dir) = out_dir {
                write(&dir, "sweep.csv", &csv)?;
                write(&dir, "sweep.json", &report.to_json())?;
            }
            print!("{csv}");
            Ok(0)
        }
        Command::Generate { what, out_dir, seed } => {
            let s = match what {
                Generate::Workload {
                    variability,
                    policy,
                    preset,
                    sites,
                    epochs,
                    total_volume,
                    no_legs,
                } => paper_workload_with(&WorkloadParams {
                    seed,
                    variability: parse_variability(&variability, seed)?,
                    total_volume,
                    epochs,
                    preset,
                    policy: policy.parse::<Policy>()?,
                    sites,
                    ingress_egress_latency: !no_legs,
                })?,
                Generate::Random => random_scenario(seed, &RandomParams::default()),
                Generate::Fixture { name } => fixtures::all()
                    .into_iter()
                    .find(|(n, _)| *n == name)
                    .map(|(_, s)| s)
                    .ok_or_else(|| {
                        let names: Vec<&str> = fixtures::all().iter().map(|(n, _)| *n).collect();
                        Fail(1, format!("unknown fixture `{name}`; known: {}", names.join(", ")))
                    })?,
            };
            match out_dir {
                Some(dir) => write(&dir, "scenario.json", &s.to_json())?,
                None => print!("{}", s.to_json()),
            }
            Ok(0)
        }
        Command::Serve {
            addr,
            store,
            workers,
            node_budget,
            static_dir,
        } => {
            let config = ServiceConfig {
                store,
                workers,
                node_budget,
                static_dir,
            };
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Fail(1, e.to_string()))?;
            runtime.block_on(serve(&config, addr)).map_err(|e| Fail(1, e.to_string()))?;
            Ok(0)
        }
    }
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
