//! `rftt` — workbench for the replenishment problem with fixed turnover
//! times: instance generation, solving, schedule verification, pinwheel
//! feasibility, and benchmark suites.
//!
//! Exit codes: 0 ok, 1 infeasible / negative answer, 2 input error,
//! 3 size-guard refusal.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rftt_cli::dispatch::{solve, Algo};
use rftt_cli::{bench, run_suite};
use rftt_core::generate::{Family, GenSpec, PinwheelShape};
use rftt_core::instance::Instance;
use rftt_core::oracle::pinwheel_feasible;
use rftt_core::report::Objective;
use rftt_core::schedule::{schedule_from_json, verify, verify_compact, ParsedSchedule};
use rftt_core::Error;

#[derive(Parser)]
#[command(name = "rftt", version, about = "Replenishment scheduling with fixed turnover times")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark instance.
    Gen {
        /// random_tree | random_star | random_line | random_general |
        /// pinwheel_star | pinwheel_sp | partition_star | gi | hi
        family: String,
        /// Client count (random families).
        #[arg(long)]
        n: Option<usize>,
        /// Maximum edge weight (random families, default 100).
        #[arg(long)]
        max_weight: Option<i64>,
        /// Maximum turnover time (random families, default 64).
        #[arg(long)]
        max_turnover: Option<u32>,
        /// Round random turnovers down to powers of two.
        #[arg(long)]
        pow2: bool,
        /// Extra non-tree edges (random_general).
        #[arg(long)]
        extra_edges: Option<usize>,
        /// Family index (gi, hi).
        #[arg(long)]
        i: Option<u32>,
        /// Comma-separated period list (pinwheel families).
        #[arg(long, value_delimiter = ',')]
        periods: Option<Vec<u64>>,
        /// Comma-separated integers (partition_star).
        #[arg(long, value_delimiter = ',')]
        ints: Option<Vec<u64>>,
        /// Number of triples (partition_star).
        #[arg(long)]
        m: Option<u64>,
        /// star | sp (pinwheel shape; pinwheel_sp implies sp)
        #[arg(long)]
        shape: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output instance file.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Solve an instance with one algorithm.
    Solve {
        #[arg(long)]
        objective: Objective2,
        #[arg(long)]
        algo: String,
        /// Input instance file.
        #[arg(short, long)]
        input: PathBuf,
        /// Output schedule file.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Verify a schedule file against an instance.
    Verify {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        schedule: PathBuf,
    },
    /// Decide pinwheel feasibility for a period list.
    Pinwheel {
        #[arg(long, value_delimiter = ',')]
        periods: Vec<u64>,
    },
    /// Run a benchmark suite and write a CSV.
    Bench {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        csv: PathBuf,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Objective2 {
    #[value(name = "min-avg")]
    MinAvg,
    #[value(name = "min-max")]
    MinMax,
}

impl From<Objective2> for Objective {
    fn from(o: Objective2) -> Objective {
        match o {
            Objective2::MinAvg => Objective::MinAvg,
            Objective2::MinMax => Objective::MinMax,
        }
    }
}

const EXIT_OK: u8 = 0;
const EXIT_NEGATIVE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_GUARD: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e.downcast_ref::<Error>() {
                Some(Error::SizeGuard { .. }) => EXIT_GUARD,
                _ => EXIT_INPUT,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Gen {
            family,
            n,
            max_weight,
            max_turnover,
            pow2,
            extra_edges,
            i,
            periods,
            ints,
            m,
            shape,
            seed,
            output,
        } => {
            let family = parse_family(&family)?;
            let shape = match shape.as_deref() {
                None => None,
                Some("star") => Some(PinwheelShape::Star),
                Some("sp") => Some(PinwheelShape::SeriesParallel),
                Some(other) => anyhow::bail!("unknown shape `{other}` (star|sp)"),
            };
            let spec = GenSpec {
                family,
                seed,
                n,
                max_weight,
                max_turnover,
                pow2,
                extra_edges,
                periods,
                shape,
                ints,
                m,
                i,
            };
            let instance = spec.build()?;
            std::fs::write(&output, instance.to_json())?;
            println!(
                "wrote {} ({} clients, {} edges) to {}",
                instance.name,
                instance.n_clients(),
                instance.edges.len(),
                output.display()
            );
            Ok(EXIT_OK)
        }
        Command::Solve {
            objective,
            algo,
            input,
            output,
        } => {
            let algo: Algo = algo.parse().map_err(|e: String| anyhow::anyhow!(e))?;
            let text = std::fs::read_to_string(&input)?;
            let instance = Instance::from_json(&text)?;
            let started = std::time::Instant::now();
            let (schedule, report) = solve(algo, objective.into(), &instance)?;
            let elapsed = started.elapsed().as_millis();
            println!("{} runtime_ms={}", report.summary(), elapsed);
            match schedule {
                Some(s) => {
                    if let Some(path) = output {
                        std::fs::write(&path, s.to_json())?;
                        println!("schedule written to {}", path.display());
                    }
                    Ok(if report.feasible { EXIT_OK } else { EXIT_NEGATIVE })
                }
                None => {
                    println!("value-only result (combined period exceeds the schedule cap)");
                    Ok(EXIT_OK)
                }
            }
        }
        Command::Verify { input, schedule } => {
            let instance = Instance::from_json(&std::fs::read_to_string(&input)?)?;
            let parsed = schedule_from_json(&std::fs::read_to_string(&schedule)?)?;
            let report = match parsed {
                ParsedSchedule::Explicit(s) => verify(&instance, &s)?,
                ParsedSchedule::Compact(c) => verify_compact(&instance, &c)?,
            };
            if report.feasible {
                println!("feasible");
                Ok(EXIT_OK)
            } else {
                for v in &report.violations {
                    println!("violation: {v}");
                }
                Ok(EXIT_NEGATIVE)
            }
        }
        Command::Pinwheel { periods } => {
            let result = pinwheel_feasible(&periods)?;
            if result.feasible {
                let witness = result.witness.unwrap_or_default();
                let jobs: Vec<String> = witness.iter().map(|j| (j + 1).to_string()).collect();
                println!("feasible; cyclic witness (job per day): {}", jobs.join(" "));
                Ok(EXIT_OK)
            } else {
                println!("infeasible");
                Ok(EXIT_NEGATIVE)
            }
        }
        Command::Bench { suite, csv } => {
            let spec = bench::parse_suite(&std::fs::read_to_string(&suite)?)?;
            let (rows, bytes) = run_suite(&spec)?;
            std::fs::write(&csv, &bytes)?;
            println!("{} rows written to {}", rows.len(), csv.display());
            Ok(EXIT_OK)
        }
    }
}

fn parse_family(s: &str) -> anyhow::Result<Family> {
    Ok(match s {
        "random_tree" => Family::RandomTree,
        "random_star" => Family::RandomStar,
        "random_line" => Family::RandomLine,
        "random_general" => Family::RandomGeneral,
        "pinwheel_star" => Family::PinwheelStar,
        "pinwheel_sp" => Family::PinwheelSp,
        "partition_star" => Family::PartitionStar,
        "gi" => Family::Gi,
        "hi" => Family::Hi,
        other => anyhow::bail!("unknown family `{other}`"),
    })
}
