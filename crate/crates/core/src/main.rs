use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use serde_json::json;

use simvc::bounds::{binary_entropy, sauer_guaranteed_vc, solve_optimal_delta, SauerQuery};
use simvc::experiments::{
    ratio_search, run_report, verify_theorem_with, ReportFormat, VerifyOptions, EXIT_BOUND_VIOLATED,
};
use simvc::families::{FamilySpec, SpaceStream, StreamSpec};
use simvc::io::{read_space, write_space};
use simvc::similarity::{forest_filter, lift_space, PairDomain};
use simvc::{vc_exact_with, vc_naive, Error, VcOptions};

#[derive(Parser)]
#[command(name = "vc", version, about = "Exact VC dimensions of hypothesis spaces and their similarity lifts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Ksparse,
    Cube,
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchMode {
    Exhaustive,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

#[derive(Subcommand)]
enum Command {
    /// Print the VC dimension and a witness of a space file.
    Compute {
        #[arg(long)]
        input: PathBuf,
        /// Use the brute-force oracle.
        #[arg(long)]
        naive: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Write the similarity lift of a space file.
    Lift {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Check both similarity bounds on one space.
    #[command(group(ArgGroup::new("source").required(true).args(["family", "input"])))]
    Verify {
        #[arg(long, requires = "n")]
        family: Option<FamilyArg>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Search a stream of spaces for the largest similarity ratio.
    Search {
        #[arg(long, value_enum)]
        mode: SearchMode,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        size: Option<u64>,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Stop after this many spaces.
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Evaluate closed-form bound quantities.
    #[command(group(ArgGroup::new("quantity").required(true).args(["entropy", "sauer", "solve_delta"])))]
    Bounds {
        #[arg(long)]
        entropy: Option<f64>,
        #[arg(long, num_args = 2, value_names = ["SIZE", "N"])]
        sauer: Option<Vec<u128>>,
        #[arg(long)]
        solve_delta: bool,
        #[arg(long, default_value_t = 1e-12, requires = "solve_delta")]
        tol: f64,
    },
    /// Write one bound report row per space named in a spec file.
    Report {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum)]
        format: FormatArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Write 0 for wall_time_ms so reruns are byte-identical.
        #[arg(long)]
        no_timing: bool,
    },
}

fn print_json(value: &impl serde::Serialize) -> Result<(), Error> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidParams(msg.into())
}

fn compute(input: &Path, naive: bool, jobs: usize) -> Result<ExitCode, Error> {
    let (space, pair_domain_of) = read_space(input)?;
    if naive {
        print_json(&json!({ "dimension": vc_naive(&space)?, "method": "naive" }))?;
        return Ok(ExitCode::SUCCESS);
    }
    let result = match pair_domain_of {
        Some(base) => {
            let domain = PairDomain::new(base);
            let filter = forest_filter(&domain);
            let r = vc_exact_with(&space, &VcOptions::with_filter(&filter).jobs(jobs));
            let pairs = domain.to_pair_set(&r.witness.subset)?;
            json!({ "dimension": r.dimension, "witness": r.witness.subset, "witness_pairs": pairs, "method": "exact" })
        }
        None => {
            let r = vc_exact_with(&space, &VcOptions::default().jobs(jobs));
            json!({ "dimension": r.dimension, "witness": r.witness.subset, "method": "exact" })
        }
    };
    print_json(&result)?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Compute { input, naive, jobs } => compute(&input, naive, jobs),
        Command::Lift { input, output } => {
            let (space, pair_domain_of) = read_space(&input)?;
            if pair_domain_of.is_some() {
                return Err(usage("input is already a lifted space"));
            }
            write_space(&output, &lift_space(&space)?, Some(space.domain_size()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { family, n, k, input, jobs } => {
            let (family, space) = match (family, input) {
                (_, Some(path)) => {
                    let (space, pair_domain_of) = read_space(&path)?;
                    if pair_domain_of.is_some() {
                        return Err(usage("verify expects a base space, not a lifted one"));
                    }
                    (FamilySpec::File, space)
                }
                (Some(FamilyArg::Ksparse), None) => {
                    let k = k.ok_or_else(|| usage("--family ksparse needs --k"))?;
                    let spec = FamilySpec::KSparse { n: n.unwrap_or_default(), k };
                    let space = spec.build()?;
                    (spec, space)
                }
                (Some(FamilyArg::Cube), None) => {
                    let spec = FamilySpec::FullCube { n: n.unwrap_or_default() };
                    let space = spec.build()?;
                    (spec, space)
                }
                (None, None) => unreachable!("clap requires a source"),
            };
            let report = verify_theorem_with(&space, family, &VerifyOptions::default(), jobs)?;
            print_json(&report)?;
            Ok(if report.bounds_ok() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_BOUND_VIOLATED) })
        }
        Command::Search { mode, n, size, samples, seed, budget, jobs } => {
            let spec = match mode {
                SearchMode::Exhaustive => StreamSpec::Exhaustive { n },
                SearchMode::Random => StreamSpec::Random {
                    n,
                    size: size.ok_or_else(|| usage("--mode random needs --size"))?,
                    seed: seed.ok_or_else(|| usage("--mode random needs --seed"))?,
                    samples: samples.ok_or_else(|| usage("--mode random needs --samples"))?,
                },
            };
            let stream = SpaceStream::single(spec)?;
            let result = ratio_search(&stream, budget.unwrap_or(u64::MAX), jobs)?;
            print_json(&result)?;
            Ok(ExitCode::from(result.exit_status()))
        }
        Command::Bounds { entropy, sauer, solve_delta, tol } => {
            let value = if let Some(eps) = entropy {
                json!({ "epsilon": eps, "entropy": binary_entropy(eps)? })
            } else if let Some(args) = sauer {
                let domain_size = u32::try_from(args[1]).map_err(|_| usage("--sauer domain size too large"))?;
                let q = SauerQuery { space_size: args[0], domain_size };
                json!({ "space_size": q.space_size, "domain_size": q.domain_size, "guaranteed_vc": sauer_guaranteed_vc(q)? })
            } else {
                debug_assert!(solve_delta);
                let c = solve_optimal_delta(tol)?;
                json!({ "epsilon": c.epsilon, "delta": c.delta, "entropy_at_epsilon": binary_entropy(c.epsilon)?, "tolerance": tol })
            };
            print_json(&value)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { spec, format, out, jobs, no_timing } => {
            let specs: Vec<StreamSpec> = serde_json::from_reader(File::open(&spec)?)
                .map_err(|e| Error::InvalidSpec(e.to_string()))?;
            let stream = SpaceStream::new(specs)?;
            let format = match format {
                FormatArg::Csv => ReportFormat::Csv,
                FormatArg::Jsonl => ReportFormat::Jsonl,
            };
            let opts = VerifyOptions { timing: !no_timing, ..VerifyOptions::default() };
            let summary = run_report(&stream, format, File::create(&out)?, &opts, jobs)?;
            eprintln!(
                "{} rows, {} bound violations, {} ratios above 2",
                summary.rows, summary.theorem_violations, summary.conjecture_violations
            );
            Ok(ExitCode::from(summary.exit_status()))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
