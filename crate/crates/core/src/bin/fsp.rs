use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use feasible_paths::campaign::{run_campaign, run_single, CampaignConfig, NamedSolver};
use feasible_paths::problems::{ConstraintVariant, ProblemInstance};
use feasible_paths::text::parse_reals;

#[derive(Parser)]
#[command(name = "fsp", version, about = "Pattern search along feasible search paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Constraint {
    Ball,
    Ellipsoid,
    Box,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem instance with one solver.
    Run(RunArgs),
    /// Run every instance against every solver of a campaign file.
    #[command(alias = "run-campaign")]
    Campaign {
        config: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, required_unless_present = "descriptor")]
    problem: Option<String>,
    /// Read the instance from a `key=value` descriptor file instead.
    #[arg(long, conflicts_with = "problem")]
    descriptor: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ball")]
    constraint: Constraint,
    /// Center, as one value or a comma-separated vector.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    center: String,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Ellipsoid semi-axes.
    #[arg(long)]
    axes: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lower: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    upper: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
    #[arg(long, default_value = "fsp-default")]
    solver: String,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    alpha_bar: Option<f64>,
    #[arg(long)]
    min_step: Option<f64>,
    /// Directory for the trace, summary and stationarity files.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn instance(args: &RunArgs) -> feasible_paths::Result<ProblemInstance> {
    if let Some(path) = &args.descriptor {
        return std::fs::read_to_string(path)?.parse();
    }
    let center = parse_reals(&args.center)?;
    let constraint = match args.constraint {
        Constraint::Ball => ConstraintVariant::Ball {
            center,
            radius: args.radius,
        },
        Constraint::Ellipsoid => ConstraintVariant::Ellipsoid {
            center,
            matrix: Vec::new(),
            axes: match &args.axes {
                Some(a) => parse_reals(a)?,
                None => vec![args.radius],
            },
        },
        Constraint::Box => {
            let missing = || feasible_paths::Error::Config("box needs --lower and --upper".into());
            ConstraintVariant::Box {
                lower: parse_reals(args.lower.as_deref().ok_or_else(missing)?)?,
                upper: parse_reals(args.upper.as_deref().ok_or_else(missing)?)?,
            }
        }
    };
    let problem = args.problem.clone().unwrap_or_default();
    Ok(ProblemInstance::new(problem, constraint))
}

fn run(args: RunArgs) -> feasible_paths::Result<ExitCode> {
    let instance = instance(&args)?;
    let overrides: Vec<(String, String)> = [
        ("delta", args.delta),
        ("sigma", args.sigma),
        ("tau", args.tau),
        ("alpha_bar", args.alpha_bar),
        ("min_step", args.min_step),
    ]
    .into_iter()
    .filter_map(|(k, v)| v.map(|v| (k.to_string(), v.to_string())))
    .collect();
    let solver = NamedSolver::from_settings(&args.solver, &overrides)?;
    let result = run_single(&instance, &solver, args.budget)?;
    if let Some(dir) = &args.out {
        result.write_files(dir)?;
    }
    println!("{}", result.summary_line());
    Ok(ExitCode::SUCCESS)
}

fn campaign(config: PathBuf, jobs: Option<usize>, out: Option<PathBuf>) -> feasible_paths::Result<ExitCode> {
    let mut config = CampaignConfig::from_file(&config)?;
    if let Some(jobs) = jobs {
        config.jobs = jobs;
    }
    if let Some(out) = out {
        config.out = out;
    }
    let outcome = run_campaign(&config)?;
    for record in outcome.matrix.records() {
        println!(
            "{} {} {} {} {} {}",
            record.problem,
            record.solver,
            feasible_paths::text::sig12(record.f_best),
            record.n_f,
            record.n_p,
            record.terminated
        );
    }
    for (problem, solver, message) in &outcome.failures {
        eprintln!("failed: {problem} {solver}: {message}");
    }
    Ok(if outcome.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Campaign { config, jobs, out } => campaign(config, jobs, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
