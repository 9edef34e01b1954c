use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use projcurve::harness::{
    exit_code, generate_scene, load_scene_with, run_pipeline, save_scene, Overrides, Params, Stage,
};

#[derive(Parser)]
#[command(
    name = "projcurve",
    version,
    about = "Holomorphic curves into projective space: normality and sharing checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a scene from a built-in template.
    Gen {
        /// montel_omitting, blowup_linear, wandering_shared or degenerate_position
        template: String,
        /// Template parameters as k=v,k=v.
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Hypothesis checks: general position, conditions (1) and (2), induced families.
    Check(StageArgs),
    /// Determinant-product estimates per member.
    Position(StageArgs),
    /// Marty statistics of the family.
    Normality(StageArgs),
    /// Zalcman rescaling of a blowing-up family.
    Zalcman(StageArgs),
    /// Every stage in one report.
    All(StageArgs),
}

#[derive(Args)]
struct StageArgs {
    scene: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Directory for CSV tables.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, num_args = 2, value_names = ["NX", "NY"])]
    grid: Option<Vec<usize>>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    tol_root: Option<f64>,
    /// Recorded in the report metadata; the analyses are deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> projcurve::Result<u8> {
    let (args, stages): (StageArgs, &[Stage]) = match command {
        Command::Gen {
            template,
            params,
            seed,
            output,
        } => {
            let mut params = Params::parse(&params)?;
            if let Some(s) = seed {
                params = params.set("seed", s);
            }
            save_scene(&generate_scene(&template, &params)?, &output)?;
            return Ok(0);
        }
        Command::Check(a) => (a, &[Stage::Check]),
        Command::Position(a) => (a, &[Stage::Position]),
        Command::Normality(a) => (a, &[Stage::Normality]),
        Command::Zalcman(a) => (a, &[Stage::Zalcman]),
        Command::All(a) => (a, &Stage::ALL),
    };
    let overrides = Overrides {
        grid: args.grid.map(|g| (g[0], g[1])),
        epsilon: args.epsilon,
        delta: args.delta,
        tol_root: args.tol_root,
    };
    let scene = load_scene_with(&args.scene, &overrides)?;
    let mut report = run_pipeline(&scene, stages);
    if let Some(s) = args.seed {
        report.metadata.insert("seed".into(), s.into());
    }
    let json = report.to_json();
    match &args.output {
        Some(path) => std::fs::write(path, json + "\n")?,
        None => println!("{json}"),
    }
    if let Some(dir) = &args.csv {
        report.write_tables(dir)?;
    }
    for (name, outcome) in &report.stages {
        if let projcurve::harness::StageOutcome::Error { error, .. } = outcome {
            eprintln!("{name}: {error}");
        }
    }
    Ok(exit_code(&report) as u8)
}
