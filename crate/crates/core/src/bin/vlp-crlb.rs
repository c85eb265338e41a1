use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use vlp_crlb::run::{run, validate, RunOverrides};

/// Monte-Carlo Cramér-Rao bounds for VLC vehicle-to-vehicle localization.
#[derive(Debug, Parser)]
#[command(name = "vlp-crlb", version)]
struct Args {
    /// platoon-straight, platoon-join or lane-change-braking (or 1, 2, 3).
    #[arg(long)]
    scenario: Option<String>,
    /// Comma-separated subset of pdoa, rtof, aoa2, aoa1.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Comma-separated subset of low, high.
    #[arg(long, value_delimiter = ',')]
    conditions: Option<Vec<String>>,
    /// Monte-Carlo trials per frame.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write one SVG plot per channel condition.
    #[arg(long)]
    plots: bool,
    /// Flat key-value run file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Only check the configuration.
    #[arg(long)]
    dry_run: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let file = match &args.config {
        Some(p) => match RunOverrides::from_file(p) {
            Ok(f) => f,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => RunOverrides::default(),
    };
    let cli = RunOverrides {
        scenario: args.scenario,
        methods: args.methods,
        conditions: args.conditions,
        trials: args.trials,
        seed: args.seed,
        out: args.out,
        plots: args.plots.then_some(true),
        ..Default::default()
    };
    let config = match cli.merge(file).resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let problems = validate(&config);
    if !problems.is_empty() {
        for p in &problems {
            eprintln!("error: {p}");
        }
        return ExitCode::from(2);
    }
    if args.dry_run {
        println!("configuration ok");
        return ExitCode::SUCCESS;
    }
    let start = Instant::now();
    match run(&config) {
        Ok(out) => {
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            eprintln!("{} rows in {:.1} s", out.rows.len(), start.elapsed().as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
