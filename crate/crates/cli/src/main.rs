use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use twint::run::render;
use twint::{parse_job, run_job, Flags, RunError};

/// Exact intersection numbers of twisted cocycles.
///
/// Exit status: 0 on success, 1 on parse, I/O or oracle errors, 2 when an
/// assumption of the recursion fails, 3 on non-generic input.
#[derive(Parser, Debug)]
#[command(name = "twint", version)]
struct Cli {
    /// Job file.
    #[arg(long)]
    job: PathBuf,
    /// Fibration order, overriding the job (comma or space separated).
    #[arg(long)]
    order: Option<String>,
    /// Check simple poles and the critical-point count at every level and
    /// report all of them.
    #[arg(long)]
    check_assumptions: bool,
    /// Confirm the exact result at N random rational samples.
    #[arg(long, value_name = "N", default_value_t = 0)]
    oracle: usize,
    /// Seed of the oracle samples.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    /// Print the per-level trace and the reduced forms.
    #[arg(long)]
    verbose: bool,
    /// Write the per-level trace as JSON to FILE.
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,
}

fn run(cli: &Cli) -> Result<(), RunError> {
    let text = std::fs::read_to_string(&cli.job)
        .map_err(|e| RunError::Io(format!("{}: {}", cli.job.display(), e)))?;
    let job = parse_job(&text)?;
    let flags = Flags {
        order: cli
            .order
            .as_ref()
            .map(|o| o.split([',', ' ']).filter(|s| !s.is_empty()).map(String::from).collect()),
        check_assumptions: cli.check_assumptions,
        oracle: cli.oracle,
        seed: cli.seed,
        verbose: cli.verbose || cli.trace.is_some(),
    };
    let mut report = run_job(&job, &flags)?;
    if let Some(path) = &cli.trace {
        let t = serde_json::to_string_pretty(&report.trace).expect("trace serializes");
        std::fs::write(path, t + "\n").map_err(|e| RunError::Io(format!("{}: {}", path.display(), e)))?;
        if !cli.verbose {
            report.trace = None;
            report.reduced = None;
        }
    }
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        println!("{}", render(&report));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
