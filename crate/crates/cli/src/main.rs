use calderon_core::pipeline::{dump, parse_config, run_verification_suite, DumpFormat};
use calderon_core::CoreError;
use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

/// Run the verification suite or dump a named symbol or model operator.
#[derive(Parser, Debug)]
#[command(name = "calderon", version)]
struct Args {
    /// JSON configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Restrict the suite to these checks.
    #[arg(long = "check", num_args = 1..)]
    checks: Vec<String>,
    /// Print a symbol or model operator instead of running checks.
    #[arg(long)]
    dump: Option<String>,
    #[arg(long, default_value = "json", value_parser = ["json", "latex"])]
    format: String,
    /// Write the report or dump here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Global tolerance cap.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

fn run(args: Args) -> Result<bool, CoreError> {
    let text = match &args.config {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| CoreError::Config(format!("cannot read {}: {e}", p.display())))?,
        None => "{}".to_string(),
    };
    let mut cfg = parse_config(&text)?;
    if !args.checks.is_empty() {
        cfg.checks = args.checks.clone();
    }
    if let Some(t) = args.tolerance {
        cfg.tolerance = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = &args.output {
        cfg.output = Some(o.display().to_string());
    }
    cfg.validate()?;
    let (doc, ok) = match &args.dump {
        Some(sel) => {
            let fmt = DumpFormat::parse(&args.format).expect("validated by clap");
            (dump(&cfg, sel, fmt)?, true)
        }
        None => {
            let rep = run_verification_suite(&cfg)?;
            for c in &rep.checks {
                eprintln!("{:<24} {} max_error={:.3e} tol={:.1e} {} ms", c.name, c.status, c.max_error, c.tolerance, c.runtime_ms);
            }
            (rep.to_json_string(), rep.all_passed())
        }
    };
    match &cfg.output {
        Some(p) => std::fs::write(p, doc)?,
        None => print!("{doc}"),
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
