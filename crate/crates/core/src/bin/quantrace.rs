use std::process::ExitCode;

use clap::Parser;
use quantrace::cli::{run_matrix, Args};

fn main() -> ExitCode {
    let args = Args::parse();
    let outcome = match args.resolve().and_then(|(configs, opts)| run_matrix(&configs, &opts)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    for run in &outcome.runs {
        let s = run.render.total();
        println!("{:<10} {:>14} bytes  {:>5.1}% ray traffic", run.config, s.total_bytes(), s.ray_traffic_pct());
    }
    for (c, e) in &outcome.failures {
        eprintln!("{c}: {e}");
    }
    println!("wrote {}", args.out.display());
    if outcome.ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
