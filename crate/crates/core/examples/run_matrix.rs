//! Runs the whole configuration matrix like the `quantrace` binary and
//! writes results.csv, diff.csv and one PPM per configuration.
//!
//! `cargo run --release --example run_matrix -- out_dir`

use quantrace::cli::{run_matrix, RunConfig, RunOptions, SceneSource};
use quantrace::isect::Sidedness;
use quantrace::scene::Procedural;
use quantrace::traversal::RayFormat;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "matrix_out".into());
    let opts = RunOptions {
        scene: SceneSource::Procedural(Procedural::Cornell),
        resolution: (128, 128),
        bounces: 1,
        seed: 1,
        format: RayFormat::default(),
        side: Sidedness::TwoSided,
        out: out.clone().into(),
        reference: Some("BVH8-SR-U".parse()?),
    };
    let outcome = run_matrix(&RunConfig::all(), &opts)?;
    for (cfg, d) in &outcome.diffs {
        println!("{cfg:10} vs reference: {:?}", d);
    }
    println!("wrote {} renders to {out}", outcome.runs.len());
    Ok(())
}
