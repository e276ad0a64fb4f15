//! Per-category traffic of a small render for both engines, as CSV.

use quantrace::cli::{run_matrix_in_memory, RunConfig, RunOptions, SceneSource};
use quantrace::isect::Sidedness;
use quantrace::scene::Procedural;
use quantrace::traversal::RayFormat;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let configs = ["BVH4-SR-U", "BVH4-RS-U", "BVH4-SR-C", "BVH4-RS-C"]
        .iter()
        .map(|l| l.parse::<RunConfig>())
        .collect::<Result<Vec<_>, _>>()?;
    let opts = RunOptions {
        scene: SceneSource::Procedural(Procedural::Sphere(3)),
        resolution: (64, 64),
        bounces: 1,
        seed: 1,
        format: RayFormat::default(),
        side: Sidedness::TwoSided,
        out: "unused".into(),
        reference: None,
    };
    let outcome = run_matrix_in_memory(&configs, &opts)?;
    print!("{}", outcome.results_csv);
    Ok(())
}
