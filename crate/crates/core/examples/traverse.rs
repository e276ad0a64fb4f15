//! Single-ray and ray-stream traversal of the same rays give identical hits
//! but very different memory traffic.

use quantrace::isect::Sidedness;
use quantrace::metrics::TrafficStats;
use quantrace::scene::{Camera, FixedTracer, Procedural};
use quantrace::traversal::{trace_batch, Mode, RayFormat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scene = Procedural::Cornell;
    let tris = scene.mesh().triangles();
    let tracer = FixedTracer::build(&tris, 8, RayFormat::default(), Sidedness::TwoSided)?;
    let cam = Camera::for_scene(scene, 64, 64)?;
    let rays: Vec<_> = tracer.records(&cam.primary_rays())?.iter().map(|r| tracer.quant.fx_ray(r)).collect();

    let mut results = Vec::new();
    for mode in [Mode::Single, Mode::Stream] {
        let mut stats = TrafficStats::default();
        let hits = trace_batch(&tracer.accel, &rays, mode, &mut stats);
        println!(
            "{mode}: {} hits, {} node fetches, {} total bytes, {:.1}% ray traffic",
            hits.iter().filter(|h| h.is_hit()).count(),
            stats.node_fetches,
            stats.total_bytes(),
            stats.ray_traffic_pct()
        );
        results.push(hits);
    }
    println!("identical hits: {}", results[0] == results[1]);
    Ok(())
}
