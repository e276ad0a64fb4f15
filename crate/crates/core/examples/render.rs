//! Path-traces a scene through the compressed BVH8 and writes a PPM.
//!
//! `cargo run --release --example render -- sphere:3 out.ppm`

use quantrace::isect::Sidedness;
use quantrace::scene::{path_trace, write_image, Camera, FixedTracer, Procedural, RenderSettings};
use quantrace::traversal::{Mode, RayFormat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let scene: Procedural = args.next().as_deref().unwrap_or("cornell").parse()?;
    let path = args.next().unwrap_or_else(|| "render.ppm".into());
    let tracer = FixedTracer::build(&scene.mesh().triangles(), 8, RayFormat::default(), Sidedness::TwoSided)?;
    let cam = Camera::for_scene(scene, 256, 256)?;
    let r = path_trace(&cam, &tracer, &RenderSettings { bounces: 2, seed: 1, mode: Mode::Stream })?;
    write_image(&r.image, &path)?;
    for (k, s) in r.per_bounce.iter().enumerate() {
        println!("bounce {k}: {} rays, {} bytes", s.rays, s.total_bytes());
    }
    println!("wrote {path}");
    Ok(())
}
