//! Builds a binary SAH tree, collapses it to each width and compresses it.
//!
//! `cargo run --example compress_bvh -- sphere:4`

use quantrace::bvh::{
    build_binary_sah, collapse_to_width, compress, validate_against, BuildConfig, CompressConfig, UncompressedBvh,
};
use quantrace::scene::Procedural;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scene: Procedural = std::env::args().nth(1).as_deref().unwrap_or("cornell").parse()?;
    let tris = scene.mesh().triangles();
    let bin = build_binary_sah(&tris, &BuildConfig::default())?;
    println!("{scene}: {} triangles, binary depth {}", tris.len(), bin.depth());
    println!("width  nodes  leaf_exp        C node  U node  C pool  U pool  valid");
    for width in [2, 4, 8] {
        let wide = collapse_to_width(&bin, width)?;
        let (c, stats) = compress(&wide, &tris, &CompressConfig::default())?;
        let u = UncompressedBvh::from_wide(&wide, &tris);
        let c_pool = c.node_pool_bytes() + c.triangle_pool_bytes();
        let u_pool = u.node_pool_bytes() + u.triangle_pool_bytes();
        println!(
            "{width:5}  {:5}  {:14}  {:6}  {:6}  {:6}  {:6}  {}",
            stats.nodes,
            format!("{:?}", stats.leaf_exp),
            c.node_bytes(),
            u.node_bytes(),
            c_pool,
            u_pool,
            validate_against(&c, &wide, &tris).is_ok()
        );
    }
    Ok(())
}
