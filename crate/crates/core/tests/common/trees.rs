//! Whole-tree checks shared by the invariant, equivalence and acceptance
//! suites.

use quantrace::bvh::{
    build_binary_sah, collapse_to_width, compress, node_byte_size, validate_against, validate_hierarchy, BuildConfig,
    CompressConfig, Triangle, UncompressedBvh, WideNodeC, WideNodeU, FLOAT_TRIANGLE_BYTES,
};
use quantrace::metrics::TrafficStats;
use quantrace::quantize::QTriangle;
use quantrace::traversal::{traverse_single, traverse_stream, Accel};
use rayon::prelude::*;

/// Builds, compresses and validates one tree; checks pool ratios and
/// record round trips.
pub fn check_tree(tris: &[Triangle], width: usize, cfg: &CompressConfig, what: &str) {
    let wide = collapse_to_width(&build_binary_sah(tris, &BuildConfig::default()).unwrap(), width).unwrap();
    let (c, stats) = compress(&wide, tris, cfg).unwrap();
    let h = validate_hierarchy(&c);
    assert!(h.is_ok(), "{what} BVH{width}: {:?}", &h.violations[..h.violations.len().min(5)]);
    let a = validate_against(&c, &wide, tris);
    assert!(a.is_ok(), "{what} BVH{width}: {:?}", &a.violations[..a.violations.len().min(5)]);

    let u = UncompressedBvh::from_wide(&wide, tris);
    assert_eq!(c.nodes.len(), u.nodes.len());
    // pool sizes scale exactly with the record sizes
    let (nc, nu) = (node_byte_size(width, true).unwrap(), node_byte_size(width, false).unwrap());
    assert_eq!(c.node_pool_bytes() * nu, u.node_pool_bytes() * nc);
    assert_eq!(c.triangle_pool_bytes() * FLOAT_TRIANGLE_BYTES, u.triangle_pool_bytes() * QTriangle::BYTES);
    assert_eq!(stats.node_bytes_compressed, c.node_pool_bytes());
    assert_eq!(stats.triangle_bytes_uncompressed, u.triangle_pool_bytes());

    for n in &c.nodes {
        let b = n.to_bytes();
        assert_eq!(b.len(), nc);
        assert_eq!(WideNodeC::from_bytes(width, &b).as_ref(), Some(n));
    }
    for n in &u.nodes {
        let b = n.to_bytes();
        assert_eq!(b.len(), nu);
        assert_eq!(WideNodeU::from_bytes(width, &b).as_ref(), Some(n));
    }
    for t in &c.triangles {
        assert_eq!(QTriangle::from_bytes(t.to_bytes()), *t);
    }
}

/// SR and RS agree on every ray, and the first `scan` rays match a linear
/// scan over the whole pool.
pub fn check_equivalence<A: Accel>(accel: &A, pool: usize, rays: &[A::Ray], scan: usize, what: &str) {
    let mut s = TrafficStats::default();
    let single: Vec<_> = rays.iter().map(|r| traverse_single(accel, r, &mut s)).collect();
    let stream = traverse_stream(accel, rays, &mut TrafficStats::default());
    assert_eq!(single, stream, "{what}: SR and RS differ");
    let bad = rays[..scan].par_iter().zip(&single).position_first(|(r, h)| *h != super::brute(accel, pool, r));
    assert_eq!(bad, None, "{what}: ray differs from linear scan");
}
