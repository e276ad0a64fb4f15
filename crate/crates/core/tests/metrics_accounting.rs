mod common;

use glam::{DVec3, Vec3};
use quantrace::bvh::Triangle;
use quantrace::metrics::{report_csv, ConfigReport, TrafficStats, CSV_COLUMNS};
use quantrace::scene::WorldRay;
use quantrace::traversal::{traverse_single, traverse_stream};

/// Two tilted unit quads far apart: a root with two leaves of two
/// triangles.
fn two_quads() -> Vec<Triangle> {
    let quad = |x: f32| {
        let p = |a: f32, b: f32| Vec3::new(x + a, b, 0.25 * b);
        [[p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0)], [p(0.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)]]
    };
    quad(0.0).into_iter().chain(quad(10.0)).collect()
}

fn down(x: f64, y: f64) -> WorldRay {
    WorldRay { origin: DVec3::new(x, y, 5.0), dir: DVec3::NEG_Z }
}

#[test]
fn hand_counted_single_ray() {
    let tris = two_quads();
    let f = common::fixed(&tris, 2);
    assert_eq!(f.accel.bvh.nodes.len(), 3);
    let r = common::fx_rays(&f, &[down(0.3, 0.6)]);
    let mut s = TrafficStats::default();
    assert!(traverse_single(&f.accel, &r[0], &mut s).is_hit());
    let want = TrafficStats {
        node_bounds: 2 * 36,
        triangles: 2 * 9,
        ray_loads: 32,
        sr_stack: 4 * 4,
        box_tests: 2,
        tri_tests: 2,
        node_fetches: 2,
        rays: 1,
        ..Default::default()
    };
    assert_eq!(s, want);
    assert_eq!(s.total_bytes(), 72 + 18 + 32 + 16);

    let u = common::float(&tris, 2);
    let mut s = TrafficStats::default();
    assert!(traverse_single(&u.accel, &common::float_rays(&[down(0.3, 0.6)])[0], &mut s).is_hit());
    assert_eq!((s.node_bounds, s.triangles, s.ray_loads), (2 * 64, 2 * 36, 40));
}

#[test]
fn hand_counted_stream() {
    let tris = two_quads();
    let f = common::fixed(&tris, 2);
    let r = common::fx_rays(&f, &[down(0.3, 0.6), down(0.7, 0.2)]);
    let mut s = TrafficStats::default();
    let hits = traverse_stream(&f.accel, &r, &mut s);
    assert!(hits.iter().all(|h| h.is_hit()));
    let want = TrafficStats {
        node_bounds: 2 * 36,
        triangles: 2 * 9,
        // each node loads both rays
        ray_loads: 2 * 2 * 32,
        ray_stores: 2 * 16,
        // root push and pop, leaf push and pop
        rs_stack: 4 * 12,
        // initial list, root read, leaf list write, leaf read
        ray_lists: 4 * 2 * 4,
        box_tests: 2 * 2,
        tri_tests: 2 * 2,
        node_fetches: 2,
        rays: 2,
        ..Default::default()
    };
    assert_eq!(s, want);

    let mut sr = TrafficStats::default();
    for ray in &r {
        traverse_single(&f.accel, ray, &mut sr);
    }
    assert_eq!(sr.node_bounds, 2 * s.node_bounds);
    assert_eq!(sr.triangles, 2 * s.triangles);
}

#[test]
fn missing_ray_touches_only_the_root() {
    let tris = two_quads();
    let f = common::fixed(&tris, 4);
    let r = common::fx_rays(&f, &[down(5.0, 0.5)]);
    let mut s = TrafficStats::default();
    assert!(!traverse_single(&f.accel, &r[0], &mut s).is_hit());
    assert_eq!((s.node_fetches, s.triangles, s.sr_stack), (1, 0, 8));
    let mut s = TrafficStats::default();
    traverse_stream(&f.accel, &r, &mut s);
    assert_eq!((s.node_fetches, s.triangles, s.ray_stores, s.rs_stack), (1, 0, 0, 24));
}

#[test]
fn csv_header_and_rows() {
    let stats = TrafficStats { node_bounds: 10, rays: 1, ray_loads: 30, ..Default::default() };
    let row = ConfigReport {
        label: "BVH4-SR-C".into(),
        width: 4,
        mode: "SR".into(),
        compression: "C".into(),
        stats,
        per_bounce: vec![stats],
    };
    let csv = report_csv(&[row]);
    let mut lines = csv.lines();
    let header: Vec<_> = lines.next().unwrap().split(',').collect();
    assert_eq!(&header[..16], &CSV_COLUMNS);
    assert_eq!(header[16], "bounce0_bytes");
    assert_eq!(lines.next().unwrap(), "BVH4-SR-C,4,SR,C,1,10,0,30,0,0,0,0,40,75.000,0,0,40");
}
