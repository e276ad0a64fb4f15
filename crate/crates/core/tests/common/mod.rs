//! Shared scenes, ray generators and brute-force oracles.
#![allow(dead_code)]

use glam::{DVec3, Vec3};
use quantrace::bvh::Triangle;
use quantrace::isect::{FloatRay, FxRay, Sidedness};
use quantrace::scene::{FixedTracer, FloatTracer, Procedural, WorldRay};
use quantrace::traversal::{Accel, RayFormat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod fxp;
pub mod trees;

pub fn scenes() -> Vec<(Procedural, Vec<Triangle>)> {
    [Procedural::Cornell, Procedural::Sphere(3), Procedural::Grid(8)]
        .into_iter()
        .map(|p| (p, p.mesh().triangles()))
        .collect()
}

pub fn fixed(tris: &[Triangle], width: usize) -> FixedTracer {
    FixedTracer::build(tris, width, RayFormat::default(), Sidedness::TwoSided).unwrap()
}

pub fn float(tris: &[Triangle], width: usize) -> FloatTracer {
    FloatTracer::build(tris, width, Sidedness::TwoSided).unwrap()
}

fn bounds(tris: &[Triangle]) -> (DVec3, DVec3) {
    tris.iter()
        .flatten()
        .fold((DVec3::INFINITY, DVec3::NEG_INFINITY), |(l, h), v| (l.min(v.as_dvec3()), h.max(v.as_dvec3())))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit(rng: &mut ChaCha8Rng) -> DVec3 {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    DVec3::new(r * phi.cos(), r * phi.sin(), z)
}

/// Origins in the scene box grown by 20%; half the rays aim at a random
/// point of a random triangle, the rest point anywhere.
pub fn random_rays(tris: &[Triangle], n: usize, seed: u64) -> Vec<WorldRay> {
    let (lo, hi) = bounds(tris);
    let pad = (hi - lo) * 0.2;
    let mut rng = rng(seed);
    (0..n)
        .map(|i| {
            let o = DVec3::new(
                rng.random_range(lo.x - pad.x..=hi.x + pad.x),
                rng.random_range(lo.y - pad.y..=hi.y + pad.y),
                rng.random_range(lo.z - pad.z..=hi.z + pad.z),
            );
            let dir = if i % 2 == 0 {
                let t = tris[rng.random_range(0..tris.len())];
                let (a, b): (f64, f64) = (rng.random(), rng.random());
                let (a, b) = if a + b > 1.0 { (1.0 - a, 1.0 - b) } else { (a, b) };
                let p = t[0].as_dvec3() + (t[1] - t[0]).as_dvec3() * a + (t[2] - t[0]).as_dvec3() * b;
                (p - o).normalize_or(DVec3::X)
            } else {
                unit(&mut rng)
            };
            WorldRay { origin: o, dir }
        })
        .collect()
}

pub fn fx_rays(t: &FixedTracer, rays: &[WorldRay]) -> Vec<FxRay> {
    t.records(rays).unwrap().iter().map(|r| t.quant.fx_ray(r)).collect()
}

pub fn float_rays(rays: &[WorldRay]) -> Vec<FloatRay> {
    rays.iter().map(|r| FloatRay::new(r.origin.as_vec3(), r.dir.as_vec3())).collect()
}

/// Closest hit over every pool triangle with the tree's own kernel.
pub fn brute<A: Accel>(accel: &A, pool: usize, ray: &A::Ray) -> A::Hit {
    let mut r = *ray;
    let mut hit = accel.no_hit();
    for p in 0..pool as u32 {
        accel.intersect_triangle(p, &mut r, &mut hit);
    }
    hit
}

pub fn v3(x: f32, y: f32, z: f32) -> Vec3 {
    Vec3::new(x, y, z)
}

pub mod watertight {
    use std::collections::HashMap;

    use quantrace::fxp::FxVec3;
    use quantrace::isect::{ray_tri_fixed, FxRay, Sidedness, MAX_T_RAW};
    use quantrace::metrics::TrafficStats;
    use quantrace::scene::{Camera, FixedTracer, FloatTracer, Procedural, Tracer, TriangleMesh, WorldRay};
    use quantrace::traversal::Mode;
    use rand::Rng;

    #[derive(Debug, Default)]
    pub struct EdgeFuzz {
        pub rays: usize,
        /// World rays aimed at a shared edge that miss both faces.
        pub dual_misses: usize,
        /// World rays aimed at a shared edge that miss the whole scene.
        pub scene_misses: usize,
        /// Leaf-grid rays through an exact point of a shared edge that miss
        /// both faces.
        pub exact_dual_misses: usize,
        /// Exact rays not cast because their origin lies in a face plane.
        pub exact_skipped: usize,
    }

    /// Edges shared by exactly two faces, with the two face ids.
    fn shared_edges(mesh: &TriangleMesh) -> Vec<([u32; 2], [u32; 2])> {
        let mut m: HashMap<[u32; 2], Vec<u32>> = HashMap::new();
        for (f, t) in mesh.indices.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                m.entry([a.min(b), a.max(b)]).or_default().push(f as u32);
            }
        }
        let mut out: Vec<_> = m.into_iter().filter(|(_, f)| f.len() == 2).map(|(e, f)| (e, [f[0], f[1]])).collect();
        out.sort_unstable();
        out
    }

    pub fn edge_fuzz(mesh: &TriangleMesh, f: &FixedTracer, n: usize, seed: u64) -> EdgeFuzz {
        let edges = shared_edges(mesh);
        let mut pool_of = vec![0u32; mesh.len()];
        for (p, &id) in f.accel.bvh.tri_ids.iter().enumerate() {
            pool_of[id as usize] = p as u32;
        }
        let mut rng = super::rng(seed);
        let mut out = EdgeFuzz { rays: n, ..Default::default() };
        let mut world = Vec::with_capacity(n);
        for _ in 0..n {
            let (e, faces) = edges[rng.random_range(0..edges.len())];
            let (a, b) = (mesh.positions[e[0] as usize].as_dvec3(), mesh.positions[e[1] as usize].as_dvec3());
            let p = a.lerp(b, rng.random_range(0.25..0.75));
            let normals = faces.map(|t| {
                let t = mesh.triangle(t as usize).map(|v| v.as_dvec3());
                (t[1] - t[0]).cross(t[2] - t[0]).normalize()
            });
            // grazing rays can legitimately slip past an edge once their
            // direction is quantized, so stay ~12 degrees off both faces
            let u = loop {
                let u = super::unit(&mut rng);
                let u = if u.dot(normals[0] + normals[1]) < 0.0 { -u } else { u };
                if normals.iter().all(|n| u.dot(*n) >= 0.2) {
                    break u;
                }
            };
            let ray = WorldRay { origin: p + u * rng.random_range(0.3..3.0), dir: -u };
            world.push(ray);

            let rec = f.quant.ray_to_fixed(ray.origin, ray.dir).unwrap();
            let fx = f.quant.fx_ray(&rec);
            let hit = |r: &FxRay, face: u32| {
                let p = pool_of[face as usize];
                ray_tri_fixed(r, f.accel.fx_triangle(p), face, Sidedness::TwoSided, None).is_some()
            };
            if !faces.iter().any(|&t| hit(&fx, t)) {
                out.dual_misses += 1;
            }

            // exact ray through a quarter point of the quantized shared edge
            let t0 = f.accel.fx_triangle(pool_of[faces[0] as usize]);
            let corners: Vec<[i64; 3]> = t0.v.iter().map(|v| v.components().map(|c| c.val() as i64)).collect();
            let local = |v: u32| mesh.indices[faces[0] as usize].iter().position(|&x| x == v).unwrap();
            let (qa, qb) = (corners[local(e[0])], corners[local(e[1])]);
            let k = rng.random_range(1..4);
            let target4 = [0, 1, 2].map(|i| 4 * qa[i] + k * (qb[i] - qa[i]));
            let mut o = [0; 3].map(|_| 0i64);
            let mut d = [0i64; 3];
            for i in 0..3 {
                o[i] = target4[i].div_euclid(4) + (u[i] * 150.0).round() as i64;
                d[i] = target4[i] - 4 * o[i];
            }
            // a ray inside the plane of a face is parallel to it
            let in_plane = faces.iter().any(|&t| {
                let v = f.accel.fx_triangle(pool_of[t as usize]).v.map(|v| v.components().map(|c| c.val()));
                let (e1, e2) = ([0, 1, 2].map(|i| v[1][i] - v[0][i]), [0, 1, 2].map(|i| v[2][i] - v[0][i]));
                let n = [e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2], e1[0] * e2[1] - e1[1] * e2[0]];
                (0..3).map(|i| n[i] * (i128::from(o[i]) - v[0][i])).sum::<i128>() == 0
            });
            if d == [0; 3] || in_plane {
                out.exact_skipped += 1;
                continue;
            }
            let origin = FxVec3::from_raw(o.map(i128::from), 24, 0).unwrap();
            let dir = FxVec3::from_raw(d.map(i128::from), 12, 0).unwrap();
            let exact = FxRay::new(origin, dir, MAX_T_RAW).unwrap();
            if !faces.iter().any(|&t| hit(&exact, t)) {
                out.exact_dual_misses += 1;
            }
        }
        let mut s = TrafficStats::default();
        out.scene_misses = f.trace(&world, Mode::Stream, &mut s).unwrap().iter().filter(|h| h.is_none()).count();
        out
    }

    #[derive(Debug)]
    pub struct HoleAudit {
        /// Pixels whose float hit is farther than the margin from the
        /// silhouette.
        pub interior: usize,
        /// Interior pixels the fixed-point trace misses.
        pub holes: usize,
        /// Largest margin used, in pixels.
        pub max_margin_px: usize,
    }

    /// Primary-ray audit of `sphere(n)`: a pixel is interior when every
    /// pixel within two leaf cells (converted to pixels at its hit depth)
    /// also has a float hit.
    pub fn hole_pixels(n: u32, res: u32, width: usize) -> HoleAudit {
        let mesh = Procedural::Sphere(n).mesh();
        let tris = mesh.triangles();
        let f = super::fixed(&tris, width);
        let u: FloatTracer = super::float(&tris, width);
        let cam = Camera::for_scene(Procedural::Sphere(n), res, res).unwrap();
        let rays = cam.primary_rays();
        let mut s = TrafficStats::default();
        let fh = f.trace(&rays, Mode::Single, &mut s).unwrap();
        let uh = u.trace(&rays, Mode::Single, &mut s).unwrap();
        let cell = f.surface_offset();
        let covered = |x: i64, y: i64| {
            x >= 0
                && y >= 0
                && x < i64::from(res)
                && y < i64::from(res)
                && uh[(y * i64::from(res) + x) as usize].is_some()
        };
        let mut audit = HoleAudit { interior: 0, holes: 0, max_margin_px: 0 };
        for y in 0..i64::from(res) {
            for x in 0..i64::from(res) {
                let i = (y * i64::from(res) + x) as usize;
                let Some(h) = uh[i] else { continue };
                let depth = (h.point - cam.position).dot(cam.forward());
                let m = (2.0 * cell / cam.pixel_footprint(depth)).ceil().max(1.0) as i64;
                audit.max_margin_px = audit.max_margin_px.max(m as usize);
                if (-m..=m).all(|dy| (-m..=m).all(|dx| covered(x + dx, y + dy))) {
                    audit.interior += 1;
                    audit.holes += usize::from(fh[i].is_none());
                }
            }
        }
        audit
    }
}
