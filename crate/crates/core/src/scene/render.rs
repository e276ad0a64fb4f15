use std::f64::consts::TAU;

use glam::{DVec3, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bvh::{
    build_binary_sah, collapse_to_width, compress, BuildConfig, CompressConfig, Triangle, UncompressedBvh,
};
use crate::isect::{FloatRay, Sidedness};
use crate::metrics::TrafficStats;
use crate::traversal::{trace_batch, CompressedAccel, Mode, RayFormat, RayQuantizer, RayRecord, UncompressedAccel};

use super::{Camera, Image, Result, WorldRay};

const ALBEDO: f64 = 0.7;
/// Radiance picked up at every hit, scaled by the cosine to the viewer.
const GLOW: f64 = 0.2;
const SKY: f64 = 1.0;

/// Closest hit in world space. `normal` is unit length but not oriented.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceHit {
    pub id: u32,
    pub point: DVec3,
    pub normal: DVec3,
}

/// Batch ray casting against one acceleration structure.
pub trait Tracer: Sync {
    fn trace(&self, rays: &[WorldRay], mode: Mode, stats: &mut TrafficStats) -> Result<Vec<Option<SurfaceHit>>>;
    /// Distance secondary rays start away from the surface they leave.
    fn surface_offset(&self) -> f64;
}

fn unit_normal(t: [DVec3; 3]) -> DVec3 {
    (t[1] - t[0]).cross(t[2] - t[0]).normalize_or_zero()
}

/// Compressed tree traced with fixed-point kernels.
#[derive(Debug, Clone)]
pub struct FixedTracer {
    pub accel: CompressedAccel,
    pub quant: RayQuantizer,
    /// Normals of the quantized triangles, by mesh triangle id.
    normals: Vec<DVec3>,
}

impl FixedTracer {
    pub fn build(tris: &[Triangle], width: usize, fmt: RayFormat, side: Sidedness) -> Result<Self> {
        let wide = collapse_to_width(&build_binary_sah(tris, &BuildConfig::default())?, width)?;
        let (bvh, _) = compress(&wide, tris, &CompressConfig::default())?;
        Self::from_accel(CompressedAccel::new(bvh, side)?, fmt)
    }

    pub fn from_accel(accel: CompressedAccel, fmt: RayFormat) -> Result<Self> {
        let quant = RayQuantizer::new(accel.bvh.leaf_exp, fmt)?;
        let cell = accel.bvh.leaf_cell();
        let mut normals = vec![DVec3::ZERO; accel.bvh.tri_ids.len()];
        for (p, &id) in accel.bvh.tri_ids.iter().enumerate() {
            let t = accel.fx_triangle(p as u32);
            normals[id as usize] = unit_normal(t.v.map(|v| DVec3::from_array(v.to_f64()) * cell));
        }
        Ok(Self { accel, quant, normals })
    }

    pub fn records(&self, rays: &[WorldRay]) -> Result<Vec<RayRecord>> {
        Ok(rays.iter().map(|r| self.quant.ray_to_fixed(r.origin, r.dir)).collect::<std::result::Result<_, _>>()?)
    }
}

impl Tracer for FixedTracer {
    fn trace(&self, rays: &[WorldRay], mode: Mode, stats: &mut TrafficStats) -> Result<Vec<Option<SurfaceHit>>> {
        let recs = self.records(rays)?;
        let fx: Vec<_> = recs.iter().map(|r| self.quant.fx_ray(r)).collect();
        let hits = trace_batch(&self.accel, &fx, mode, stats);
        Ok(recs
            .iter()
            .zip(hits)
            .map(|(r, h)| {
                h.is_hit().then(|| SurfaceHit {
                    id: h.id,
                    point: self.quant.point_at(r, h.t),
                    normal: self.normals[h.id as usize],
                })
            })
            .collect())
    }

    /// One leaf-grid cell (the largest over the axes).
    fn surface_offset(&self) -> f64 {
        self.accel.bvh.leaf_cell().max_element()
    }
}

/// Float tree traced with `f32` kernels.
#[derive(Debug, Clone)]
pub struct FloatTracer {
    pub accel: UncompressedAccel,
    normals: Vec<DVec3>,
    offset: f64,
}

impl FloatTracer {
    pub fn build(tris: &[Triangle], width: usize, side: Sidedness) -> Result<Self> {
        let wide = collapse_to_width(&build_binary_sah(tris, &BuildConfig::default())?, width)?;
        Ok(Self::from_accel(UncompressedAccel::new(UncompressedBvh::from_wide(&wide, tris), side), tris))
    }

    pub fn from_accel(accel: UncompressedAccel, tris: &[Triangle]) -> Self {
        let normals = tris.iter().map(|t| unit_normal(t.map(|v| v.as_dvec3()))).collect();
        let (lo, hi) =
            tris.iter().flatten().fold((Vec3::INFINITY, Vec3::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        let offset = f64::from((hi - lo).length()) * (-12f64).exp2();
        Self { accel, normals, offset }
    }
}

impl Tracer for FloatTracer {
    fn trace(&self, rays: &[WorldRay], mode: Mode, stats: &mut TrafficStats) -> Result<Vec<Option<SurfaceHit>>> {
        let fr: Vec<_> = rays.iter().map(|r| FloatRay::new(r.origin.as_vec3(), r.dir.as_vec3())).collect();
        let hits = trace_batch(&self.accel, &fr, mode, stats);
        Ok(fr
            .iter()
            .zip(hits)
            .map(|(r, h)| {
                h.is_hit().then(|| SurfaceHit {
                    id: h.id,
                    point: (r.origin + r.dir * h.t).as_dvec3(),
                    normal: self.normals[h.id as usize],
                })
            })
            .collect())
    }

    fn surface_offset(&self) -> f64 {
        self.offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderSettings {
    /// Diffuse bounces after the primary hit.
    pub bounces: u32,
    pub seed: u64,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Render {
    pub image: Image,
    /// Traffic of each generation of rays; entry 0 is the primary rays.
    pub per_bounce: Vec<TrafficStats>,
}

impl Render {
    pub fn total(&self) -> TrafficStats {
        self.per_bounce.iter().copied().sum()
    }
}

/// Cosine-weighted direction around `n` from the stream of `(seed, pixel)`
/// at a fixed position for `bounce`.
fn sample_bounce(n: DVec3, seed: u64, pixel: u64, bounce: u32) -> DVec3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(pixel);
    rng.set_word_pos(u128::from(bounce) * 16);
    let (r1, r2): (f64, f64) = (rng.random(), rng.random());
    let (b1, b2) = n.any_orthonormal_pair();
    let r = r2.sqrt();
    let phi = TAU * r1;
    (b1 * (r * phi.cos()) + b2 * (r * phi.sin()) + n * (1.0 - r2).max(0.0).sqrt()).normalize()
}

/// Renders one sample per pixel. Every hit adds `GLOW * |cos|` times the
/// path throughput and continues with a cosine-sampled bounce; misses see a
/// white sky. Traffic is recorded separately for each generation of rays.
pub fn path_trace<T: Tracer + ?Sized>(camera: &Camera, tracer: &T, s: &RenderSettings) -> Result<Render> {
    let mut image = Image::new(camera.width, camera.height);
    let n = image.rgb.len();
    let mut radiance = vec![0.0f64; n];
    let mut throughput = vec![1.0f64; n];
    let mut pixels: Vec<u32> = (0..n as u32).collect();
    let mut rays = camera.primary_rays();
    let mut per_bounce = Vec::new();

    for bounce in 0..=s.bounces {
        if rays.is_empty() {
            per_bounce.push(TrafficStats::default());
            continue;
        }
        let mut stats = TrafficStats::default();
        let hits = tracer.trace(&rays, s.mode, &mut stats)?;
        per_bounce.push(stats);
        let mut next_pixels = Vec::new();
        let mut next_rays = Vec::new();
        for ((&p, ray), hit) in pixels.iter().zip(&rays).zip(hits) {
            let pi = p as usize;
            let Some(h) = hit else {
                radiance[pi] += throughput[pi] * SKY;
                continue;
            };
            if bounce == 0 {
                image.hit_ids[pi] = h.id;
            }
            let facing = if h.normal.dot(ray.dir) > 0.0 { -h.normal } else { h.normal };
            radiance[pi] += throughput[pi] * GLOW * facing.dot(-ray.dir).abs();
            throughput[pi] *= ALBEDO;
            if bounce < s.bounces && facing != DVec3::ZERO {
                let dir = sample_bounce(facing, s.seed, p.into(), bounce);
                next_pixels.push(p);
                next_rays.push(WorldRay { origin: h.point + facing * tracer.surface_offset(), dir });
            }
        }
        pixels = next_pixels;
        rays = next_rays;
    }

    for (px, &r) in image.rgb.iter_mut().zip(&radiance) {
        let v = (r.clamp(0.0, 1.0).sqrt() * 255.0).round() as u8;
        *px = [v; 3];
    }
    Ok(Render { image, per_bounce })
}
