use glam::Vec3;

use crate::bvh::Triangle;

use super::Sidedness;

/// `gamma(3)` of the standard floating point error analysis.
const GAMMA3: f32 = 3.0 * f32::EPSILON * 0.5 / (1.0 - 3.0 * f32::EPSILON * 0.5);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloatRay {
    pub origin: Vec3,
    pub dir: Vec3,
    pub t_max: f32,
}

impl FloatRay {
    pub fn new(origin: Vec3, dir: Vec3) -> Self {
        Self { origin, dir, t_max: f32::INFINITY }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloatHit {
    pub t: f32,
    pub id: u32,
    pub u: f32,
    pub v: f32,
}

impl FloatHit {
    pub const NONE: FloatHit = FloatHit { t: f32::INFINITY, id: u32::MAX, u: 0.0, v: 0.0 };

    pub fn is_hit(&self) -> bool {
        self.id != u32::MAX
    }

    pub fn closer_than(&self, other: &FloatHit) -> bool {
        (self.t, self.id) < (other.t, other.id)
    }
}

/// Slab test returning the entry distance. The exit distance is enlarged by
/// the rounding error bound of the division so boundary hits are kept.
pub fn ray_box_float(ray: &FloatRay, lo: Vec3, hi: Vec3) -> Option<f32> {
    let mut t_min = 0.0f32;
    let mut t_max = ray.t_max;
    for a in 0..3 {
        let o = ray.origin[a];
        let d = ray.dir[a];
        if d == 0.0 {
            if o < lo[a] || o > hi[a] {
                return None;
            }
            continue;
        }
        let inv = 1.0 / d;
        let mut t1 = (lo[a] - o) * inv;
        let mut t2 = (hi[a] - o) * inv;
        if t1 > t2 {
            std::mem::swap(&mut t1, &mut t2);
        }
        t2 *= 1.0 + 2.0 * GAMMA3;
        t_min = t_min.max(t1);
        t_max = t_max.min(t2);
        if t_min > t_max {
            return None;
        }
    }
    Some(t_min)
}

/// Same edge-function test as the fixed-point kernel, in `f32`.
pub fn ray_tri_float(ray: &FloatRay, tri: &Triangle, id: u32, side: Sidedness) -> Option<FloatHit> {
    let [a, b, c] = *tri;
    let (o, d) = (ray.origin, ray.dir);
    let ab = b - a;
    let ac = c - a;
    let bc = c - b;
    let a0 = o - a;
    let dota = ab.cross(a0).dot(d);
    let dotb = bc.cross(o - b).dot(d);
    let dotc = (o - c).cross(ac).dot(d);
    let accepted = match side {
        Sidedness::SingleSided => dota <= 0.0 && dotb <= 0.0 && dotc <= 0.0,
        Sidedness::TwoSided => {
            (dota <= 0.0 && dotb <= 0.0 && dotc <= 0.0) || (dota >= 0.0 && dotb >= 0.0 && dotc >= 0.0)
        }
    };
    if !accepted {
        return None;
    }
    let n = ab.cross(ac);
    let dotn = d.dot(n);
    if dotn == 0.0 {
        return None;
    }
    let dist = -a0.dot(n) / dotn;
    if !(dist >= 0.0 && dist <= ray.t_max) {
        return None;
    }
    let sum = dota + dotb + dotc;
    if sum == 0.0 {
        return None;
    }
    Some(FloatHit { t: dist, id, u: dotc / sum, v: dota / sum })
}
