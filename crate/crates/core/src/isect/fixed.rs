use crate::fxp::{cross3, dot3, FixedP, FxVec3, FxpError, Rounding};
use crate::quantize::QTriangle;

use super::{
    IsectError, PrecisionReq, Sidedness, BARY_Q, MAX_Q_DIR, MAX_Q_ORG, MAX_R_DIR, MAX_R_ORG, MAX_R_TRI, MAX_T_RAW, T_Q,
};

/// Integer bits used for box coordinates in common space.
const BOX_R: u32 = 63;

/// Ray in common space. Construction checks the formats, so the kernels
/// below cannot overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FxRay {
    origin: FxVec3,
    dir: FxVec3,
    t_max: i64,
}

fn uniform_format(v: &FxVec3) -> Option<(u32, u32)> {
    let [x, y, z] = v.components();
    ((x.r(), x.q()) == (y.r(), y.q()) && (x.r(), x.q()) == (z.r(), z.q())).then_some((x.r(), x.q()))
}

impl FxRay {
    /// `t_max` is a raw value in the ray parameter format.
    pub fn new(origin: FxVec3, dir: FxVec3, t_max: i64) -> Result<Self, IsectError> {
        let (ro, qo) = uniform_format(&origin).ok_or(IsectError::Format { what: "origin", r: 0, q: 0 })?;
        if ro > MAX_R_ORG || qo > MAX_Q_ORG {
            return Err(IsectError::Format { what: "origin", r: ro, q: qo });
        }
        let (rd, qd) = uniform_format(&dir).ok_or(IsectError::Format { what: "direction", r: 0, q: 0 })?;
        if rd > MAX_R_DIR || qd > MAX_Q_DIR {
            return Err(IsectError::Format { what: "direction", r: rd, q: qd });
        }
        if dir.components().iter().all(FixedP::is_zero) {
            return Err(IsectError::ZeroDirection);
        }
        if t_max < 0 {
            return Err(IsectError::NegativeTMax);
        }
        Ok(Self { origin, dir, t_max: t_max.min(MAX_T_RAW) })
    }

    pub fn origin(&self) -> &FxVec3 {
        &self.origin
    }

    pub fn dir(&self) -> &FxVec3 {
        &self.dir
    }

    pub fn t_max(&self) -> i64 {
        self.t_max
    }

    pub fn set_t_max(&mut self, t: i64) {
        self.t_max = t.clamp(0, MAX_T_RAW);
    }
}

/// Triangle with integer vertices in common space, format `(R_tri.0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FxTriangle {
    pub v: [FxVec3; 3],
}

impl FxTriangle {
    pub fn from_points(p: [[i64; 3]; 3], r_tri: u32) -> Result<Self, IsectError> {
        if r_tri > MAX_R_TRI {
            return Err(IsectError::Format { what: "triangle", r: r_tri, q: 0 });
        }
        Ok(Self {
            v: [FxVec3::from_ints(p[0], r_tri)?, FxVec3::from_ints(p[1], r_tri)?, FxVec3::from_ints(p[2], r_tri)?],
        })
    }

    /// Offsets the 8-bit vertices by the leaf origin (in leaf cells).
    pub fn from_quantized(tri: &QTriangle, leaf_origin: [i64; 3], r_tri: u32) -> Result<Self, IsectError> {
        let p = tri.v.map(|v| [0, 1, 2].map(|a| leaf_origin[a] + i64::from(v[a])));
        Self::from_points(p, r_tri)
    }
}

/// Intersection record: distance as a raw ray parameter, triangle id and
/// barycentrics with [`BARY_Q`] fractional bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FxHit {
    pub t: i32,
    pub id: u32,
    /// Weight of the second vertex.
    pub u: u32,
    /// Weight of the third vertex.
    pub v: u32,
}

impl FxHit {
    pub const NONE: FxHit = FxHit { t: MAX_T_RAW as i32, id: u32::MAX, u: 0, v: 0 };

    pub fn is_hit(&self) -> bool {
        self.id != u32::MAX
    }

    /// Orders hits by distance, then by triangle id.
    pub fn closer_than(&self, other: &FxHit) -> bool {
        (self.t, self.id) < (other.t, other.id)
    }
}

/// Largest number of magnitude bits seen per stage of the triangle test, and
/// the widest `R + Q` format produced in that stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BitTracker {
    pub used: [u32; 4],
    pub format: [u32; 4],
}

impl BitTracker {
    fn record(&mut self, stage: usize, v: &FixedP) {
        self.used[stage] = self.used[stage].max(v.bits_used());
        self.format[stage] = self.format[stage].max(v.r() + v.q());
    }

    fn record_vec(&mut self, stage: usize, v: &FxVec3) {
        for c in v.components() {
            self.record(stage, &c);
        }
    }

    pub fn merge(&mut self, o: &BitTracker) {
        for k in 0..4 {
            self.used[k] = self.used[k].max(o.used[k]);
            self.format[k] = self.format[k].max(o.format[k]);
        }
    }

    /// True if no stage used more bits than `req` allows.
    pub fn within(&self, req: &PrecisionReq) -> bool {
        (0..4).all(|k| self.used[k] <= req.bits(k + 1) && self.format[k] <= req.bits(k + 1))
    }
}

/// Slab test. Returns the raw entry parameter (at least 0) when the box is
/// hit within `[0, ray.t_max]`. Box bounds are inclusive integers in common
/// space. Entry distances round down and exit distances round up, so the
/// interval always contains the exact one.
pub fn ray_box_fixed_entry(ray: &FxRay, lo: [i64; 3], hi: [i64; 3]) -> Option<i64> {
    let mut t_min: i128 = 0;
    let mut t_max: i128 = ray.t_max.into();
    for a in 0..3 {
        let o = ray.origin.component(a);
        let d = ray.dir.component(a);
        if d.is_zero() {
            let lo_s = i128::from(lo[a]) << o.q();
            let hi_s = i128::from(hi[a]) << o.q();
            if o.val() < lo_s || o.val() > hi_s {
                return None;
            }
            continue;
        }
        let (near, far) = if d.signum() > 0 { (lo[a], hi[a]) } else { (hi[a], lo[a]) };
        let slab = |p: i64, mode| -> Result<i128, FxpError> {
            Ok(FixedP::from_int(p, BOX_R)?.sub(o)?.div_to(d, T_Q, mode)?.val())
        };
        let t1 = slab(near, Rounding::Floor).expect("formats validated by FxRay");
        let t2 = slab(far, Rounding::Ceil).expect("formats validated by FxRay");
        t_min = t_min.max(t1);
        t_max = t_max.min(t2);
        if t_min > t_max {
            return None;
        }
    }
    Some(t_min as i64)
}

pub fn ray_box_fixed(ray: &FxRay, lo: [i64; 3], hi: [i64; 3]) -> bool {
    ray_box_fixed_entry(ray, lo, hi).is_some()
}

/// Edge-function triangle test with exact intermediates up to the decision.
/// Reports a hit with `0 <= t <= ray.t_max`; the distance is rounded down.
pub fn ray_tri_fixed(
    ray: &FxRay,
    tri: &FxTriangle,
    id: u32,
    side: Sidedness,
    tracker: Option<&mut BitTracker>,
) -> Option<FxHit> {
    tri_inner(ray, tri, id, side, tracker).expect("formats validated by FxRay and FxTriangle")
}

fn tri_inner(
    ray: &FxRay,
    tri: &FxTriangle,
    id: u32,
    side: Sidedness,
    tracker: Option<&mut BitTracker>,
) -> Result<Option<FxHit>, FxpError> {
    let [a, b, c] = &tri.v;
    let o = &ray.origin;
    let d = &ray.dir;

    let ab = b.sub(a)?;
    let ac = c.sub(a)?;
    let bc = c.sub(b)?;
    let a0 = o.sub(a)?;
    let b0 = o.sub(b)?;
    let c0 = o.sub(c)?;

    let an = cross3(&ab, &a0)?;
    let bn = cross3(&bc, &b0)?;
    let cn = cross3(&c0, &ac)?;
    let dota = dot3(&an, d)?;
    let dotb = dot3(&bn, d)?;
    let dotc = dot3(&cn, d)?;

    if let Some(t) = tracker {
        for e in [&ab, &ac, &bc] {
            t.record_vec(0, e);
        }
        for e in [&a0, &b0, &c0] {
            t.record_vec(1, e);
        }
        for e in [&an, &bn, &cn] {
            t.record_vec(2, e);
        }
        for e in [&dota, &dotb, &dotc] {
            t.record(3, e);
        }
    }

    let signs = [dota.signum(), dotb.signum(), dotc.signum()];
    let accepted = match side {
        Sidedness::SingleSided => signs.iter().all(|&s| s <= 0),
        Sidedness::TwoSided => signs.iter().all(|&s| s <= 0) || signs.iter().all(|&s| s >= 0),
    };
    if !accepted {
        return Ok(None);
    }

    let n = cross3(&ab, &ac)?;
    let dotn = dot3(d, &n)?;
    if dotn.is_zero() {
        return Ok(None);
    }
    let dist = dot3(&a0, &n)?.neg()?.div_to(&dotn, T_Q, Rounding::Floor)?.val();
    if dist < 0 || dist > i128::from(ray.t_max) {
        return Ok(None);
    }

    // The three edge values share one format and sum to a multiple of dotn.
    let sum = dota.val() + dotb.val() + dotc.val();
    let bary = |x: i128| ((x << BARY_Q) / sum) as u32;
    Ok(Some(FxHit { t: dist as i32, id, u: bary(dotc.val()), v: bary(dota.val()) }))
}
