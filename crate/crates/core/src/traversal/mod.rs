//! Single-ray (SR) and ray-stream (RS) traversal over compressed and
//! uncompressed wide BVHs, charging every access to a [`TrafficStats`].
//!
//! [`TrafficStats`]: crate::metrics::TrafficStats

mod accel;
mod single;
mod stream;

pub use accel::{Accel, ChildHit, CompressedAccel, UncompressedAccel};
pub use single::traverse_single;
pub use stream::{traverse_stream, StreamStackEntry};

use std::fmt;
use std::str::FromStr;

use glam::DVec3;
use rayon::prelude::*;
use thiserror::Error;

use crate::fxp::{FixedP, FxVec3, FxpError, OctDir32, Rounding};
use crate::isect::{FxHit, FxRay, IsectError, MAX_Q_DIR, MAX_Q_ORG, MAX_R_DIR, MAX_R_ORG, MAX_T_RAW, T_Q};
use crate::metrics::TrafficStats;

/// Serialized size of a [`RayRecord`].
pub const RAY_RECORD_BYTES: usize = 32;
/// Float ray: 16-byte hit record, 12-byte origin, 12-byte direction.
pub const FLOAT_RAY_BYTES: usize = 40;
/// Intersection record part of a ray.
pub const HIT_RECORD_BYTES: u64 = 16;
pub const SR_ENTRY_BYTES: u64 = 4;
pub const RS_ENTRY_BYTES: u64 = 12;
pub const RAY_INDEX_BYTES: u64 = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraversalError {
    #[error("ray origin component {value} is outside the ({r}.{q}) origin format")]
    OriginOutOfRange { value: f64, r: u32, q: u32 },
    #[error("non-finite ray")]
    NonFinite,
    #[error("leaf exponents {0:?} differ by more than the direction format allows")]
    Anisotropic([i32; 3]),
    #[error(transparent)]
    Isect(#[from] IsectError),
    #[error(transparent)]
    Fxp(#[from] FxpError),
}

pub type Result<T> = std::result::Result<T, TraversalError>;

/// Traversal engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Per-ray stacks.
    Single,
    /// One shared stack for the whole batch.
    Stream,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Single => "SR",
            Mode::Stream => "RS",
        })
    }
}

impl FromStr for Mode {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s {
            "SR" => Ok(Mode::Single),
            "RS" => Ok(Mode::Stream),
            _ => Err(()),
        }
    }
}

/// Rays per parallel job in single-ray mode.
const SR_CHUNK: usize = 2048;

/// Traces a batch with either engine. Single-ray batches run in parallel
/// chunks with private counters that are summed afterwards, so the result
/// and the counters do not depend on scheduling.
pub fn trace_batch<A: Accel>(accel: &A, rays: &[A::Ray], mode: Mode, stats: &mut TrafficStats) -> Vec<A::Hit> {
    match mode {
        Mode::Stream => traverse_stream(accel, rays, stats),
        Mode::Single => {
            let parts: Vec<(Vec<A::Hit>, TrafficStats)> = rays
                .par_chunks(SR_CHUNK)
                .map(|chunk| {
                    let mut s = TrafficStats::default();
                    let hits = chunk.iter().map(|r| traverse_single(accel, r, &mut s)).collect();
                    (hits, s)
                })
                .collect();
            let mut out = Vec::with_capacity(rays.len());
            for (hits, s) in parts {
                out.extend(hits);
                stats.merge(&s);
            }
            out
        }
    }
}

/// Compressed ray: intersection record, fixed-point origin in leaf-grid
/// units and an octahedral direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RayRecord {
    /// Raw ray parameter of the closest hit so far.
    pub t: i32,
    pub id: u32,
    pub u: u32,
    pub v: u32,
    pub origin: [i32; 3],
    pub dir: OctDir32,
}

impl RayRecord {
    pub fn hit(&self) -> FxHit {
        FxHit { t: self.t, id: self.id, u: self.u, v: self.v }
    }

    pub fn set_hit(&mut self, h: &FxHit) {
        (self.t, self.id, self.u, self.v) = (h.t, h.id, h.u, h.v);
    }

    pub fn to_bytes(&self) -> [u8; RAY_RECORD_BYTES] {
        let mut b = [0u8; RAY_RECORD_BYTES];
        let words = [
            self.t as u32,
            self.id,
            self.u,
            self.v,
            self.origin[0] as u32,
            self.origin[1] as u32,
            self.origin[2] as u32,
            self.dir.packed(),
        ];
        for (chunk, w) in b.chunks_exact_mut(4).zip(words) {
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        b
    }

    pub fn from_bytes(b: &[u8; RAY_RECORD_BYTES]) -> Self {
        let w = |i: usize| u32::from_le_bytes(b[4 * i..4 * i + 4].try_into().unwrap());
        Self {
            t: w(0) as i32,
            id: w(1),
            u: w(2),
            v: w(3),
            origin: [w(4) as i32, w(5) as i32, w(6) as i32],
            dir: OctDir32(w(7)),
        }
    }
}

/// Fixed-point ray precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RayFormat {
    pub r_org: u32,
    pub q_org: u32,
    pub q_dir: u32,
}

impl Default for RayFormat {
    fn default() -> Self {
        Self { r_org: 16, q_org: 8, q_dir: 10 }
    }
}

/// Converts float rays into [`RayRecord`]s and [`FxRay`]s for a tree with
/// the given leaf exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RayQuantizer {
    leaf_exp: [i32; 3],
    fmt: RayFormat,
    dir_shift: [u32; 3],
    r_dir: u32,
}

impl RayQuantizer {
    pub fn new(leaf_exp: [i32; 3], fmt: RayFormat) -> Result<Self> {
        if fmt.r_org > MAX_R_ORG || fmt.q_org > MAX_Q_ORG || fmt.r_org + fmt.q_org > 31 {
            return Err(IsectError::Format { what: "origin", r: fmt.r_org, q: fmt.q_org }.into());
        }
        if fmt.q_dir > MAX_Q_DIR {
            return Err(IsectError::Format { what: "direction", r: 1, q: fmt.q_dir }.into());
        }
        let e_max = *leaf_exp.iter().max().expect("three axes");
        let dir_shift = leaf_exp.map(|e| (e_max - e) as u32);
        let r_dir = 1 + dir_shift.iter().max().expect("three axes");
        if r_dir > MAX_R_DIR {
            return Err(TraversalError::Anisotropic(leaf_exp));
        }
        Ok(Self { leaf_exp, fmt, dir_shift, r_dir })
    }

    pub fn format(&self) -> RayFormat {
        self.fmt
    }

    /// Integer bits of the direction after per-axis scaling.
    pub fn r_dir(&self) -> u32 {
        self.r_dir
    }

    pub fn leaf_exp(&self) -> [i32; 3] {
        self.leaf_exp
    }

    /// Quantizes a float ray: origin rounded to nearest in leaf-grid units
    /// with `q_org` fractional bits, direction oct-encoded, no hit yet.
    pub fn ray_to_fixed(&self, origin: DVec3, dir: DVec3) -> Result<RayRecord> {
        if !origin.is_finite() || !dir.is_finite() {
            return Err(TraversalError::NonFinite);
        }
        let mut o = [0i32; 3];
        for a in 0..3 {
            let grid = origin[a] * f64::from(-self.leaf_exp[a]).exp2();
            let fx = FixedP::from_f64(grid, self.fmt.r_org, self.fmt.q_org, Rounding::Nearest).map_err(|_| {
                TraversalError::OriginOutOfRange { value: origin[a], r: self.fmt.r_org, q: self.fmt.q_org }
            })?;
            o[a] = fx.val() as i32;
        }
        let dir = OctDir32::encode(dir)?;
        let none = FxHit::NONE;
        Ok(RayRecord { t: none.t, id: none.id, u: none.u, v: none.v, origin: o, dir })
    }

    /// Direction decoded to `(1.q_dir)` before per-axis scaling.
    pub fn decoded_dir(&self, dir: OctDir32) -> FxVec3 {
        dir.decode(self.fmt.q_dir).expect("q_dir validated")
    }

    pub fn fx_ray(&self, rec: &RayRecord) -> FxRay {
        let origin = FxVec3::from_raw(rec.origin.map(i128::from), self.fmt.r_org, self.fmt.q_org)
            .expect("i32 raw fits the validated origin format");
        let d = self.decoded_dir(rec.dir).components();
        let scaled = std::array::from_fn(|a| d[a].val() << self.dir_shift[a]);
        let dir = FxVec3::from_raw(scaled, self.r_dir, self.fmt.q_dir).expect("shift bounded by r_dir");
        FxRay::new(origin, dir, i64::from(rec.t).clamp(0, MAX_T_RAW)).expect("formats validated")
    }

    pub fn origin_world(&self, rec: &RayRecord) -> DVec3 {
        let q = f64::from(self.fmt.q_org);
        DVec3::from_array(std::array::from_fn(|a| f64::from(rec.origin[a]) * (f64::from(self.leaf_exp[a]) - q).exp2()))
    }

    /// World-space point at raw ray parameter `t` along the quantized ray.
    pub fn point_at(&self, rec: &RayRecord, t: i32) -> DVec3 {
        let e_max = *self.leaf_exp.iter().max().expect("three axes");
        let d = DVec3::from_array(self.decoded_dir(rec.dir).to_f64());
        let s = f64::from(t) * (f64::from(e_max) - f64::from(T_Q)).exp2();
        self.origin_world(rec) + d * s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quantizer() -> RayQuantizer {
        RayQuantizer::new([-4, -4, -4], RayFormat::default()).unwrap()
    }

    #[test]
    fn record_is_32_bytes() {
        let q = quantizer();
        let r = q.ray_to_fixed(DVec3::new(1.25, -2.0, 0.5), DVec3::new(0.3, -0.2, 0.9)).unwrap();
        let b = r.to_bytes();
        assert_eq!(b.len(), RAY_RECORD_BYTES);
        assert_eq!(RayRecord::from_bytes(&b), r);
        assert!(!r.hit().is_hit());
    }

    #[test]
    fn grid_origin_axis_direction_is_exact() {
        let q = quantizer();
        let r = q.ray_to_fixed(DVec3::new(2.0, 0.0625, -1.0), DVec3::NEG_Y).unwrap();
        assert_eq!(q.origin_world(&r), DVec3::new(2.0, 0.0625, -1.0));
        assert_eq!(r.origin, [32 << 8, 1 << 8, -16 << 8]);
        let f = q.fx_ray(&r);
        assert_eq!(f.dir().to_f64(), [0.0, -1.0, 0.0]);
    }

    #[test]
    fn tiny_component_becomes_zero() {
        let q = quantizer();
        let tiny = 0.4 * (-10f64).exp2();
        let r = q.ray_to_fixed(DVec3::ZERO, DVec3::new(tiny, 0.0, 1.0)).unwrap();
        assert!(q.fx_ray(&r).dir().x.is_zero());
    }

    #[test]
    fn origin_out_of_range() {
        let q = quantizer();
        // 2^16 cells of 1/16 = 4096 world units
        assert!(matches!(
            q.ray_to_fixed(DVec3::new(5000.0, 0.0, 0.0), DVec3::X),
            Err(TraversalError::OriginOutOfRange { .. })
        ));
    }

    #[test]
    fn anisotropic_scales_widen_direction() {
        let q = RayQuantizer::new([-4, -6, -4], RayFormat::default()).unwrap();
        assert_eq!(q.r_dir(), 3);
        let r = q.ray_to_fixed(DVec3::ZERO, DVec3::Y).unwrap();
        assert_eq!(q.fx_ray(&r).dir().y.to_f64(), 4.0);
        assert!(RayQuantizer::new([-4, -20, -4], RayFormat::default()).is_err());
    }
}
