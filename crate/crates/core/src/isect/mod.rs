//! Ray-box and ray-triangle tests on quantized data, floating point
//! reference kernels, and the bit-width calculator for the fixed-point path.
//!
//! Fixed-point tests work in a common space measured in leaf-grid cells: a
//! point with world coordinate `x` on an axis with leaf exponent `e` sits at
//! `x / 2^e`. Box and triangle coordinates are integers there; the ray origin
//! carries `Q_org` fractional bits. Ray parameters `t` use the format
//! `(T_R.T_Q)` and measure distance in units of `2^e_max` along the decoded
//! direction.

mod fixed;
mod float;

pub use fixed::{ray_box_fixed, ray_box_fixed_entry, ray_tri_fixed, BitTracker, FxHit, FxRay, FxTriangle};
pub use float::{ray_box_float, ray_tri_float, FloatHit, FloatRay};

use thiserror::Error;

use crate::fxp::FxpError;

/// Fractional bits of ray parameters.
pub const T_Q: u32 = 8;
/// Integer bits of ray parameters; `T_R + T_Q + 1 = 32`.
pub const T_R: u32 = 23;
/// Raw value of the largest representable ray parameter.
pub const MAX_T_RAW: i64 = (1 << (T_R + T_Q)) - 1;

/// Fractional bits kept for stored barycentrics.
pub const BARY_Q: u32 = 24;

// Format caps under which every intermediate of both kernels fits in the
// 126-bit budget of `FixedP`.
pub const MAX_R_ORG: u32 = 24;
pub const MAX_Q_ORG: u32 = 16;
pub const MAX_Q_DIR: u32 = 16;
pub const MAX_R_DIR: u32 = 12;
pub const MAX_R_TRI: u32 = 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IsectError {
    #[error("ray direction quantizes to zero")]
    ZeroDirection,
    #[error("negative ray extent")]
    NegativeTMax,
    #[error("format ({r}.{q}) of {what} exceeds the supported range")]
    Format { what: &'static str, r: u32, q: u32 },
    #[error(transparent)]
    Fxp(#[from] FxpError),
}

/// Which triangle faces report hits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sidedness {
    /// Accept if all three edge tests agree in sign.
    #[default]
    TwoSided,
    /// Reject whenever any edge test is positive.
    SingleSided,
}

/// Bit counts `(R_k.Q_k)` of the intermediates of the triangle test: edge
/// vectors, vertex-to-origin vectors, edge-plane normals and the decision
/// dot products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrecisionReq {
    pub r1: u32,
    pub q1: u32,
    pub r2: u32,
    pub q2: u32,
    pub r3: u32,
    pub q3: u32,
    pub r4: u32,
    pub q4: u32,
}

impl PrecisionReq {
    /// Total magnitude bits `R_k + Q_k` of stage `k` (1-based).
    pub fn bits(&self, stage: usize) -> u32 {
        match stage {
            1 => self.r1 + self.q1,
            2 => self.r2 + self.q2,
            3 => self.r3 + self.q3,
            4 => self.r4 + self.q4,
            _ => panic!("stage {stage} out of 1..=4"),
        }
    }
}

pub fn precision_requirements(r_org: u32, q_org: u32, r_dir: u32, q_dir: u32, r_tri: u32, q_tri: u32) -> PrecisionReq {
    let r1 = r_tri + 1;
    let q1 = q_tri;
    let r2 = r_tri.max(r_org) + 1;
    let q2 = q_tri.max(q_org);
    let r3 = r2 + (r_tri + 1) + 1;
    let q3 = q2 + q_tri;
    let r4 = r3 + r_dir + 2;
    let q4 = q3 + q_dir;
    PrecisionReq { r1, q1, r2, q2, r3, q3, r4, q4 }
}
