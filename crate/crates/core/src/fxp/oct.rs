use glam::DVec3;

use super::{FixedP, FxVec3, FxpError, Result, Rounding};

const SNORM_MAX: f64 = 32767.0;

/// Upper bound on the angle in radians between a unit direction and its
/// encode/decode round trip. Dense sampling peaks near 6.47e-5.
pub const OCT_MAX_ANGLE_ERROR: f64 = 7.0e-5;

/// Unit direction packed into two signed 16-bit octahedral coordinates.
///
/// The upper half-word holds `u`, the lower half-word `v`, both as
/// signed-normalized integers in `[-32767, 32767]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OctDir32(pub u32);

// signum that keeps the sign of -0.0, so folded codes on the x=0 / y=0 seams
// re-encode to themselves
fn sign(x: f64) -> f64 {
    if x.is_sign_negative() {
        -1.0
    } else {
        1.0
    }
}

fn snorm16(x: f64) -> i16 {
    (x.clamp(-1.0, 1.0) * SNORM_MAX).round() as i16
}

impl OctDir32 {
    /// Encodes a nonzero direction; the input does not need to be normalized.
    pub fn encode(d: DVec3) -> Result<Self> {
        let l1 = d.x.abs() + d.y.abs() + d.z.abs();
        if !(l1.is_finite() && l1 > 0.0) {
            return Err(FxpError::InvalidDirection);
        }
        let p = d / l1;
        let (u, v) =
            if p.z < 0.0 { ((1.0 - p.y.abs()) * sign(p.x), (1.0 - p.x.abs()) * sign(p.y)) } else { (p.x, p.y) };
        let packed = ((snorm16(u) as u16 as u32) << 16) | (snorm16(v) as u16 as u32);
        Ok(Self(packed))
    }

    pub fn packed(self) -> u32 {
        self.0
    }

    fn coords(self) -> (f64, f64) {
        let u = (self.0 >> 16) as u16 as i16;
        let v = self.0 as u16 as i16;
        (f64::from(u.max(-32767)) / SNORM_MAX, f64::from(v.max(-32767)) / SNORM_MAX)
    }

    /// Point on the unit octahedron (L1 norm one) this code refers to.
    pub fn octahedron_point(self) -> DVec3 {
        let (u, v) = self.coords();
        let z = 1.0 - u.abs() - v.abs();
        if z < 0.0 {
            DVec3::new((1.0 - v.abs()) * sign(u), (1.0 - u.abs()) * sign(v), z)
        } else {
            DVec3::new(u, v, z)
        }
    }

    /// Decodes to a unit-length float direction.
    pub fn decode_f64(self) -> DVec3 {
        self.octahedron_point().normalize()
    }

    /// Decodes to fixed point with `q_dir` fractional bits per component in
    /// format `(1.q_dir)`, rounding to nearest.
    pub fn decode(self, q_dir: u32) -> Result<FxVec3> {
        let d = self.decode_f64();
        Ok(FxVec3::new(
            FixedP::from_f64(d.x, 1, q_dir, Rounding::Nearest)?,
            FixedP::from_f64(d.y, 1, q_dir, Rounding::Nearest)?,
            FixedP::from_f64(d.z, 1, q_dir, Rounding::Nearest)?,
        ))
    }
}
