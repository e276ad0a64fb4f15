//! BVH construction, collapse to wide nodes, byte-exact node records and the
//! compression pipeline.

mod build;
mod compress;
mod node;
mod validate;
mod wide;

use glam::{DVec3, Vec3};

pub use build::{build_binary_sah, BinaryBvh, BuildConfig, BuildKind, BuildNode};
pub use compress::{compress, CompressConfig, CompressedBvh, CompressionStats, UncompressedBvh, MAX_LEAF_ANISOTROPY};
pub use node::{
    inline_capacity, node_byte_size, NodePayload, NodeType, WideNodeC, WideNodeU, FLOAT_TRIANGLE_BYTES, MAX_WIDTH,
};
pub use validate::{validate_against, validate_hierarchy, ValidationReport, Violation};
pub use wide::{collapse_to_width, WideBvh, WideKind, WideNode};

use crate::quantize::QuantizeError;

/// Triangle as three vertex positions.
pub type Triangle = [Vec3; 3];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error("mesh has no triangles")]
    EmptyMesh,
    #[error("triangle {0} has a non-finite vertex")]
    NonFinite(usize),
    #[error("unsupported BVH width {0}; expected 2, 4 or 8")]
    InvalidWidth(usize),
    #[error(transparent)]
    Quantize(#[from] QuantizeError),
    #[error("scale propagation did not converge after {0} passes")]
    NoConvergence(usize),
}

pub type Result<T> = std::result::Result<T, BuildError>;

pub(crate) fn check_width(width: usize) -> Result<()> {
    match width {
        2 | 4 | 8 => Ok(()),
        w => Err(BuildError::InvalidWidth(w)),
    }
}

/// Axis-aligned box in single precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub lo: Vec3,
    pub hi: Vec3,
}

impl Default for Aabb {
    fn default() -> Self {
        Self::EMPTY
    }
}

impl Aabb {
    pub const EMPTY: Aabb = Aabb { lo: Vec3::splat(f32::INFINITY), hi: Vec3::splat(f32::NEG_INFINITY) };

    pub fn new(lo: Vec3, hi: Vec3) -> Self {
        Self { lo, hi }
    }

    pub fn from_triangle(t: &Triangle) -> Self {
        Self { lo: t[0].min(t[1]).min(t[2]), hi: t[0].max(t[1]).max(t[2]) }
    }

    pub fn is_empty(&self) -> bool {
        self.lo.cmpgt(self.hi).any()
    }

    pub fn grow(&mut self, p: Vec3) {
        self.lo = self.lo.min(p);
        self.hi = self.hi.max(p);
    }

    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb { lo: self.lo.min(o.lo), hi: self.hi.max(o.hi) }
    }

    pub fn surface_area(&self) -> f32 {
        if self.is_empty() {
            return 0.0;
        }
        let d = self.hi - self.lo;
        2.0 * (d.x * d.y + d.y * d.z + d.z * d.x)
    }

    pub fn center(&self) -> Vec3 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains_point(&self, p: Vec3) -> bool {
        p.cmpge(self.lo).all() && p.cmple(self.hi).all()
    }

    pub fn contains(&self, o: &Aabb) -> bool {
        o.lo.cmpge(self.lo).all() && o.hi.cmple(self.hi).all()
    }

    pub fn lo_f64(&self) -> DVec3 {
        self.lo.as_dvec3()
    }

    pub fn hi_f64(&self) -> DVec3 {
        self.hi.as_dvec3()
    }
}
