use arrayvec::ArrayVec;
use glam::Vec3;

use crate::bvh::{CompressedBvh, NodePayload, UncompressedBvh, MAX_WIDTH};
use crate::isect::{
    ray_box_fixed_entry, ray_box_float, ray_tri_fixed, ray_tri_float, FloatHit, FloatRay, FxHit, FxRay, FxTriangle,
    Sidedness,
};
use crate::quantize::QTriangle;

use super::{Result, FLOAT_RAY_BYTES, RAY_RECORD_BYTES};

/// Relative slack on float box entry/exit distances, wider than the error
/// of the triangle distance so boxes never prune a triangle they contain.
const FLOAT_BOX_SLACK: f32 = 1.0 / 4096.0;

/// A hit child: entry key (monotone in the entry distance), slot and node.
pub type ChildHit = (u64, u8, u32);

/// Tree interface shared by both engines.
pub trait Accel: Sync {
    type Ray: Copy + Send + Sync;
    type Hit: Copy + PartialEq + std::fmt::Debug + Send + Sync;

    fn width(&self) -> usize;
    fn node_bytes(&self) -> u64;
    fn triangle_bytes(&self) -> u64;
    fn ray_bytes(&self) -> u64;
    fn no_hit(&self) -> Self::Hit;
    /// `(first, count, inline)` for leaves, `None` for inner nodes.
    fn leaf(&self, node: u32) -> Option<(u32, u32, bool)>;
    /// Slab-tests every occupied child slot; returns the number of tests.
    fn intersect_children(&self, node: u32, ray: &Self::Ray, out: &mut ArrayVec<ChildHit, MAX_WIDTH>) -> u32;
    /// Tests pool triangle `pool`; on a closer hit updates `hit` and the
    /// ray's extent and returns true.
    fn intersect_triangle(&self, pool: u32, ray: &mut Self::Ray, hit: &mut Self::Hit) -> bool;
}

fn leaf_of(p: &NodePayload) -> Option<(u32, u32, bool)> {
    match *p {
        NodePayload::Inner { .. } => None,
        NodePayload::Leaf { first, count } => Some((first, count, false)),
        NodePayload::LeafInline { first, count, .. } => Some((first, u32::from(count), true)),
    }
}

/// Compressed tree with exact fixed-point kernels.
#[derive(Debug, Clone)]
pub struct CompressedAccel {
    pub bvh: CompressedBvh,
    pub side: Sidedness,
    tris: Vec<FxTriangle>,
}

impl CompressedAccel {
    pub fn new(bvh: CompressedBvh, side: Sidedness) -> Result<Self> {
        let leaves = bvh.leaf_of_triangles();
        let tris = bvh
            .triangles
            .iter()
            .zip(&leaves)
            .map(|(t, &l)| {
                let o = bvh.nodes[l as usize].frame.origin.map(i64::from);
                FxTriangle::from_quantized(t, o, bvh.coord_bits)
            })
            .collect::<std::result::Result<_, _>>()?;
        Ok(Self { bvh, side, tris })
    }

    /// Triangle `pool` in leaf-grid coordinates.
    pub fn fx_triangle(&self, pool: u32) -> &FxTriangle {
        &self.tris[pool as usize]
    }
}

impl Accel for CompressedAccel {
    type Ray = FxRay;
    type Hit = FxHit;

    fn width(&self) -> usize {
        self.bvh.width
    }

    fn node_bytes(&self) -> u64 {
        self.bvh.node_bytes() as u64
    }

    fn triangle_bytes(&self) -> u64 {
        QTriangle::BYTES as u64
    }

    fn ray_bytes(&self) -> u64 {
        RAY_RECORD_BYTES as u64
    }

    fn no_hit(&self) -> FxHit {
        FxHit::NONE
    }

    fn leaf(&self, node: u32) -> Option<(u32, u32, bool)> {
        leaf_of(&self.bvh.nodes[node as usize].payload)
    }

    fn intersect_children(&self, node: u32, ray: &FxRay, out: &mut ArrayVec<ChildHit, MAX_WIDTH>) -> u32 {
        let n = &self.bvh.nodes[node as usize];
        let NodePayload::Inner { children } = n.payload else { return 0 };
        let mut tests = 0;
        for (slot, &c) in children.iter().enumerate().take(self.bvh.width) {
            if c < 0 {
                continue;
            }
            tests += 1;
            let (lo, hi) = self.bvh.common_box(n, slot);
            if let Some(t) = ray_box_fixed_entry(ray, lo, hi) {
                out.push((t as u64, slot as u8, c as u32));
            }
        }
        tests
    }

    fn intersect_triangle(&self, pool: u32, ray: &mut FxRay, hit: &mut FxHit) -> bool {
        let id = self.bvh.tri_ids[pool as usize];
        match ray_tri_fixed(ray, &self.tris[pool as usize], id, self.side, None) {
            Some(h) if h.closer_than(hit) => {
                *hit = h;
                ray.set_t_max(h.t.into());
                true
            }
            _ => false,
        }
    }
}

/// Float tree with `f32` reference kernels.
#[derive(Debug, Clone)]
pub struct UncompressedAccel {
    pub bvh: UncompressedBvh,
    pub side: Sidedness,
}

impl UncompressedAccel {
    pub fn new(bvh: UncompressedBvh, side: Sidedness) -> Self {
        Self { bvh, side }
    }
}

impl Accel for UncompressedAccel {
    type Ray = FloatRay;
    type Hit = FloatHit;

    fn width(&self) -> usize {
        self.bvh.width
    }

    fn node_bytes(&self) -> u64 {
        self.bvh.node_bytes() as u64
    }

    fn triangle_bytes(&self) -> u64 {
        crate::bvh::FLOAT_TRIANGLE_BYTES as u64
    }

    fn ray_bytes(&self) -> u64 {
        FLOAT_RAY_BYTES as u64
    }

    fn no_hit(&self) -> FloatHit {
        FloatHit::NONE
    }

    fn leaf(&self, node: u32) -> Option<(u32, u32, bool)> {
        leaf_of(&self.bvh.nodes[node as usize].payload)
    }

    fn intersect_children(&self, node: u32, ray: &FloatRay, out: &mut ArrayVec<ChildHit, MAX_WIDTH>) -> u32 {
        let n = &self.bvh.nodes[node as usize];
        let NodePayload::Inner { children } = n.payload else { return 0 };
        let mut tests = 0;
        for (slot, &c) in children.iter().enumerate().take(self.bvh.width) {
            if c < 0 {
                continue;
            }
            tests += 1;
            let lo = Vec3::new(n.lo[0][slot], n.lo[1][slot], n.lo[2][slot]);
            let hi = Vec3::new(n.hi[0][slot], n.hi[1][slot], n.hi[2][slot]);
            let mut wide = *ray;
            wide.t_max *= 1.0 + FLOAT_BOX_SLACK;
            if let Some(t) = ray_box_float(&wide, lo, hi) {
                let t = t * (1.0 - FLOAT_BOX_SLACK);
                // non-negative floats order like their bit patterns
                out.push((u64::from(t.to_bits()), slot as u8, c as u32));
            }
        }
        tests
    }

    fn intersect_triangle(&self, pool: u32, ray: &mut FloatRay, hit: &mut FloatHit) -> bool {
        let id = self.bvh.tri_ids[pool as usize];
        match ray_tri_float(ray, &self.bvh.triangles[pool as usize], id, self.side) {
            Some(h) if h.closer_than(hit) => {
                *hit = h;
                ray.t_max = h.t;
                true
            }
            _ => false,
        }
    }
}
