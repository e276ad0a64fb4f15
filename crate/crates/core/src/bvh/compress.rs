use glam::DVec3;

use crate::fxp::magnitude_bits;
use crate::isect::MAX_R_DIR;
use crate::quantize::{
    broadcast_leaf_scales, compute_scale, derive_child_frame, propagate_scales_up, quantize_bounds, quantize_triangle,
    root_frame, QBox, QTriangle, QuantFrame, DEFAULT_MIN_EXPONENT,
};

use super::node::{
    inline_capacity, node_byte_size, NodePayload, WideNodeC, WideNodeU, FLOAT_TRIANGLE_BYTES, MAX_WIDTH,
};
use super::{BuildError, Result, Triangle, WideBvh, WideKind};

const MAX_PASSES: usize = 64;

/// Largest difference between leaf exponents of two axes, so that the
/// per-axis direction shift fits the direction format.
pub const MAX_LEAF_ANISOTROPY: i32 = MAX_R_DIR as i32 - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompressConfig {
    /// Finest scale exponent any frame may use.
    pub min_exponent: i32,
    /// Store leaves with few triangles inside the node union.
    pub inline_triangles: bool,
}

impl Default for CompressConfig {
    fn default() -> Self {
        Self { min_exponent: DEFAULT_MIN_EXPONENT, inline_triangles: false }
    }
}

/// Quantized wide BVH with its 9-byte triangle pool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedBvh {
    pub width: usize,
    /// Same order as the source [`WideBvh`]; node 0 is the root.
    pub nodes: Vec<WideNodeC>,
    pub triangles: Vec<QTriangle>,
    /// Original mesh index of each pool triangle.
    pub tri_ids: Vec<u32>,
    /// Exponents shared by every leaf frame.
    pub leaf_exp: [i32; 3],
    /// Magnitude bits of the largest coordinate in leaf-grid units.
    pub coord_bits: u32,
}

/// Float wide BVH with 36-byte triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct UncompressedBvh {
    pub width: usize,
    pub nodes: Vec<WideNodeU>,
    pub triangles: Vec<Triangle>,
    pub tri_ids: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompressionStats {
    pub nodes: usize,
    pub triangles: usize,
    pub leaf_exp: [i32; 3],
    /// Top-down/bottom-up passes until the scales were stable.
    pub passes: usize,
    pub node_bytes_compressed: usize,
    pub node_bytes_uncompressed: usize,
    pub triangle_bytes_compressed: usize,
    pub triangle_bytes_uncompressed: usize,
}

impl CompressedBvh {
    pub fn node_bytes(&self) -> usize {
        node_byte_size(self.width, true).expect("width validated")
    }

    pub fn node_pool_bytes(&self) -> usize {
        self.node_bytes() * self.nodes.len()
    }

    pub fn triangle_pool_bytes(&self) -> usize {
        QTriangle::BYTES * self.triangles.len()
    }

    /// Shift from a frame's cells to leaf-grid cells on each axis.
    pub fn shift_to_leaf(&self, frame: &QuantFrame) -> [u32; 3] {
        std::array::from_fn(|a| (i32::from(frame.exp[a]) - self.leaf_exp[a]) as u32)
    }

    /// Child box of `node` in leaf-grid units: `(lo, hi)`.
    pub fn common_box(&self, node: &WideNodeC, slot: usize) -> ([i64; 3], [i64; 3]) {
        let s = self.shift_to_leaf(&node.frame);
        let f = |a: usize, c: u8| (i64::from(node.frame.origin[a]) + i64::from(c)) << s[a];
        (std::array::from_fn(|a| f(a, node.lo[a][slot])), std::array::from_fn(|a| f(a, node.hi[a][slot])))
    }

    /// World position of a quantized vertex of a leaf.
    pub fn vertex_world(&self, leaf: &WideNodeC, v: [u8; 3]) -> DVec3 {
        DVec3::from_array(std::array::from_fn(|a| {
            (f64::from(leaf.frame.origin[a]) + f64::from(v[a])) * f64::from(leaf.frame.exp[a]).exp2()
        }))
    }

    /// Size of one leaf-grid cell in world units.
    pub fn leaf_cell(&self) -> DVec3 {
        DVec3::from_array(self.leaf_exp.map(|e| f64::from(e).exp2()))
    }

    /// Leaf node index and pool position of every triangle, in pool order.
    pub fn leaf_of_triangles(&self) -> Vec<u32> {
        let mut out = vec![u32::MAX; self.triangles.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some((first, count)) = leaf_range(&n.payload) {
                for slot in &mut out[first as usize..(first + count) as usize] {
                    *slot = i as u32;
                }
            }
        }
        out
    }
}

impl UncompressedBvh {
    pub fn node_bytes(&self) -> usize {
        node_byte_size(self.width, false).expect("width validated")
    }

    pub fn node_pool_bytes(&self) -> usize {
        self.node_bytes() * self.nodes.len()
    }

    pub fn triangle_pool_bytes(&self) -> usize {
        FLOAT_TRIANGLE_BYTES * self.triangles.len()
    }

    /// Float records for a wide tree; child boxes are copied verbatim.
    pub fn from_wide(wide: &WideBvh, tris: &[Triangle]) -> Self {
        let nodes = wide
            .nodes
            .iter()
            .map(|n| match &n.kind {
                WideKind::Leaf { first, count } => {
                    WideNodeU::empty(wide.width, NodePayload::Leaf { first: *first, count: *count })
                }
                WideKind::Inner(ch) => {
                    let mut children = [-1; MAX_WIDTH];
                    let mut rec = WideNodeU::empty(wide.width, NodePayload::Inner { children });
                    for (slot, &c) in ch.iter().enumerate() {
                        children[slot] = c as i32;
                        let b = &wide.nodes[c as usize].bounds;
                        for axis in 0..3 {
                            rec.lo[axis][slot] = b.lo[axis];
                            rec.hi[axis][slot] = b.hi[axis];
                        }
                    }
                    rec.payload = NodePayload::Inner { children };
                    rec
                }
            })
            .collect();
        Self {
            width: wide.width,
            nodes,
            triangles: wide.tri_order.iter().map(|&t| tris[t as usize]).collect(),
            tri_ids: wide.tri_order.clone(),
        }
    }
}

pub(crate) fn leaf_range(p: &NodePayload) -> Option<(u32, u32)> {
    match *p {
        NodePayload::Inner { .. } => None,
        NodePayload::Leaf { first, count } => Some((first, count)),
        NodePayload::LeafInline { first, count, .. } => Some((first, u32::from(count))),
    }
}

struct Layout {
    frames: Vec<QuantFrame>,
    boxes: Vec<[QBox; MAX_WIDTH]>,
}

/// One top-down pass: frames for every node given per-node exponent floors.
fn assign_frames(wide: &WideBvh, floor: &[[i32; 3]], min_exp: i32) -> Result<Layout> {
    let n = wide.nodes.len();
    let mut frames = vec![QuantFrame::default(); n];
    let mut boxes = vec![[QBox::EMPTY; MAX_WIDTH]; n];
    let root = &wide.nodes[0].bounds;
    frames[0] = root_frame(root.lo_f64(), root.hi_f64(), floor[0])?;
    // parents precede children in a WideBvh
    for i in 0..n {
        let WideKind::Inner(children) = &wide.nodes[i].kind else { continue };
        let parent = frames[i];
        for (slot, &c) in children.iter().enumerate() {
            let b = &wide.nodes[c as usize].bounds;
            let q = quantize_bounds(&parent, b.lo_f64(), b.hi_f64())?;
            let mut exp = [0; 3];
            for axis in 0..3 {
                let pe = i32::from(parent.exp[axis]);
                let cells = i64::from(q.hi[axis]) - i64::from(q.lo[axis]);
                let extent = cells as f64 * f64::from(pe).exp2();
                let natural = compute_scale(0.0, extent, min_exp)?;
                // a floor above the parent is resolved by the next pass
                exp[axis] = natural.max(floor[c as usize][axis]).min(pe);
            }
            frames[c as usize] = derive_child_frame(&parent, &q, exp)?;
            boxes[i][slot] = q;
        }
    }
    Ok(Layout { frames, boxes })
}

/// Quantizes a wide BVH.
///
/// Frames are first derived top-down from each node's own extent. The
/// coarsest leaf exponents are then broadcast to every leaf and propagated
/// upward so no child is coarser than its parent, and the frames and child
/// boxes are re-derived. This repeats until the exponents no longer change
/// (coarser parents can enlarge child boxes, which may coarsen leaves again).
pub fn compress(wide: &WideBvh, tris: &[Triangle], cfg: &CompressConfig) -> Result<(CompressedBvh, CompressionStats)> {
    super::check_width(wide.width)?;
    if wide.nodes.is_empty() || tris.is_empty() {
        return Err(BuildError::EmptyMesh);
    }
    let n = wide.nodes.len();
    let children: Vec<Vec<usize>> = wide
        .nodes
        .iter()
        .map(|nd| match &nd.kind {
            WideKind::Inner(ch) => ch.iter().map(|&c| c as usize).collect(),
            WideKind::Leaf { .. } => Vec::new(),
        })
        .collect();
    let is_leaf: Vec<bool> = children.iter().map(Vec::is_empty).collect();

    let mut floor = vec![[cfg.min_exponent; 3]; n];
    let mut passes = 0;
    let (layout, leaf_exp) = loop {
        passes += 1;
        if passes > MAX_PASSES {
            return Err(BuildError::NoConvergence(MAX_PASSES));
        }
        let layout = assign_frames(wide, &floor, cfg.min_exponent)?;
        let exps: Vec<[i32; 3]> = layout.frames.iter().map(QuantFrame::exp_i32).collect();
        let leaf_scales: Vec<[i32; 3]> = (0..n).filter(|&i| is_leaf[i]).map(|i| exps[i]).collect();
        let mut leaf_exp = broadcast_leaf_scales(&leaf_scales).expect("a wide BVH has at least one leaf");
        // Flat scenes would otherwise put a degenerate axis at the minimum
        // exponent, too far below the others for the ray direction format.
        let coarsest = *leaf_exp.iter().max().expect("three axes");
        for e in &mut leaf_exp {
            *e = (*e).max(coarsest - MAX_LEAF_ANISOTROPY);
        }
        let seeded: Vec<[i32; 3]> = (0..n).map(|i| if is_leaf[i] { leaf_exp } else { exps[i] }).collect();
        let target = propagate_scales_up(&children, &seeded);
        if target == exps {
            break (layout, leaf_exp);
        }
        floor = target;
    };

    let mut pool = vec![QTriangle { v: [[0; 3]; 3] }; wide.tri_order.len()];
    for (i, nd) in wide.nodes.iter().enumerate() {
        if let WideKind::Leaf { first, count } = nd.kind {
            let frame = &layout.frames[i];
            for k in first as usize..(first + count) as usize {
                let v = tris[wide.tri_order[k] as usize].map(|p| p.as_dvec3());
                pool[k] = quantize_triangle(frame, v)?;
            }
        }
    }

    let cap = if cfg.inline_triangles { inline_capacity(wide.width) } else { 0 };
    let mut nodes = Vec::with_capacity(n);
    for (i, nd) in wide.nodes.iter().enumerate() {
        let frame = layout.frames[i];
        let rec = match &nd.kind {
            WideKind::Inner(ch) => {
                let mut children = [-1; MAX_WIDTH];
                for (slot, &c) in ch.iter().enumerate() {
                    children[slot] = c as i32;
                }
                let mut rec = WideNodeC::empty(wide.width, frame, NodePayload::Inner { children });
                for slot in 0..ch.len() {
                    rec.set_child_box(slot, &layout.boxes[i][slot]);
                }
                rec
            }
            &WideKind::Leaf { first, count } if (count as usize) <= cap => {
                let mut tris = [QTriangle { v: [[0; 3]; 3] }; 3];
                tris[..count as usize].copy_from_slice(&pool[first as usize..(first + count) as usize]);
                WideNodeC::empty(wide.width, frame, NodePayload::LeafInline { first, count: count as u8, tris })
            }
            &WideKind::Leaf { first, count } => WideNodeC::empty(wide.width, frame, NodePayload::Leaf { first, count }),
        };
        nodes.push(rec);
    }

    let mut bvh = CompressedBvh {
        width: wide.width,
        nodes,
        triangles: pool,
        tri_ids: wide.tri_order.clone(),
        leaf_exp,
        coord_bits: 0,
    };
    let mut max_coord = 0i64;
    for nd in &bvh.nodes {
        let s = bvh.shift_to_leaf(&nd.frame);
        for a in 0..3 {
            let o = i64::from(nd.frame.origin[a]);
            max_coord = max_coord.max((o << s[a]).abs()).max(((o + 255) << s[a]).abs());
        }
    }
    bvh.coord_bits = magnitude_bits(i128::from(max_coord));

    let stats = CompressionStats {
        nodes: n,
        triangles: bvh.triangles.len(),
        leaf_exp,
        passes,
        node_bytes_compressed: bvh.node_pool_bytes(),
        node_bytes_uncompressed: node_byte_size(wide.width, false)? * n,
        triangle_bytes_compressed: bvh.triangle_pool_bytes(),
        triangle_bytes_uncompressed: FLOAT_TRIANGLE_BYTES * bvh.triangles.len(),
    };
    Ok((bvh, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bvh::{build_binary_sah, collapse_to_width, BuildConfig};
    use glam::Vec3;

    #[test]
    fn flat_scene_keeps_axes_close() {
        let q = |x: f32| [Vec3::new(x, 0.0, 0.3), Vec3::new(x + 1.0, 0.0, 0.3), Vec3::new(x + 1.0, 1.0, 0.3)];
        let tris = [q(0.0), q(10.0)];
        let wide = collapse_to_width(&build_binary_sah(&tris, &BuildConfig::default()).unwrap(), 2).unwrap();
        let (c, _) = compress(&wide, &tris, &CompressConfig::default()).unwrap();
        let e = c.leaf_exp;
        assert_eq!(e.iter().max().unwrap() - e.iter().min().unwrap(), MAX_LEAF_ANISOTROPY);
        assert!(crate::bvh::validate_against(&c, &wide, &tris).is_ok());
    }

    #[test]
    fn single_leaf_scene() {
        let tri = [Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.5)];
        let bin = build_binary_sah(&[tri], &BuildConfig::default()).unwrap();
        for (w, size) in [(2, 36), (4, 56), (8, 96)] {
            let wide = collapse_to_width(&bin, w).unwrap();
            let (c, stats) = compress(&wide, &[tri], &CompressConfig::default()).unwrap();
            assert_eq!(c.nodes.len(), 1);
            assert_eq!(c.nodes[0].to_bytes().len(), size);
            assert_eq!(stats.triangle_bytes_compressed * 4, stats.triangle_bytes_uncompressed);
            // origin vertex and the far corner land exactly on the grid
            assert_eq!(c.triangles[0].v[0], [0, 0, 0]);
        }
    }

    #[test]
    fn leaves_share_scale() {
        let mut tris = Vec::new();
        for i in 0..40 {
            let o = Vec3::new(i as f32 * 0.37, (i % 7) as f32, (i % 3) as f32 * 0.01);
            let s = 0.01 + 0.05 * (i % 5) as f32;
            tris.push([o, o + Vec3::new(s, 0.0, 0.0), o + Vec3::new(0.0, s, s)]);
        }
        let bin = build_binary_sah(&tris, &BuildConfig::default()).unwrap();
        let wide = collapse_to_width(&bin, 4).unwrap();
        let (c, _) = compress(&wide, &tris, &CompressConfig::default()).unwrap();
        for n in &c.nodes {
            if leaf_range(&n.payload).is_some() {
                assert_eq!(n.frame.exp_i32(), c.leaf_exp);
            }
        }
    }
}
