use std::fmt;

use crate::quantize::QBox;

use super::compress::leaf_range;
use super::node::NodePayload;
use super::{CompressedBvh, Triangle, WideBvh, WideKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Slot without a child whose box is not the empty sentinel.
    EmptySlotNotSentinel {
        node: u32,
        slot: u8,
    },
    /// Occupied slot with `lo > hi` on some axis.
    InvertedBox {
        node: u32,
        slot: u8,
        axis: u8,
    },
    ChildOutOfRange {
        node: u32,
        slot: u8,
        child: i32,
    },
    /// Node referenced more than once (or the root referenced as a child).
    Revisited {
        node: u32,
    },
    Unreachable {
        node: u32,
    },
    ScaleNotMonotone {
        parent: u32,
        child: u32,
        axis: u8,
    },
    LeafScaleMismatch {
        node: u32,
    },
    /// Child frame origin differs from the lower corner of its box.
    OriginMismatch {
        parent: u32,
        child: u32,
        axis: u8,
    },
    ChildEscapesParent {
        node: u32,
        slot: u8,
        axis: u8,
    },
    TriangleEscapesLeaf {
        node: u32,
        triangle: u32,
        axis: u8,
    },
    TriangleCoverage {
        triangle: u32,
    },
    /// Dequantized box does not enclose the float box it encodes.
    NotConservative {
        node: u32,
        slot: u8,
        axis: u8,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a compressed tree in exact integer grid arithmetic: slot encoding,
/// acyclicity, scale monotonicity, child-within-parent containment,
/// triangles within their leaf box, and that every pool triangle belongs to
/// exactly one leaf.
pub fn validate_hierarchy(bvh: &CompressedBvh) -> ValidationReport {
    let mut v = Vec::new();
    let n = bvh.nodes.len();
    let mut seen = vec![false; n];
    let mut covered = vec![0u32; bvh.triangles.len()];
    // (node, cell extent of the node's box in its own frame)
    let mut stack = vec![(0u32, [255i64; 3])];
    if n > 0 {
        seen[0] = true;
    }
    while let Some((id, extent)) = stack.pop() {
        let node = &bvh.nodes[id as usize];
        match node.payload {
            NodePayload::Inner { children } => {
                for (slot, &child) in children.iter().enumerate().take(node.width as usize) {
                    let b = node.child_box(slot);
                    let s = slot as u8;
                    if child < 0 {
                        if !b.is_empty_slot() {
                            v.push(Violation::EmptySlotNotSentinel { node: id, slot: s });
                        }
                        continue;
                    }
                    if child as usize >= n {
                        v.push(Violation::ChildOutOfRange { node: id, slot: s, child });
                        continue;
                    }
                    // an inverted box is reported alone; its subtree is still walked
                    let inverted = (0..3).find(|&a| b.lo[a] > b.hi[a]);
                    if let Some(axis) = inverted {
                        v.push(Violation::InvertedBox { node: id, slot: s, axis: axis as u8 });
                    }
                    for a in 0..3 {
                        if inverted.is_none() && i64::from(b.hi[a]) > extent[a] {
                            v.push(Violation::ChildEscapesParent { node: id, slot: s, axis: a as u8 });
                        }
                    }
                    let c = child as u32;
                    if std::mem::replace(&mut seen[c as usize], true) {
                        v.push(Violation::Revisited { node: c });
                        continue;
                    }
                    let cf = bvh.nodes[c as usize].frame;
                    let mut ext = [0i64; 3];
                    let mut ok = true;
                    for a in 0..3 {
                        let d = i32::from(node.frame.exp[a]) - i32::from(cf.exp[a]);
                        if d < 0 {
                            v.push(Violation::ScaleNotMonotone { parent: id, child: c, axis: a as u8 });
                            ok = false;
                            continue;
                        }
                        if inverted.is_some() {
                            ext[a] = i64::MAX;
                            continue;
                        }
                        let lo = (i128::from(node.frame.origin[a]) + i128::from(b.lo[a])) << d;
                        if lo != i128::from(cf.origin[a]) {
                            v.push(Violation::OriginMismatch { parent: id, child: c, axis: a as u8 });
                        }
                        ext[a] = (i64::from(b.hi[a]) - i64::from(b.lo[a])) << d;
                    }
                    if ok {
                        stack.push((c, ext));
                    }
                }
            }
            ref p => {
                let (first, count) = leaf_range(p).expect("leaf payload");
                if node.frame.exp_i32() != bvh.leaf_exp {
                    v.push(Violation::LeafScaleMismatch { node: id });
                }
                for t in first..first + count {
                    let Some(tri) = bvh.triangles.get(t as usize) else {
                        v.push(Violation::TriangleCoverage { triangle: t });
                        continue;
                    };
                    covered[t as usize] += 1;
                    for a in 0..3 {
                        if tri.v.iter().any(|p| i64::from(p[a]) > extent[a]) {
                            v.push(Violation::TriangleEscapesLeaf { node: id, triangle: t, axis: a as u8 });
                        }
                    }
                }
                if let NodePayload::LeafInline { count, tris, .. } = p {
                    if tris[..*count as usize] != bvh.triangles[first as usize..(first + u32::from(*count)) as usize] {
                        v.push(Violation::TriangleCoverage { triangle: first });
                    }
                }
            }
        }
    }
    for (i, s) in seen.iter().enumerate() {
        if !s {
            v.push(Violation::Unreachable { node: i as u32 });
        }
    }
    for (t, &c) in covered.iter().enumerate() {
        if c != 1 {
            v.push(Violation::TriangleCoverage { triangle: t as u32 });
        }
    }
    ValidationReport { violations: v }
}

/// [`validate_hierarchy`] plus conservativeness against the float tree the
/// compressed one was built from, and triangle multiset preservation.
pub fn validate_against(bvh: &CompressedBvh, wide: &WideBvh, tris: &[Triangle]) -> ValidationReport {
    let mut report = validate_hierarchy(bvh);
    let v = &mut report.violations;
    for (i, (wn, cn)) in wide.nodes.iter().zip(&bvh.nodes).enumerate() {
        let WideKind::Inner(children) = &wn.kind else { continue };
        for (slot, &c) in children.iter().enumerate() {
            let fb = &wide.nodes[c as usize].bounds;
            let qb: QBox = cn.child_box(slot);
            let (lo, hi) = cn.frame.dequantize(&qb);
            for a in 0..3 {
                if lo[a] > f64::from(fb.lo[a]) || hi[a] < f64::from(fb.hi[a]) {
                    v.push(Violation::NotConservative { node: i as u32, slot: slot as u8, axis: a as u8 });
                }
            }
        }
    }
    let mut ids = bvh.tri_ids.clone();
    ids.sort_unstable();
    if ids.len() != tris.len() || ids.iter().enumerate().any(|(i, &t)| i as u32 != t) {
        v.push(Violation::TriangleCoverage { triangle: u32::MAX });
    }
    report
}
