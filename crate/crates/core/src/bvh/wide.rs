use super::{check_width, Aabb, BinaryBvh, BuildKind, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WideKind {
    /// Up to `width` child node indices.
    Inner(Vec<u32>),
    /// Range into [`WideBvh::tri_order`].
    Leaf { first: u32, count: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WideNode {
    pub bounds: Aabb,
    pub kind: WideKind,
}

/// W-ary BVH in depth-first order; node 0 is the root and every parent
/// precedes its children.
#[derive(Debug, Clone, PartialEq)]
pub struct WideBvh {
    pub width: usize,
    pub nodes: Vec<WideNode>,
    pub tri_order: Vec<u32>,
}

impl WideBvh {
    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n.kind, WideKind::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        let mut depth = vec![1usize; self.nodes.len()];
        let mut max = 1;
        for (i, n) in self.nodes.iter().enumerate() {
            if let WideKind::Inner(ch) = &n.kind {
                for &c in ch {
                    depth[c as usize] = depth[i] + 1;
                    max = max.max(depth[i] + 1);
                }
            }
        }
        max
    }

    /// Triangle indices reachable from the root, in leaf order.
    pub fn reachable_triangles(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut stack = vec![0u32];
        while let Some(n) = stack.pop() {
            match &self.nodes[n as usize].kind {
                WideKind::Inner(ch) => stack.extend(ch.iter().rev()),
                WideKind::Leaf { first, count } => {
                    out.extend_from_slice(&self.tri_order[*first as usize..(*first + *count) as usize])
                }
            }
        }
        out
    }
}

/// Collapses a binary BVH into a `width`-ary one by repeatedly opening the
/// inner child with the largest surface area until all slots are used.
pub fn collapse_to_width(bin: &BinaryBvh, width: usize) -> Result<WideBvh> {
    check_width(width)?;
    let mut wide = WideBvh { width, nodes: Vec::new(), tri_order: bin.tri_order.clone() };
    // (binary node, wide slot to fill)
    let mut stack = vec![(0u32, 0usize)];
    wide.nodes.push(placeholder());
    while let Some((b, slot)) = stack.pop() {
        let node = &bin.nodes[b as usize];
        let kind = match node.kind {
            BuildKind::Leaf { first, count } => WideKind::Leaf { first, count },
            BuildKind::Inner { left, right } => {
                let mut children = vec![left, right];
                while children.len() < width {
                    let pick = children
                        .iter()
                        .enumerate()
                        .filter(|(_, &c)| matches!(bin.nodes[c as usize].kind, BuildKind::Inner { .. }))
                        .max_by(|(ia, &a), (ib, &b)| {
                            let sa = bin.nodes[a as usize].bounds.surface_area();
                            let sb = bin.nodes[b as usize].bounds.surface_area();
                            // ties go to the earlier slot
                            sa.total_cmp(&sb).then(ib.cmp(ia))
                        })
                        .map(|(i, _)| i);
                    let Some(i) = pick else { break };
                    let BuildKind::Inner { left, right } = bin.nodes[children[i] as usize].kind else { unreachable!() };
                    children.splice(i..=i, [left, right]);
                }
                let mut ids = Vec::with_capacity(children.len());
                for _ in &children {
                    ids.push(wide.nodes.len() as u32);
                    wide.nodes.push(placeholder());
                }
                // reverse push keeps depth-first order of emitted children
                for (&c, &id) in children.iter().zip(&ids).rev() {
                    stack.push((c, id as usize));
                }
                WideKind::Inner(ids)
            }
        };
        wide.nodes[slot] = WideNode { bounds: node.bounds, kind };
    }
    Ok(wide)
}

fn placeholder() -> WideNode {
    WideNode { bounds: Aabb::EMPTY, kind: WideKind::Leaf { first: 0, count: 0 } }
}
