use arrayvec::ArrayVec;

use crate::bvh::MAX_WIDTH;
use crate::metrics::{Category, TrafficStats};

use super::{Accel, HIT_RECORD_BYTES, RAY_INDEX_BYTES, RS_ENTRY_BYTES};

const COUNT_BITS: u32 = 24;
const MAX_STREAM: usize = (1 << COUNT_BITS) - 1;

/// Shared-stack entry: node, offset of its ray list in the index arena, and
/// the list length in the low 24 bits with a child-progress mask above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamStackEntry {
    pub node: u32,
    pub offset: u32,
    pub count_mask: u32,
}

impl StreamStackEntry {
    pub const BYTES: usize = 12;

    pub fn new(node: u32, offset: u32, count: u32, mask: u8) -> Self {
        debug_assert!(count as usize <= MAX_STREAM);
        Self { node, offset, count_mask: count | (u32::from(mask) << COUNT_BITS) }
    }

    pub fn count(&self) -> u32 {
        self.count_mask & ((1 << COUNT_BITS) - 1)
    }

    /// Children already expanded. Entries expand all children at once, so
    /// this stays zero.
    pub fn mask(&self) -> u8 {
        (self.count_mask >> COUNT_BITS) as u8
    }

    pub fn to_bytes(&self) -> [u8; 12] {
        let mut b = [0u8; 12];
        b[..4].copy_from_slice(&self.node.to_le_bytes());
        b[4..8].copy_from_slice(&self.offset.to_le_bytes());
        b[8..].copy_from_slice(&self.count_mask.to_le_bytes());
        b
    }
}

/// Closest hits of a batch of rays using one shared stack of
/// (node, ray list) entries.
///
/// A popped entry fetches its node once and loads every listed ray. Inner
/// nodes distribute the rays into per-child lists; children are pushed
/// far-to-near by the smallest entry distance among their rays. The index
/// arena is used as a stack: a popped entry's list is always on top, so it
/// is replaced in place by the child lists. Leaf entries fetch their
/// triangles once and test them against every listed ray.
pub fn traverse_stream<A: Accel>(accel: &A, rays: &[A::Ray], stats: &mut TrafficStats) -> Vec<A::Hit> {
    let mut out = Vec::with_capacity(rays.len());
    for chunk in rays.chunks(MAX_STREAM) {
        out.extend(stream_chunk(accel, chunk, stats));
    }
    out
}

fn stream_chunk<A: Accel>(accel: &A, input: &[A::Ray], stats: &mut TrafficStats) -> Vec<A::Hit> {
    let n = input.len();
    let mut rays = input.to_vec();
    let mut hits = vec![accel.no_hit(); n];
    if n == 0 {
        return hits;
    }
    let node_bytes = accel.node_bytes();
    let ray_bytes = accel.ray_bytes();
    stats.record(Category::Rays, n as u64);

    let mut arena: Vec<u32> = (0..n as u32).collect();
    stats.record(Category::RayLists, RAY_INDEX_BYTES * n as u64);
    let mut stack = vec![StreamStackEntry::new(0, 0, n as u32, 0)];
    stats.record(Category::RsStack, RS_ENTRY_BYTES);

    let mut lists: [Vec<u32>; MAX_WIDTH] = Default::default();
    let mut keys;
    let mut nodes = [0u32; MAX_WIDTH];
    let mut tmp = ArrayVec::new();

    while let Some(e) = stack.pop() {
        stats.record(Category::RsStack, RS_ENTRY_BYTES);
        stats.record(Category::NodeFetches, 1);
        stats.record(Category::NodeBounds, node_bytes);
        let start = e.offset as usize;
        let end = start + e.count() as usize;
        let count = e.count() as u64;
        stats.record(Category::RayLists, RAY_INDEX_BYTES * count);
        stats.record(Category::RayLoads, ray_bytes * count);

        match accel.leaf(e.node) {
            Some((first, tri_count, inline)) => {
                if !inline {
                    stats.record(Category::Triangles, u64::from(tri_count) * accel.triangle_bytes());
                }
                stats.record(Category::TriTests, u64::from(tri_count) * count);
                for &r in &arena[start..end] {
                    let r = r as usize;
                    let mut improved = false;
                    for p in first..first + tri_count {
                        improved |= accel.intersect_triangle(p, &mut rays[r], &mut hits[r]);
                    }
                    if improved {
                        stats.record(Category::RayStores, HIT_RECORD_BYTES);
                    }
                }
                arena.truncate(start);
            }
            None => {
                for l in &mut lists {
                    l.clear();
                }
                keys = [u64::MAX; MAX_WIDTH];
                for &r in &arena[start..end] {
                    tmp.clear();
                    let tests = accel.intersect_children(e.node, &rays[r as usize], &mut tmp);
                    stats.record(Category::BoxTests, tests.into());
                    for &(t, slot, child) in &tmp {
                        let s = slot as usize;
                        lists[s].push(r);
                        keys[s] = keys[s].min(t);
                        nodes[s] = child;
                    }
                }
                arena.truncate(start);
                let mut order: ArrayVec<(u64, usize), MAX_WIDTH> =
                    (0..accel.width()).filter(|&s| !lists[s].is_empty()).map(|s| (keys[s], s)).collect();
                order.sort_unstable();
                for &(_, s) in order.iter().rev() {
                    let offset = arena.len() as u32;
                    arena.extend_from_slice(&lists[s]);
                    stats.record(Category::RayLists, RAY_INDEX_BYTES * lists[s].len() as u64);
                    stack.push(StreamStackEntry::new(nodes[s], offset, lists[s].len() as u32, 0));
                    stats.record(Category::RsStack, RS_ENTRY_BYTES);
                }
            }
        }
    }
    hits
}
