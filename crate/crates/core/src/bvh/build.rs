use glam::Vec3;

use super::{Aabb, BuildError, Result, Triangle};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildConfig {
    pub bins: usize,
    pub max_leaf_size: usize,
    pub traversal_cost: f32,
    pub intersection_cost: f32,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self { bins: 16, max_leaf_size: 4, traversal_cost: 1.0, intersection_cost: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuildKind {
    Inner {
        left: u32,
        right: u32,
    },
    /// Range into [`BinaryBvh::tri_order`].
    Leaf {
        first: u32,
        count: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildNode {
    pub bounds: Aabb,
    pub kind: BuildKind,
}

/// Binary BVH; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryBvh {
    pub nodes: Vec<BuildNode>,
    /// Triangle indices permuted so that every leaf covers a contiguous range.
    pub tri_order: Vec<u32>,
}

impl BinaryBvh {
    pub fn depth(&self) -> usize {
        fn go(b: &BinaryBvh, n: u32) -> usize {
            match b.nodes[n as usize].kind {
                BuildKind::Leaf { .. } => 1,
                BuildKind::Inner { left, right } => 1 + go(b, left).max(go(b, right)),
            }
        }
        go(self, 0)
    }
}

#[derive(Clone, Copy)]
struct Bin {
    bounds: Aabb,
    count: usize,
}

impl Default for Bin {
    fn default() -> Self {
        Self { bounds: Aabb::EMPTY, count: 0 }
    }
}

struct Split {
    axis: usize,
    /// Centroids with bin index < `bin` go left.
    bin: usize,
    cost: f32,
}

/// Top-down binned SAH builder. The result only depends on the input order.
pub fn build_binary_sah(tris: &[Triangle], cfg: &BuildConfig) -> Result<BinaryBvh> {
    if tris.is_empty() {
        return Err(BuildError::EmptyMesh);
    }
    if let Some(i) = tris.iter().position(|t| !t.iter().all(|v| v.is_finite())) {
        return Err(BuildError::NonFinite(i));
    }
    let boxes: Vec<Aabb> = tris.iter().map(Aabb::from_triangle).collect();
    let centroids: Vec<Vec3> = boxes.iter().map(Aabb::center).collect();
    let mut order: Vec<u32> = (0..tris.len() as u32).collect();
    let mut nodes = vec![BuildNode { bounds: Aabb::EMPTY, kind: BuildKind::Leaf { first: 0, count: 0 } }];

    // (node index, first, count)
    let mut work = vec![(0usize, 0usize, tris.len())];
    while let Some((node, first, count)) = work.pop() {
        let range = &mut order[first..first + count];
        let mut bounds = Aabb::EMPTY;
        let mut cbounds = Aabb::EMPTY;
        for &t in range.iter() {
            bounds = bounds.union(&boxes[t as usize]);
            cbounds.grow(centroids[t as usize]);
        }
        nodes[node].bounds = bounds;

        let leaf = BuildKind::Leaf { first: first as u32, count: count as u32 };
        if count == 1 {
            nodes[node].kind = leaf;
            continue;
        }

        let split = best_split(range, &boxes, &centroids, &cbounds, cfg);
        let leaf_cost = count as f32 * cfg.intersection_cost;
        let mid = match split {
            Some(s) if count > cfg.max_leaf_size || s.cost < leaf_cost => {
                let lo = cbounds.lo[s.axis];
                let ext = cbounds.hi[s.axis] - lo;
                let bins = cfg.bins;
                let bin_of = |t: u32| bin_index(centroids[t as usize][s.axis], lo, ext, bins);
                let mut i = 0;
                let mut j = range.len();
                while i < j {
                    if bin_of(range[i]) < s.bin {
                        i += 1;
                    } else {
                        j -= 1;
                        range.swap(i, j);
                    }
                }
                i
            }
            None if count > cfg.max_leaf_size => count / 2,
            _ => {
                nodes[node].kind = leaf;
                continue;
            }
        };

        let left = nodes.len();
        nodes.push(BuildNode { bounds: Aabb::EMPTY, kind: leaf });
        nodes.push(BuildNode { bounds: Aabb::EMPTY, kind: leaf });
        nodes[node].kind = BuildKind::Inner { left: left as u32, right: left as u32 + 1 };
        // right first so the left subtree is finished first
        work.push((left + 1, first + mid, count - mid));
        work.push((left, first, mid));
    }
    Ok(BinaryBvh { nodes, tri_order: order })
}

fn bin_index(c: f32, lo: f32, ext: f32, bins: usize) -> usize {
    let b = ((c - lo) / ext * bins as f32) as usize;
    b.min(bins - 1)
}

fn best_split(range: &[u32], boxes: &[Aabb], centroids: &[Vec3], cbounds: &Aabb, cfg: &BuildConfig) -> Option<Split> {
    let parent_area = range.iter().fold(Aabb::EMPTY, |a, &t| a.union(&boxes[t as usize])).surface_area();
    let mut best: Option<Split> = None;
    for axis in 0..3 {
        let lo = cbounds.lo[axis];
        let ext = cbounds.hi[axis] - lo;
        if ext <= 0.0 {
            continue;
        }
        let mut bins = vec![Bin::default(); cfg.bins];
        for &t in range {
            let b = &mut bins[bin_index(centroids[t as usize][axis], lo, ext, cfg.bins)];
            b.count += 1;
            b.bounds = b.bounds.union(&boxes[t as usize]);
        }
        // suffix sweep
        let mut right_area = vec![0.0f32; cfg.bins];
        let mut right_count = vec![0usize; cfg.bins];
        let mut acc = Aabb::EMPTY;
        let mut n = 0;
        for i in (1..cfg.bins).rev() {
            acc = acc.union(&bins[i].bounds);
            n += bins[i].count;
            right_area[i] = acc.surface_area();
            right_count[i] = n;
        }
        let mut acc = Aabb::EMPTY;
        let mut n = 0;
        for i in 1..cfg.bins {
            acc = acc.union(&bins[i - 1].bounds);
            n += bins[i - 1].count;
            if n == 0 || right_count[i] == 0 {
                continue;
            }
            let cost = cfg.traversal_cost
                + cfg.intersection_cost * (acc.surface_area() * n as f32 + right_area[i] * right_count[i] as f32)
                    / parent_area.max(f32::MIN_POSITIVE);
            if best.as_ref().is_none_or(|b| cost < b.cost) {
                best = Some(Split { axis, bin: i, cost });
            }
        }
    }
    best
}
