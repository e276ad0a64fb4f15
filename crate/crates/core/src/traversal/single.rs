use arrayvec::ArrayVec;

use crate::metrics::{Category, TrafficStats};

use super::{Accel, SR_ENTRY_BYTES};

/// Closest hit of one ray using a private stack of 4-byte node indices.
///
/// Hit children are pushed far-to-near by entry distance (ties by slot), so
/// the nearest child is visited first. Charges one node fetch per visit,
/// one triangle fetch per test (none for inline leaves), 4 bytes per push
/// and pop, and one ray record per ray.
pub fn traverse_single<A: Accel>(accel: &A, ray: &A::Ray, stats: &mut TrafficStats) -> A::Hit {
    let mut ray = *ray;
    let mut hit = accel.no_hit();
    let node_bytes = accel.node_bytes();
    stats.record(Category::Rays, 1);
    stats.record(Category::RayLoads, accel.ray_bytes());

    let mut stack: Vec<u32> = Vec::with_capacity(64);
    stack.push(0);
    stats.record(Category::SrStack, SR_ENTRY_BYTES);
    let mut hits = ArrayVec::new();
    while let Some(node) = stack.pop() {
        stats.record(Category::SrStack, SR_ENTRY_BYTES);
        stats.record(Category::NodeFetches, 1);
        stats.record(Category::NodeBounds, node_bytes);
        match accel.leaf(node) {
            Some((first, count, inline)) => {
                if !inline {
                    stats.record(Category::Triangles, u64::from(count) * accel.triangle_bytes());
                }
                stats.record(Category::TriTests, count.into());
                for p in first..first + count {
                    accel.intersect_triangle(p, &mut ray, &mut hit);
                }
            }
            None => {
                hits.clear();
                let tests = accel.intersect_children(node, &ray, &mut hits);
                stats.record(Category::BoxTests, tests.into());
                hits.sort_unstable();
                for &(_, _, child) in hits.iter().rev() {
                    stack.push(child);
                    stats.record(Category::SrStack, SR_ENTRY_BYTES);
                }
            }
        }
    }
    hit
}
