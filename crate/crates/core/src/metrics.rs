//! Memory traffic and intersection counters.
//!
//! Every fetch or store charges its full record size; there is no cache
//! model. Box tests count per-child slab evaluations of occupied slots.

use std::ops::{Add, AddAssign};

/// Counter category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    NodeBounds,
    Triangles,
    RayLoads,
    RayStores,
    SrStack,
    RsStack,
    RayLists,
    BoxTests,
    TriTests,
    NodeFetches,
    Rays,
}

impl Category {
    pub const BYTES: [Category; 7] = [
        Category::NodeBounds,
        Category::Triangles,
        Category::RayLoads,
        Category::RayStores,
        Category::SrStack,
        Category::RsStack,
        Category::RayLists,
    ];
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct TrafficStats {
    pub node_bounds: u64,
    pub triangles: u64,
    pub ray_loads: u64,
    pub ray_stores: u64,
    pub sr_stack: u64,
    pub rs_stack: u64,
    pub ray_lists: u64,
    pub box_tests: u64,
    pub tri_tests: u64,
    pub node_fetches: u64,
    pub rays: u64,
}

impl TrafficStats {
    fn slot(&mut self, c: Category) -> &mut u64 {
        match c {
            Category::NodeBounds => &mut self.node_bounds,
            Category::Triangles => &mut self.triangles,
            Category::RayLoads => &mut self.ray_loads,
            Category::RayStores => &mut self.ray_stores,
            Category::SrStack => &mut self.sr_stack,
            Category::RsStack => &mut self.rs_stack,
            Category::RayLists => &mut self.ray_lists,
            Category::BoxTests => &mut self.box_tests,
            Category::TriTests => &mut self.tri_tests,
            Category::NodeFetches => &mut self.node_fetches,
            Category::Rays => &mut self.rays,
        }
    }

    #[inline]
    pub fn record(&mut self, c: Category, n: u64) {
        *self.slot(c) += n;
    }

    pub fn get(&self, c: Category) -> u64 {
        *self.clone().slot(c)
    }

    pub fn merge(&mut self, o: &TrafficStats) {
        *self += *o;
    }

    pub fn total_bytes(&self) -> u64 {
        Category::BYTES.iter().map(|&c| self.get(c)).sum()
    }

    /// Bytes spent on ray records and ray lists.
    pub fn ray_traffic(&self) -> u64 {
        self.ray_loads + self.ray_stores + self.ray_lists
    }

    /// Share of ray traffic in the total, in percent.
    pub fn ray_traffic_pct(&self) -> f64 {
        match self.total_bytes() {
            0 => 0.0,
            t => 100.0 * self.ray_traffic() as f64 / t as f64,
        }
    }
}

impl AddAssign for TrafficStats {
    fn add_assign(&mut self, o: TrafficStats) {
        self.node_bounds += o.node_bounds;
        self.triangles += o.triangles;
        self.ray_loads += o.ray_loads;
        self.ray_stores += o.ray_stores;
        self.sr_stack += o.sr_stack;
        self.rs_stack += o.rs_stack;
        self.ray_lists += o.ray_lists;
        self.box_tests += o.box_tests;
        self.tri_tests += o.tri_tests;
        self.node_fetches += o.node_fetches;
        self.rays += o.rays;
    }
}

impl Add for TrafficStats {
    type Output = TrafficStats;

    fn add(mut self, o: TrafficStats) -> TrafficStats {
        self += o;
        self
    }
}

impl std::iter::Sum for TrafficStats {
    fn sum<I: Iterator<Item = TrafficStats>>(it: I) -> Self {
        it.fold(TrafficStats::default(), Add::add)
    }
}

/// Results of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigReport {
    pub label: String,
    pub width: usize,
    pub mode: String,
    pub compression: String,
    pub stats: TrafficStats,
    /// Totals per bounce; bounce 0 holds the primary rays.
    pub per_bounce: Vec<TrafficStats>,
}

/// Fixed leading columns of [`report_csv`]; `bounce<k>_bytes` columns follow.
pub const CSV_COLUMNS: [&str; 16] = [
    "config",
    "width",
    "mode",
    "compression",
    "rays",
    "node_bytes",
    "triangle_bytes",
    "ray_load_bytes",
    "ray_store_bytes",
    "sr_stack_bytes_e4",
    "rs_stack_bytes_e12",
    "ray_list_bytes_e4",
    "total_bytes",
    "ray_traffic_pct",
    "box_tests",
    "tri_tests",
];

/// One CSV row per configuration. Stack and list columns carry their entry
/// size in the header (`_e4` = 4-byte entries, `_e12` = 12-byte entries).
pub fn report_csv(rows: &[ConfigReport]) -> String {
    let bounces = rows.iter().map(|r| r.per_bounce.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = CSV_COLUMNS.iter().map(|s| s.to_string()).chain((0..bounces).map(|k| format!("bounce{k}_bytes")));
    w.write_record(header).expect("write to memory");
    for r in rows {
        let s = &r.stats;
        let mut rec = vec![
            r.label.clone(),
            r.width.to_string(),
            r.mode.clone(),
            r.compression.clone(),
            s.rays.to_string(),
            s.node_bounds.to_string(),
            s.triangles.to_string(),
            s.ray_loads.to_string(),
            s.ray_stores.to_string(),
            s.sr_stack.to_string(),
            s.rs_stack.to_string(),
            s.ray_lists.to_string(),
            s.total_bytes().to_string(),
            format!("{:.3}", s.ray_traffic_pct()),
            s.box_tests.to_string(),
            s.tri_tests.to_string(),
        ];
        for k in 0..bounces {
            rec.push(r.per_bounce.get(k).map(|b| b.total_bytes().to_string()).unwrap_or_default());
        }
        w.write_record(rec).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accumulates() {
        let mut s = TrafficStats::default();
        for _ in 0..3 {
            s.record(Category::NodeBounds, 96);
        }
        assert_eq!(s.node_bounds, 288);
        assert_eq!(s.total_bytes(), 288);
    }

    #[test]
    fn merge_is_fieldwise_sum() {
        let mut a = TrafficStats { node_bounds: 1, ray_lists: 2, box_tests: 3, ..Default::default() };
        let b = TrafficStats { node_bounds: 10, rs_stack: 5, tri_tests: 7, ..Default::default() };
        a.merge(&b);
        assert_eq!(
            a,
            TrafficStats {
                node_bounds: 11,
                ray_lists: 2,
                rs_stack: 5,
                box_tests: 3,
                tri_tests: 7,
                ..Default::default()
            }
        );
    }

    #[test]
    fn ray_fraction_by_hand() {
        // 100 node + 50 tri + 30 load + 10 store + 10 list = 200 bytes, 50 of them ray traffic
        let s = TrafficStats {
            node_bounds: 100,
            triangles: 50,
            ray_loads: 30,
            ray_stores: 10,
            ray_lists: 10,
            ..Default::default()
        };
        assert_eq!(s.ray_traffic_pct(), 25.0);
    }

    #[test]
    fn single_row_csv() {
        let stats = TrafficStats { node_bounds: 7, triangles: 9, rs_stack: 24, rays: 1, ..Default::default() };
        let r = ConfigReport {
            label: "BVH8-RS-C".into(),
            width: 8,
            mode: "RS".into(),
            compression: "C".into(),
            stats,
            per_bounce: vec![stats],
        };
        let text = report_csv(&[r]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("config,width,mode,compression,rays,node_bytes"));
        assert!(lines[0].ends_with("bounce0_bytes"));
        assert_eq!(lines[1], "BVH8-RS-C,8,RS,C,1,7,9,0,0,0,24,0,40,0.000,0,0,40");
    }
}
