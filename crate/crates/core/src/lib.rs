#![allow(clippy::needless_range_loop)]

pub mod bvh;
pub mod cli;
pub mod fxp;
pub mod isect;
pub mod metrics;
pub mod quantize;
pub mod scene;
pub mod traversal;
