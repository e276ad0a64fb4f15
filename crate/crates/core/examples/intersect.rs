//! One ray against one triangle with the exact fixed-point kernel and the
//! `f32` reference.

use glam::Vec3;
use quantrace::fxp::FxVec3;
use quantrace::isect::{
    precision_requirements, ray_tri_fixed, ray_tri_float, BitTracker, FloatRay, FxRay, FxTriangle, Sidedness,
    MAX_T_RAW, T_Q,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Triangle on integer grid points, ray with 8 fractional origin bits and
    // 10 fractional direction bits.
    let tri = FxTriangle::from_points([[0, 0, 40], [200, 0, 40], [0, 200, 40]], 24)?;
    let origin = FxVec3::from_raw([50 << 8, 60 << 8, 0], 16, 8)?;
    let dir = FxVec3::from_raw([0, 0, 1 << 10], 1, 10)?;
    let ray = FxRay::new(origin, dir, MAX_T_RAW)?;

    let mut tracker = BitTracker::default();
    let hit = ray_tri_fixed(&ray, &tri, 7, Sidedness::TwoSided, Some(&mut tracker)).expect("hit");
    println!("fixed: t = {} (raw {}), id {}", f64::from(hit.t) / f64::from(1 << T_Q), hit.t, hit.id);

    let ftri = [Vec3::new(0.0, 0.0, 40.0), Vec3::new(200.0, 0.0, 40.0), Vec3::new(0.0, 200.0, 40.0)];
    let fh = ray_tri_float(&FloatRay::new(Vec3::new(50.0, 60.0, 0.0), Vec3::Z), &ftri, 7, Sidedness::TwoSided);
    println!("float: t = {:?}", fh.map(|h| h.t));

    let req = precision_requirements(16, 8, 1, 10, 24, 0);
    println!("bits used per stage {:?}, formats {:?}", tracker.used, tracker.format);
    println!("required {:?}, within: {}", (1..=4).map(|k| req.bits(k)).collect::<Vec<_>>(), tracker.within(&req));
    Ok(())
}
