//! Exact fixed-point arithmetic and octahedral directions.

use glam::DVec3;
use quantrace::fxp::{cross3, dot3, FixedP, FxVec3, OctDir32, Rounding, OCT_MAX_ANGLE_ERROR};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = FixedP::from_f64(3.25, 4, 8, Rounding::Nearest)?;
    let b = FixedP::from_f64(-1.5, 2, 8, Rounding::Nearest)?;
    for (name, v) in [("a + b", a.add(&b)?), ("a * b", a.mul(&b)?), ("a / b", b.div_to(&a, 12, Rounding::Floor)?)] {
        println!("{name:6} = {:>12.6}  R={:<3} Q={}", v.to_f64(), v.r(), v.q());
    }

    let e1 = FxVec3::from_ints([4, 0, 0], 8)?;
    let e2 = FxVec3::from_ints([0, 3, 1], 8)?;
    let n = cross3(&e1, &e2)?;
    println!("cross = {:?}, dot with e1 = {}", n.to_f64(), dot3(&n, &e1)?.to_f64());

    let d = DVec3::new(0.3, -0.8, 0.52).normalize();
    let oct = OctDir32::encode(d)?;
    let back = oct.decode_f64();
    println!(
        "oct {:#010x}: angle error {:.2e} rad (bound {OCT_MAX_ANGLE_ERROR:.0e})",
        oct.packed(),
        d.angle_between(back)
    );
    Ok(())
}
