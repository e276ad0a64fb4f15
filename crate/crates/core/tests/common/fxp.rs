//! Arbitrary-precision model of the fixed-point formats.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use quantrace::fxp::{FixedP, FxpError, Rounding, MAX_BITS};
use rand::Rng;

pub fn exact(x: &FixedP) -> BigRational {
    BigRational::new(BigInt::from(x.val()), BigInt::one() << x.q())
}

pub fn pow2(n: u32) -> BigRational {
    BigRational::from_integer(BigInt::one() << n)
}

/// Raw value of `v` at `q` fractional bits with the given rounding.
pub fn round_at(v: &BigRational, q: u32, mode: Rounding) -> BigInt {
    let s = v * pow2(q);
    match mode {
        Rounding::Floor => s.floor().to_integer(),
        Rounding::Ceil => s.ceil().to_integer(),
        Rounding::TowardZero => s.trunc().to_integer(),
        Rounding::Nearest => (s + BigRational::new(BigInt::one(), BigInt::from(2))).floor().to_integer(),
    }
}

pub fn fits(raw: &BigInt, r: u32, q: u32) -> bool {
    let lim = BigInt::one() << (r + q);
    raw >= &-lim.clone() && raw < &lim
}

pub fn random_fixed(rng: &mut impl Rng, max_r: u32, max_q: u32) -> FixedP {
    let r = rng.random_range(0..=max_r);
    let q = rng.random_range(0..=max_q);
    let lim = 1i128 << (r + q);
    // bias toward the ends of the range and toward small values
    let val = match rng.random_range(0..4) {
        0 => rng.random_range(-lim..lim),
        1 => lim - 1 - rng.random_range(0..lim.min(4)),
        2 => -lim + rng.random_range(0..lim.min(4)),
        _ => rng.random_range(-lim.min(16)..lim.min(16)),
    };
    FixedP::new(val, r, q).unwrap()
}

/// Random add/sub/mul/div/div_to cases checked against exact rationals,
/// result formats included. Returns `(checked, rejected)`.
pub fn op_suite(n: u32, seed: u64) -> (u32, u32) {
    let mut rng = super::rng(seed);
    let (mut ok, mut rejected) = (0u32, 0u32);
    for i in 0..n {
        let (a, b) = match i % 5 {
            0..=2 => (random_fixed(&mut rng, 40, 40), random_fixed(&mut rng, 40, 40)),
            _ => (random_fixed(&mut rng, 30, 30), random_fixed(&mut rng, 30, 30)),
        };
        let (ea, eb) = (exact(&a), exact(&b));
        match i % 5 {
            0 => {
                let s = a.add(&b).unwrap();
                assert_eq!((s.r(), s.q()), (a.r().max(b.r()) + 1, a.q().max(b.q())));
                assert_eq!(exact(&s), &ea + &eb, "{a:?} + {b:?}");
                ok += 1;
            }
            1 => {
                let s = a.sub(&b).unwrap();
                assert_eq!((s.r(), s.q()), (a.r().max(b.r()) + 1, a.q().max(b.q())));
                assert_eq!(exact(&s), &ea - &eb, "{a:?} - {b:?}");
                ok += 1;
            }
            2 => match a.mul(&b) {
                Ok(p) => {
                    assert_eq!((p.r(), p.q()), (a.r() + b.r(), a.q() + b.q()));
                    assert_eq!(exact(&p), &ea * &eb, "{a:?} * {b:?}");
                    ok += 1;
                }
                Err(FxpError::MostNegative) => {
                    assert!(a.val() == -(1i128 << (a.r() + a.q())) || b.val() == -(1i128 << (b.r() + b.q())));
                    rejected += 1;
                }
                Err(FxpError::Overflow { .. }) => {
                    assert!(a.r() + b.r() + a.q() + b.q() > MAX_BITS);
                    rejected += 1;
                }
                Err(e) => panic!("{a:?} * {b:?}: {e}"),
            },
            3 => {
                if b.is_zero() {
                    assert_eq!(a.div(&b), Err(FxpError::DivideByZero));
                    continue;
                }
                let (r, q) = (a.r() + b.q(), b.r() + a.q());
                let want = round_at(&(&ea / &eb), q, Rounding::TowardZero);
                match a.div(&b) {
                    Ok(d) => {
                        assert_eq!((d.r(), d.q()), (r, q));
                        assert_eq!(BigInt::from(d.val()), want, "{a:?} / {b:?}");
                        // representable quotients are exact
                        if (&ea / &eb * pow2(q)).is_integer() {
                            assert_eq!(exact(&d), &ea / &eb);
                        }
                        ok += 1;
                    }
                    Err(FxpError::OutOfRange { .. }) => {
                        assert!(!fits(&want, r, q), "{a:?} / {b:?} rejected but fits");
                        rejected += 1;
                    }
                    Err(e) => panic!("{a:?} / {b:?}: {e}"),
                }
            }
            _ => {
                if b.is_zero() {
                    continue;
                }
                let mode =
                    [Rounding::Floor, Rounding::Ceil, Rounding::TowardZero, Rounding::Nearest][rng.random_range(0..4)];
                let q_out = rng.random_range(0..=24);
                let want = round_at(&(&ea / &eb), q_out, mode);
                match a.div_to(&b, q_out, mode) {
                    Ok(d) => {
                        assert_eq!((d.r(), d.q()), (a.r() + b.q() + 1, q_out));
                        assert_eq!(BigInt::from(d.val()), want, "{a:?} / {b:?} at {q_out} {mode:?}");
                        ok += 1;
                    }
                    Err(e) => panic!("{a:?} / {b:?} at {q_out}: {e}"),
                }
            }
        }
    }
    (ok, rejected)
}
