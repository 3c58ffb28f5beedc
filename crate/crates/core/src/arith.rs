//! Exact arithmetic helpers shared by every module.
//!
//! Public values are [`Rational`] (arbitrary precision). Hot enumeration loops
//! rescale their inputs to a common denominator and run over `i128` when the
//! scaled magnitudes provably fit, falling back to [`Rational`] otherwise.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Scalar types the enumeration kernels are generic over.
pub(crate) trait Scalar: Clone + Ord + Num + Debug {}
impl<T: Clone + Ord + Num + Debug> Scalar for T {}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `N`, `N/D` or a finite decimal such as `0.25`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parameter(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.trim_start().starts_with('-');
        let whole: BigInt = if whole.is_empty() || whole == "-" {
            BigInt::zero()
        } else {
            whole.parse().map_err(|_| bad())?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac: BigInt = frac.parse().map_err(|_| bad())?;
        let mag = whole.abs() * &scale + frac;
        let num = if negative { -mag } else { mag };
        return Ok(Rational::new(num, scale));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Least common multiple of the denominators (1 for an empty input).
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Multiplies every value by `scale` and returns the integer results when
/// they are integral and fit in an `i128`.
pub(crate) fn scaled_i128(values: &[Rational], scale: &BigInt) -> Option<Vec<i128>> {
    let scale = Rational::from_integer(scale.clone());
    values
        .iter()
        .map(|v| {
            let s = v * &scale;
            if s.is_integer() {
                s.to_integer().to_i128()
            } else {
                None
            }
        })
        .collect()
}

pub(crate) fn from_scaled(value: i128, scale: &BigInt) -> Rational {
    Rational::new(BigInt::from(value), scale.clone())
}

/// Upper bound on magnitudes we let the `i128` kernels handle.
pub(crate) fn fits_budget(bound: &BigInt) -> bool {
    bound.bits() <= 110
}

pub fn pow_saturating(base: u128, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}

pub fn rational_pow(base: &Rational, exp: usize) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

/// Renders a rational as `n/d` (or `n` when integral).
pub fn show(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Visits every vector `v` with `v[i] < radix[i]` in lexicographic order
/// (last coordinate fastest). Stops early when `visit` returns `false`.
pub(crate) fn odometer(radix: &[usize], mut visit: impl FnMut(&[usize]) -> bool) {
    if radix.contains(&0) {
        return;
    }
    let mut digits = vec![0usize; radix.len()];
    loop {
        if !visit(&digits) {
            return;
        }
        let mut i = radix.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < radix[i] {
                break;
            }
            digits[i] = 0;
        }
    }
}

pub(crate) fn check_cap(what: &'static str, needed: u128, cap: u128) -> Result<()> {
    if needed > cap {
        Err(Error::TooLarge { what, needed, cap })
    } else {
        Ok(())
    }
}
