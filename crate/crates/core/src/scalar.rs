//! Scalar arithmetic in the two precision modes.
//!
//! Exact mode works in arbitrary-precision rationals and is used by the
//! enumeration proofs (maximal inequality, equidistribution, the sign/selector
//! identities), where every comparison must be exact.  Float mode backs the
//! sampled experiments.  A value never changes mode: vectors, functionals and
//! series fix their precision at construction and all arithmetic stays inside
//! one variant.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;

/// Arithmetic mode of a space and everything built over it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    Float64,
    Exact,
}

/// A number in one fixed precision mode.
#[derive(Clone, Debug)]
pub enum Scalar {
    Rat(BigRational),
    F64(f64),
}

impl Scalar {
    pub fn zero(p: Precision) -> Self {
        match p {
            Precision::Exact => Scalar::Rat(BigRational::zero()),
            Precision::Float64 => Scalar::F64(0.0),
        }
    }

    pub fn from_int(p: Precision, v: i64) -> Self {
        match p {
            Precision::Exact => Scalar::Rat(BigRational::from_integer(BigInt::from(v))),
            Precision::Float64 => Scalar::F64(v as f64),
        }
    }

    /// p/q in the requested mode.  `q` must be nonzero.
    pub fn ratio(p: Precision, num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        match p {
            Precision::Exact => {
                Scalar::Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
            }
            Precision::Float64 => Scalar::F64(num as f64 / den as f64),
        }
    }

    pub fn from_rational(p: Precision, r: &BigRational) -> Self {
        match p {
            Precision::Exact => Scalar::Rat(r.clone()),
            Precision::Float64 => Scalar::F64(ratio_to_f64(r)),
        }
    }

    pub fn precision(&self) -> Precision {
        match self {
            Scalar::Rat(_) => Precision::Exact,
            Scalar::F64(_) => Precision::Float64,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::F64(x) => *x == 0.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_negative(),
            Scalar::F64(x) => *x < 0.0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Rat(r) => ratio_to_f64(r),
            Scalar::F64(x) => *x,
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            (Scalar::F64(a), Scalar::F64(b)) => Scalar::F64(a + b),
            _ => panic!("precision mix in scalar add"),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a - b),
            (Scalar::F64(a), Scalar::F64(b)) => Scalar::F64(a - b),
            _ => panic!("precision mix in scalar sub"),
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            (Scalar::F64(a), Scalar::F64(b)) => Scalar::F64(a * b),
            _ => panic!("precision mix in scalar mul"),
        }
    }

    pub fn div(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => {
                assert!(!b.is_zero(), "division by zero");
                Scalar::Rat(a / b)
            }
            (Scalar::F64(a), Scalar::F64(b)) => Scalar::F64(a / b),
            _ => panic!("precision mix in scalar div"),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rat(a) => Scalar::Rat(-a),
            Scalar::F64(a) => Scalar::F64(-a),
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Rat(a) => Scalar::Rat(a.abs()),
            Scalar::F64(a) => Scalar::F64(a.abs()),
        }
    }

    pub fn sq(&self) -> Scalar {
        self.mul(self)
    }

    pub fn scale_int(&self, k: i64) -> Scalar {
        match self {
            Scalar::Rat(a) => Scalar::Rat(a * BigRational::from_integer(BigInt::from(k))),
            Scalar::F64(a) => Scalar::F64(a * k as f64),
        }
    }

    /// Total order within one mode; mixing modes is a bug.
    pub fn cmp_same(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => a.cmp(b),
            (Scalar::F64(a), Scalar::F64(b)) => a.total_cmp(b),
            _ => panic!("precision mix in scalar compare"),
        }
    }

    pub fn max_same(self, other: Scalar) -> Scalar {
        if self.cmp_same(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rat(r) => Some(r),
            Scalar::F64(_) => None,
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => a == b,
            (Scalar::F64(a), Scalar::F64(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(r) => write!(f, "{r}"),
            Scalar::F64(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Scalar::Rat(r) => serializer.serialize_str(&r.to_string()),
            Scalar::F64(x) => serializer.serialize_f64(*x),
        }
    }
}

/// BigRational -> f64 without precision surprises on huge numerators.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::MAX);
        let d = r.denom().to_f64().unwrap_or(f64::MAX);
        n / d
    })
}

/// Parses "p/q", a plain integer, or a finite decimal into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.trim().parse().ok()?;
        let d: BigInt = b.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let negative = int_part.trim_start().starts_with('-');
        let i: BigInt = if int_part.is_empty() || int_part == "-" {
            BigInt::zero()
        } else {
            int_part.parse().ok()?
        };
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let f: BigInt = frac_part.parse().ok()?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let frac = BigRational::new(f, scale);
        let int = BigRational::from_integer(i.clone());
        return Some(if negative { int - frac } else { int + frac });
    }
    let n: BigInt = s.parse().ok()?;
    Some(BigRational::from_integer(n))
}

/// Exact square root when `r` is a perfect rational square.
pub fn exact_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer();
    let d = r.denom();
    let sn = n.sqrt();
    let sd = d.sqrt();
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        Some(BigRational::new(sn, sd))
    } else {
        None
    }
}

/// floor(2^t * sqrt(r)) / 2^t for r >= 0: a dyadic lower bound on sqrt(r).
pub fn dyadic_floor_sqrt(r: &BigRational, t: u32) -> BigRational {
    assert!(!r.is_negative(), "negative radicand");
    let four_t = BigInt::from(1u8) << (2 * t);
    let scaled = (r.numer() * four_t) / r.denom();
    let root = scaled.sqrt();
    BigRational::new(root, BigInt::from(1u8) << t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn arithmetic_stays_in_mode() {
        let a = Scalar::ratio(Precision::Exact, 1, 3);
        let b = Scalar::ratio(Precision::Exact, 1, 6);
        assert_eq!(a.add(&b), Scalar::Rat(rat(1, 2)));
        assert_eq!(a.mul(&b), Scalar::Rat(rat(1, 18)));
        assert_eq!(a.sub(&b), Scalar::Rat(rat(1, 6)));

        let x = Scalar::ratio(Precision::Float64, 1, 4);
        let y = Scalar::ratio(Precision::Float64, 1, 4);
        assert_eq!(x.add(&y).to_f64(), 0.5);
    }

    #[test]
    #[should_panic(expected = "precision mix")]
    fn mixing_modes_panics() {
        let a = Scalar::from_int(Precision::Exact, 1);
        let b = Scalar::from_int(Precision::Float64, 1);
        let _ = a.add(&b);
    }

    #[test]
    fn parse_rational_forms() {
        assert_eq!(parse_rational("3/4"), Some(rat(3, 4)));
        assert_eq!(parse_rational("-7"), Some(rat(-7, 1)));
        assert_eq!(parse_rational("0.25"), Some(rat(1, 4)));
        assert_eq!(parse_rational("-1.5"), Some(rat(-3, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    #[test]
    fn exact_sqrt_detects_squares() {
        assert_eq!(exact_sqrt(&rat(25, 1)), Some(rat(5, 1)));
        assert_eq!(exact_sqrt(&rat(9, 16)), Some(rat(3, 4)));
        assert_eq!(exact_sqrt(&rat(2, 1)), None);
        assert_eq!(exact_sqrt(&rat(-4, 1)), None);
    }

    #[test]
    fn dyadic_sqrt_is_lower_bound() {
        for (n, d) in [(2i64, 1i64), (3, 7), (25, 1), (1, 3)] {
            let r = rat(n, d);
            for t in [0u32, 4, 16, 40] {
                let s = dyadic_floor_sqrt(&r, t);
                assert!(&s * &s <= r, "floor sqrt must not overshoot");
                let step = rat(1, 1) / BigRational::from_integer(BigInt::from(1u8) << t);
                let s_up = &s + &step;
                assert!(&s_up * &s_up > r, "floor sqrt off by more than one step");
            }
        }
    }
}
