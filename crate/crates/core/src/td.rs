//! Triple-word ("triple-double") reals.
//!
//! Used for log-magnitudes. At realistic schedule depths `log |f|` reaches
//! 1e28, and telling relative errors of 1e−6 apart there takes about 115
//! significant bits.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Unevaluated sum `hi + mid + lo` of non-overlapping binary64 words.
#[derive(Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Td {
    pub hi: f64,
    pub mid: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Exact-sum renormalisation of up to six words into three.
#[inline]
fn normalize<const N: usize>(mut t: [f64; N]) -> Td {
    if t.iter().any(|x| !x.is_finite()) {
        return Td::from_f64(t.iter().sum());
    }
    for start in 0..N.min(4) {
        for i in (start..N - 1).rev() {
            let (s, e) = two_sum(t[i], t[i + 1]);
            t[i] = s;
            t[i + 1] = e;
        }
    }
    let rest: f64 = if N > 3 { t[3..].iter().sum() } else { 0.0 };
    let (a0, a1) = two_sum(t[0], t[1]);
    let (a1, a2) = two_sum(a1, t[2] + rest);
    let (a0, a1) = two_sum(a0, a1);
    Td {
        hi: a0,
        mid: a1,
        lo: a2,
    }
}

impl Td {
    pub const ZERO: Td = Td {
        hi: 0.0,
        mid: 0.0,
        lo: 0.0,
    };
    pub const NEG_INFINITY: Td = Td {
        hi: f64::NEG_INFINITY,
        mid: 0.0,
        lo: 0.0,
    };

    #[inline]
    pub const fn from_f64(x: f64) -> Self {
        Td {
            hi: x,
            mid: 0.0,
            lo: 0.0,
        }
    }

    /// Rebuilds a value from its words, renormalising.
    pub fn from_words(hi: f64, mid: f64, lo: f64) -> Self {
        normalize([hi, mid, lo])
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + (self.mid + self.lo)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    #[inline]
    pub fn add_f64(self, b: f64) -> Self {
        normalize([self.hi, b, self.mid, self.lo])
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Self {
        if !self.hi.is_finite() || !b.is_finite() {
            return Td::from_f64(self.hi * b);
        }
        let (p0, e0) = two_prod(self.hi, b);
        let (p1, e1) = two_prod(self.mid, b);
        normalize([p0, p1, e0, e1, self.lo * b])
    }

    /// Product with an integer; exact up to the final renormalisation.
    #[inline]
    pub fn mul_u64(self, n: u64) -> Self {
        if n == 0 {
            return Td::ZERO;
        }
        if n <= (1u64 << 53) {
            return self.mul_f64(n as f64);
        }
        let hi_part = (n >> 32) as f64 * 4_294_967_296.0;
        let lo_part = (n & 0xffff_ffff) as f64;
        self.mul_f64(hi_part) + self.mul_f64(lo_part)
    }

    fn signum(self) -> Option<Ordering> {
        for w in [self.hi, self.mid, self.lo] {
            if w.is_nan() {
                return None;
            }
            if w != 0.0 {
                return Some(if w > 0.0 {
                    Ordering::Greater
                } else {
                    Ordering::Less
                });
            }
        }
        Some(Ordering::Equal)
    }

    pub fn max(self, other: Td) -> Td {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Td) -> Td {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn abs(self) -> Td {
        if self.signum() == Some(Ordering::Less) {
            -self
        } else {
            self
        }
    }
}

impl From<f64> for Td {
    fn from(x: f64) -> Self {
        Td::from_f64(x)
    }
}

impl Add for Td {
    type Output = Td;
    #[inline]
    fn add(self, b: Td) -> Td {
        normalize([self.hi, b.hi, self.mid, b.mid, self.lo, b.lo])
    }
}

impl Sub for Td {
    type Output = Td;
    #[inline]
    fn sub(self, b: Td) -> Td {
        self + (-b)
    }
}

impl Neg for Td {
    type Output = Td;
    #[inline]
    fn neg(self) -> Td {
        Td {
            hi: -self.hi,
            mid: -self.mid,
            lo: -self.lo,
        }
    }
}

impl PartialOrd for Td {
    fn partial_cmp(&self, other: &Td) -> Option<Ordering> {
        if !self.hi.is_finite() || !other.hi.is_finite() {
            return self.hi.partial_cmp(&other.hi);
        }
        (*self - *other).signum()
    }
}

impl fmt::Debug for Td {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Td({:e} + {:e} + {:e})", self.hi, self.mid, self.lo)
    }
}

impl fmt::Display for Td {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_f64(), f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn resolves_small_offsets_on_huge_values() {
        let big = Td::from_f64(3.0e28);
        let x = big.add_f64(LN_2).add_f64(1e-12);
        let back = (x - big).to_f64();
        assert!((back - LN_2 - 1e-12).abs() < 1e-16);
    }

    #[test]
    fn power_of_two_products_are_exact() {
        let a = Td::from_f64(1.0 / 3.0).add_f64(1e-20);
        let p = a.mul_u64(1 << 40);
        let q = p.mul_f64(1.0 / (1u64 << 40) as f64);
        assert_eq!(q, a);
    }

    #[test]
    fn integer_products_keep_the_tail() {
        let third = Td::from_f64(1.0).mul_f64(1.0 / 3.0);
        let p = third.mul_u64(3 << 40);
        assert!((p - Td::from_f64((1u64 << 40) as f64)).to_f64().abs() < 1e-3);
        let q = Td::from_f64(0.5).mul_u64(u64::MAX);
        assert_eq!(q.to_f64(), u64::MAX as f64 / 2.0);
        assert_eq!((q - Td::from_f64(2f64.powi(63))).to_f64(), -0.5);
    }

    #[test]
    fn ordering_uses_tail() {
        let a = Td::from_f64(1.0).add_f64(1e-40);
        let b = Td::from_f64(1.0).add_f64(-1e-40);
        assert!(a > b);
        assert_eq!(a.max(b), a);
        assert!(Td::NEG_INFINITY < b);
        assert_eq!(
            Td::NEG_INFINITY.partial_cmp(&Td::NEG_INFINITY),
            Some(Ordering::Equal)
        );
    }

    #[test]
    fn cancellation_is_exact() {
        let a = Td::from_f64(1.7e23).add_f64(0.123_456_789);
        let b = Td::from_f64(1.7e23);
        let d = (a - b).to_f64();
        assert!((d - 0.123_456_789).abs() < 1e-17);
    }
}
