//! Exact scalar arithmetic for the simplex: a checked 128-bit rational for
//! speed, falling back to arbitrary precision when anything overflows.

use std::cmp::Ordering;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Field operations that may fail on overflow. The big-rational
/// implementation never fails; the fixed-width one reports `None` so the
/// caller can retry the whole solve exactly.
pub trait LpScalar: Clone + PartialEq + Debug {
    fn zero_val() -> Self;
    fn one_val() -> Self;
    fn from_big(r: &BigRational) -> Option<Self>;
    fn to_big(&self) -> BigRational;
    fn try_add(&self, other: &Self) -> Option<Self>;
    fn try_sub(&self, other: &Self) -> Option<Self>;
    fn try_mul(&self, other: &Self) -> Option<Self>;
    fn try_div(&self, other: &Self) -> Option<Self>;
    fn neg_val(&self) -> Self;
    fn is_zero_val(&self) -> bool;
    fn is_positive_val(&self) -> bool;
    fn is_negative_val(&self) -> bool {
        !self.is_zero_val() && !self.is_positive_val()
    }
    fn try_cmp(&self, other: &Self) -> Option<Ordering>;
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Reduced fraction over `i128` with a positive denominator.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Q128 {
    num: i128,
    den: i128,
}

impl Q128 {
    fn reduce(num: i128, den: i128) -> Option<Q128> {
        if den == 0 || num == i128::MIN || den == i128::MIN {
            return None;
        }
        let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
        if num == 0 {
            return Some(Q128 { num: 0, den: 1 });
        }
        let g = gcd_u128(num.unsigned_abs(), den.unsigned_abs()) as i128;
        Some(Q128 {
            num: num / g,
            den: den / g,
        })
    }
}

impl LpScalar for Q128 {
    fn zero_val() -> Self {
        Q128 { num: 0, den: 1 }
    }

    fn one_val() -> Self {
        Q128 { num: 1, den: 1 }
    }

    fn from_big(r: &BigRational) -> Option<Self> {
        let num = r.numer().to_i128()?;
        let den = r.denom().to_i128()?;
        Q128::reduce(num, den)
    }

    fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(self.den))
    }

    fn try_add(&self, other: &Self) -> Option<Self> {
        // a/b + c/d with g = gcd(b, d) kept out of the products.
        let g = gcd_u128(self.den.unsigned_abs(), other.den.unsigned_abs()) as i128;
        let lhs = self.num.checked_mul(other.den / g)?;
        let rhs = other.num.checked_mul(self.den / g)?;
        let num = lhs.checked_add(rhs)?;
        let den = (self.den / g).checked_mul(other.den)?;
        Q128::reduce(num, den)
    }

    fn try_sub(&self, other: &Self) -> Option<Self> {
        self.try_add(&other.neg_val())
    }

    fn try_mul(&self, other: &Self) -> Option<Self> {
        // Cross-reduce before multiplying to keep factors small.
        let g1 = gcd_u128(self.num.unsigned_abs(), other.den.unsigned_abs()) as i128;
        let g2 = gcd_u128(other.num.unsigned_abs(), self.den.unsigned_abs()) as i128;
        let num = (self.num / g1.max(1)).checked_mul(other.num / g2.max(1))?;
        let den = (self.den / g2.max(1)).checked_mul(other.den / g1.max(1))?;
        Q128::reduce(num, den)
    }

    fn try_div(&self, other: &Self) -> Option<Self> {
        if other.num == 0 {
            return None;
        }
        self.try_mul(&Q128 {
            num: other.den,
            den: other.num,
        })
    }

    fn neg_val(&self) -> Self {
        Q128 {
            num: -self.num,
            den: self.den,
        }
    }

    fn is_zero_val(&self) -> bool {
        self.num == 0
    }

    fn is_positive_val(&self) -> bool {
        self.num > 0
    }

    fn try_cmp(&self, other: &Self) -> Option<Ordering> {
        let lhs = self.num.checked_mul(other.den)?;
        let rhs = other.num.checked_mul(self.den)?;
        Some(lhs.cmp(&rhs))
    }
}

impl LpScalar for BigRational {
    fn zero_val() -> Self {
        <BigRational as Zero>::zero()
    }

    fn one_val() -> Self {
        <BigRational as One>::one()
    }

    fn from_big(r: &BigRational) -> Option<Self> {
        Some(r.clone())
    }

    fn to_big(&self) -> BigRational {
        self.clone()
    }

    fn try_add(&self, other: &Self) -> Option<Self> {
        Some(self + other)
    }

    fn try_sub(&self, other: &Self) -> Option<Self> {
        Some(self - other)
    }

    fn try_mul(&self, other: &Self) -> Option<Self> {
        Some(self * other)
    }

    fn try_div(&self, other: &Self) -> Option<Self> {
        if other.is_zero() {
            return None;
        }
        Some(self / other)
    }

    fn neg_val(&self) -> Self {
        -self
    }

    fn is_zero_val(&self) -> bool {
        self.is_zero()
    }

    fn is_positive_val(&self) -> bool {
        self.is_positive()
    }

    fn try_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i128, d: i128) -> Q128 {
        Q128::reduce(n, d).unwrap()
    }

    #[test]
    fn q128_arithmetic_reduces() {
        assert_eq!(q(2, 4), q(1, 2));
        assert_eq!(q(1, 2).try_add(&q(1, 3)).unwrap(), q(5, 6));
        assert_eq!(q(1, 2).try_mul(&q(2, 3)).unwrap(), q(1, 3));
        assert_eq!(q(1, 2).try_div(&q(3, 4)).unwrap(), q(2, 3));
        assert_eq!(q(-4, -8), q(1, 2));
        assert!(q(1, 2).try_cmp(&q(2, 3)) == Some(Ordering::Less));
    }

    #[test]
    fn q128_overflow_reports_none() {
        let huge = q(i128::MAX / 2, 1);
        assert!(huge.try_mul(&huge).is_none());
        assert!(huge.try_add(&huge).is_none());
        assert!(q(1, 2).try_div(&q(0, 1)).is_none());
    }

    #[test]
    fn q128_round_trips_through_big() {
        let v = q(-7, 12);
        assert_eq!(Q128::from_big(&v.to_big()).unwrap(), v);
    }
}
