//! Exact rational with an `i64` fast path, used inside the simplex tableau.
//!
//! Values that fit in `Ratio<i64>` stay there; an operation that would
//! overflow is redone in `BigRational` and the result is demoted again
//! when it fits. `i64::MIN` is never stored as a numerator so negation and
//! absolute value cannot overflow.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};

use crate::Rational;

#[derive(Clone, Debug)]
pub(crate) enum Q {
    Small(Ratio<i64>),
    Big(Rational),
}

impl Q {
    pub fn zero() -> Self {
        Q::Small(Ratio::from_integer(0))
    }

    pub fn one() -> Self {
        Q::Small(Ratio::from_integer(1))
    }

    fn small(r: Ratio<i64>) -> Self {
        if *r.numer() == i64::MIN {
            Q::Big(big(&r))
        } else {
            Q::Small(r)
        }
    }

    fn demote(r: Rational) -> Self {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) if n != i64::MIN => Q::Small(Ratio::new_raw(n, d)),
            _ => Q::Big(r),
        }
    }

    pub fn from_rational(r: &Rational) -> Self {
        Q::demote(r.clone())
    }

    pub fn to_rational(&self) -> Rational {
        match self {
            Q::Small(r) => big(r),
            Q::Big(r) => r.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Q::Small(r) => r.is_zero(),
            Q::Big(r) => r.is_zero(),
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Q::Small(r) => r.is_positive(),
            Q::Big(r) => r.is_positive(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Q::Small(r) => r.is_negative(),
            Q::Big(r) => r.is_negative(),
        }
    }

    pub fn abs(&self) -> Self {
        match self {
            Q::Small(r) => Q::Small(r.abs()),
            Q::Big(r) => Q::Big(r.abs()),
        }
    }

    pub fn recip(&self) -> Self {
        match self {
            Q::Small(r) => Q::Small(r.recip()),
            Q::Big(r) => Q::demote(r.recip()),
        }
    }

    /// `self -= a * b`, the tableau update.
    pub fn sub_mul(&mut self, a: &Q, b: &Q) {
        if let (Q::Small(x), Q::Small(a), Q::Small(b)) = (&*self, a, b) {
            if let Some(r) = small_sub_mul(x, a, b) {
                *self = r;
                return;
            }
        }
        *self = &*self - &(a * b);
    }
}

/// `x - a * b` in `i128`, `None` on overflow.
fn small_sub_mul(x: &Ratio<i64>, a: &Ratio<i64>, b: &Ratio<i64>) -> Option<Q> {
    let (xn, xd) = (*x.numer() as i128, *x.denom() as i128);
    let (an, ad) = (*a.numer() as i128, *a.denom() as i128);
    let (bn, bd) = (*b.numer() as i128, *b.denom() as i128);
    let (pn, pd) = (an * bn, ad * bd);
    let (numer, denom) = if xd == 1 && pd == 1 {
        (xn.checked_sub(pn)?, 1)
    } else {
        let g = xd.gcd(&pd);
        let denom = (xd / g).checked_mul(pd)?;
        let numer = xn.checked_mul(pd / g)?.checked_sub(pn.checked_mul(xd / g)?)?;
        let h = numer.gcd(&denom);
        if h == 0 {
            (0, 1)
        } else {
            (numer / h, denom / h)
        }
    };
    match (i64::try_from(numer), i64::try_from(denom)) {
        (Ok(n), Ok(d)) if n != i64::MIN => Some(Q::Small(Ratio::new_raw(n, d))),
        _ => None,
    }
}

fn big(r: &Ratio<i64>) -> Rational {
    Rational::new_raw(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

macro_rules! binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&Q> for &Q {
            type Output = Q;

            fn $method(self, rhs: &Q) -> Q {
                if let (Q::Small(a), Q::Small(b)) = (self, rhs) {
                    if let Some(r) = a.$checked(b) {
                        return Q::small(r);
                    }
                }
                Q::demote(self.to_rational().$method(rhs.to_rational()))
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);
binop!(Div, div, checked_div);

impl Neg for &Q {
    type Output = Q;

    fn neg(self) -> Q {
        match self {
            Q::Small(r) => Q::Small(-r),
            Q::Big(r) => Q::Big(-r),
        }
    }
}

impl PartialEq for Q {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Q {}

impl PartialOrd for Q {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Q {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Q::Small(a), Q::Small(b)) => a.cmp(b),
            _ => self.to_rational().cmp(&other.to_rational()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio;

    fn q(a: i64, b: i64) -> Q {
        Q::from_rational(&ratio(a, b))
    }

    #[test]
    fn small_arithmetic() {
        assert_eq!((&q(1, 2) + &q(1, 3)).to_rational(), ratio(5, 6));
        assert_eq!((&q(1, 2) - &q(1, 3)).to_rational(), ratio(1, 6));
        assert_eq!((&q(2, 3) * &q(3, 4)).to_rational(), ratio(1, 2));
        assert_eq!((&q(2, 3) / &q(4, 3)).to_rational(), ratio(1, 2));
        assert!(matches!(&q(1, 2) + &q(1, 2), Q::Small(_)));
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let huge = q(i64::MAX, 1);
        let sum = &huge + &huge;
        assert!(matches!(sum, Q::Big(_)));
        assert_eq!(sum.to_rational(), ratio(i64::MAX, 1) * ratio(2, 1));
        let back = &sum - &huge;
        assert!(matches!(back, Q::Small(_)));
        assert_eq!(back, huge);
        let min = &q(-i64::MAX, 1) - &q(1, 1);
        assert!(matches!(min, Q::Big(_)));
        assert_eq!((-&min).to_rational(), ratio(i64::MAX, 1) + ratio(1, 1));
    }

    #[test]
    fn ordering_across_representations() {
        let big = &q(i64::MAX, 1) + &q(1, 1);
        assert!(q(i64::MAX, 1) < big);
        assert!(-&big < q(-i64::MAX, 1));
        let mut x = q(1, 1);
        x.sub_mul(&q(1, 2), &q(1, 3));
        assert_eq!(x, q(5, 6));
        let mut y = q(3, 4);
        y.sub_mul(&q(3, 2), &q(1, 2));
        assert!(y.is_zero());
        let mut z = q(i64::MAX, 1);
        z.sub_mul(&q(-i64::MAX, 1), &q(i64::MAX, 1));
        let want = ratio(i64::MAX, 1) + ratio(i64::MAX, 1) * ratio(i64::MAX, 1);
        assert_eq!(z.to_rational(), want);
    }
}
