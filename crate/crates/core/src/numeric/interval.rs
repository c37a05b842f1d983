use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::poly::Rational;

/// Closed interval with exact rational endpoints, `lo <= hi`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RatInterval {
    pub lo: Rational,
    pub hi: Rational,
}

impl RatInterval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        if lo <= hi {
            RatInterval { lo, hi }
        } else {
            RatInterval { lo: hi, hi: lo }
        }
    }

    pub fn point(x: Rational) -> Self {
        RatInterval { lo: x.clone(), hi: x }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(BigInt::from(2))
    }

    pub fn mid_f64(&self) -> f64 {
        self.mid().to_f64().unwrap_or(f64::NAN)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_f64(&self, x: f64, tol: f64) -> bool {
        let lo = self.lo.to_f64().unwrap_or(f64::NAN);
        let hi = self.hi.to_f64().unwrap_or(f64::NAN);
        lo - tol <= x && x <= hi + tol
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn add(&self, o: &RatInterval) -> RatInterval {
        RatInterval {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
        }
    }

    pub fn neg(&self) -> RatInterval {
        RatInterval {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }

    pub fn sub(&self, o: &RatInterval) -> RatInterval {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &RatInterval) -> RatInterval {
        if self.lo == self.hi && o.lo == o.hi {
            return RatInterval::point(&self.lo * &o.lo);
        }
        let c = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let mut lo = c[0].clone();
        let mut hi = c[0].clone();
        for v in &c[1..] {
            if *v < lo {
                lo = v.clone();
            }
            if *v > hi {
                hi = v.clone();
            }
        }
        RatInterval { lo, hi }
    }

    pub fn scale(&self, k: &Rational) -> RatInterval {
        RatInterval::new(&self.lo * k, &self.hi * k)
    }

    /// Whether the two closed intervals share at least one point.
    pub fn meets(&self, o: &RatInterval) -> bool {
        self.lo <= o.hi && o.lo <= self.hi
    }

    pub fn is_zero_width(&self) -> bool {
        (&self.hi - &self.lo).is_zero()
    }
}

impl fmt::Display for RatInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}
