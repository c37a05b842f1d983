//! Integer and rational univariate polynomials, Sturm sequences and
//! certified real-root isolation.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::interval::RatInterval;
use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Default isolation precision in bits: intervals are refined to width at most `2^-64`.
pub const DEFAULT_ROOT_BITS: u32 = 64;

/// Polynomial with integer coefficients, constant term first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// Parses a comma-separated coefficient list, constant term first.
    pub fn parse(s: &str) -> Result<Self> {
        let coeffs = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<BigInt>()
                    .map_err(|_| Error::Parse(format!("bad integer coefficient `{}`", t.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(coeffs))
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_one()
    }

    pub fn to_rat(&self) -> RatPoly {
        RatPoly::new(self.coeffs.iter().map(|c| Rational::from_integer(c.clone())).collect())
    }

    /// Coefficients reversed: `x^d p(1/x)`.
    pub fn reversed(&self) -> IntPoly {
        let mut c = self.coeffs.clone();
        c.reverse();
        IntPoly::new(c)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.to_rat().eval(x)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + num_traits::ToPrimitive::to_f64(c).unwrap_or(f64::NAN))
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Polynomial with rational coefficients, constant term first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatPoly {
    coeffs: Vec<Rational>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn zero() -> Self {
        RatPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_interval(&self, x: &RatInterval) -> RatInterval {
        let mut acc = RatInterval::point(Rational::zero());
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(&RatInterval::point(c.clone()));
        }
        acc
    }

    /// Sign at `+inf` (`positive = true`) or `-inf`.
    fn sign_at_infinity(&self, positive: bool) -> i8 {
        if self.is_zero() {
            return 0;
        }
        let s = sign_of(&self.leading());
        if positive || self.degree().is_multiple_of(2) {
            s
        } else {
            -s
        }
    }

    pub fn derivative(&self) -> RatPoly {
        RatPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn neg(&self) -> RatPoly {
        RatPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn add(&self, other: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Rational::zero();
        RatPoly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero) + other.coeffs.get(i).unwrap_or(&zero))
                .collect(),
        )
    }

    pub fn sub(&self, other: &RatPoly) -> RatPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RatPoly) -> RatPoly {
        if self.is_zero() || other.is_zero() {
            return RatPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RatPoly::new(out)
    }

    pub fn scale(&self, k: &Rational) -> RatPoly {
        RatPoly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &RatPoly) -> (RatPoly, RatPoly) {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let mut rem = self.coeffs.clone();
        let dd = divisor.degree();
        let lead = divisor.leading();
        if self.is_zero() || self.degree() < dd {
            return (RatPoly::zero(), self.clone());
        }
        let mut quot = vec![Rational::zero(); self.degree() - dd + 1];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] / &lead;
            if !c.is_zero() {
                for (j, dc) in divisor.coeffs.iter().enumerate() {
                    rem[k + j] -= &c * dc;
                }
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (RatPoly::new(quot), RatPoly::new(rem))
    }

    pub fn rem(&self, divisor: &RatPoly) -> RatPoly {
        self.div_rem(divisor).1
    }

    pub fn monic(&self) -> RatPoly {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.leading();
        self.scale(&(Rational::one() / l))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &RatPoly) -> RatPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `self / gcd(self, self')`, monic.
    pub fn squarefree_part(&self) -> RatPoly {
        if self.degree() == 0 {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0.monic()
    }
}

pub(crate) fn sign_of(x: &Rational) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

/// Sturm chain of a square-free polynomial.
#[derive(Debug, Clone)]
pub struct SturmChain {
    seq: Vec<RatPoly>,
}

impl SturmChain {
    pub fn new(p: &RatPoly) -> Self {
        let mut seq = vec![p.clone(), p.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let r = seq[n - 2].rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(r.neg());
        }
        SturmChain { seq }
    }

    fn variations(signs: impl Iterator<Item = i8>) -> usize {
        let mut last = 0i8;
        let mut v = 0;
        for s in signs.filter(|&s| s != 0) {
            if last != 0 && s != last {
                v += 1;
            }
            last = s;
        }
        v
    }

    pub fn variations_at(&self, x: &Rational) -> usize {
        Self::variations(self.seq.iter().map(|p| sign_of(&p.eval(x))))
    }

    pub fn variations_at_infinity(&self, positive: bool) -> usize {
        Self::variations(self.seq.iter().map(|p| p.sign_at_infinity(positive)))
    }

    /// Number of distinct roots in `(a, b]`; requires `p(a) != 0`.
    pub fn count(&self, a: &Rational, b: &Rational) -> usize {
        self.variations_at(a).saturating_sub(self.variations_at(b))
    }

    /// Number of distinct real roots.
    pub fn count_all(&self) -> usize {
        self.variations_at_infinity(false)
            .saturating_sub(self.variations_at_infinity(true))
    }

    /// Distinct roots strictly greater than `a` (requires `p(a) != 0`).
    pub fn count_above(&self, a: &Rational) -> usize {
        self.variations_at(a)
            .saturating_sub(self.variations_at_infinity(true))
    }

    /// Distinct roots strictly less than `b` (requires `p(b) != 0`).
    pub fn count_below(&self, b: &Rational) -> usize {
        self.variations_at_infinity(false)
            .saturating_sub(self.variations_at(b))
    }
}

/// One isolated real root: a closed rational interval holding exactly one
/// distinct root, plus its multiplicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootInterval {
    pub interval: RatInterval,
    pub multiplicity: usize,
}

/// Cauchy bound: every root has modulus `< 1 + max |a_i / a_n|`.
fn cauchy_bound(p: &RatPoly) -> Rational {
    let lead = p.leading().abs();
    let m = p.coeffs()[..p.degree()]
        .iter()
        .map(|c| c.abs() / &lead)
        .fold(Rational::zero(), |a, b| if b > a { b } else { a });
    // Round up to an integer to keep bisection points short.
    Rational::from_integer((m + Rational::one()).ceil().to_integer() + 1)
}

fn half(a: &Rational, b: &Rational) -> Rational {
    (a + b) / Rational::from_integer(BigInt::from(2))
}

/// Refines an isolating interval of a simple root of the square-free `q`
/// until its width is at most `2^-bits`.
pub fn refine_root(q: &RatPoly, interval: &RatInterval, bits: u32) -> RatInterval {
    let target = Rational::new(BigInt::one(), BigInt::one() << bits);
    let (mut lo, mut hi) = (interval.lo.clone(), interval.hi.clone());
    if lo == hi {
        return interval.clone();
    }
    let mut slo = sign_of(&q.eval(&lo));
    if slo == 0 {
        return RatInterval::point(lo);
    }
    if sign_of(&q.eval(&hi)) == 0 {
        return RatInterval::point(hi);
    }
    while &hi - &lo > target {
        let mid = half(&lo, &hi);
        let sm = sign_of(&q.eval(&mid));
        if sm == 0 {
            return RatInterval::point(mid);
        }
        if sm == slo {
            lo = mid;
            slo = sm;
        } else {
            hi = mid;
        }
    }
    RatInterval::new(lo, hi)
}

/// Isolates every distinct real root of `poly` to width at most `2^-bits`.
///
/// Intervals are returned in increasing order, pairwise disjoint; the
/// square-free part changes sign across each non-degenerate interval.
pub fn isolate_real_roots_with(poly: &IntPoly, bits: u32) -> Result<Vec<RootInterval>> {
    if poly.is_zero() {
        return Err(Error::DegenerateInput("zero polynomial".into()));
    }
    let p = poly.to_rat();
    if p.degree() == 0 {
        return Ok(Vec::new());
    }
    let q = p.squarefree_part();
    let chain = SturmChain::new(&q);
    let bound = cauchy_bound(&q);
    let mut raw: Vec<RatInterval> = Vec::new();
    // (lo, hi] with q(lo) != 0
    let mut stack = vec![(-bound.clone(), bound)];
    while let Some((lo, hi)) = stack.pop() {
        let n = chain.count(&lo, &hi);
        if n == 0 {
            continue;
        }
        if n == 1 {
            raw.push(RatInterval::new(lo, hi));
            continue;
        }
        let mid = half(&lo, &hi);
        if q.eval(&mid).is_zero() {
            raw.push(RatInterval::point(mid.clone()));
            // shrink the left part until the exact root is alone in (mid - d, mid]
            let mut d = (&mid - &lo) / Rational::from_integer(BigInt::from(2));
            while chain.count(&(&mid - &d), &mid) > 1 || q.eval(&(&mid - &d)).is_zero() {
                d /= Rational::from_integer(BigInt::from(2));
            }
            stack.push((lo, &mid - &d));
            stack.push((mid, hi));
        } else {
            stack.push((lo, mid.clone()));
            stack.push((mid, hi));
        }
    }
    raw.sort_by(|a, b| a.lo.cmp(&b.lo));

    // multiplicities from the chain gcd(p, p'), gcd of that with its derivative, ...
    let mut gcd_chain = Vec::new();
    let mut g = p.gcd(&p.derivative());
    while g.degree() > 0 {
        let next = g.gcd(&g.derivative());
        gcd_chain.push(SturmChain::new(&g.squarefree_part()));
        g = next;
    }

    let mut out = Vec::with_capacity(raw.len());
    for iv in raw {
        let refined = refine_root(&q, &iv, bits);
        let mut mult = 1;
        for sc in &gcd_chain {
            let hit = if refined.lo == refined.hi {
                sc.seq[0].eval(&refined.lo).is_zero()
            } else {
                sc.count(&refined.lo, &refined.hi) > 0
            };
            if hit {
                mult += 1;
            } else {
                break;
            }
        }
        out.push(RootInterval {
            interval: refined,
            multiplicity: mult,
        });
    }
    Ok(out)
}

/// Root isolation at the default precision.
pub fn isolate_real_roots(poly: &IntPoly) -> Result<Vec<RootInterval>> {
    isolate_real_roots_with(poly, DEFAULT_ROOT_BITS)
}

/// Rational roots by the rational-root test (distinct, sorted).
pub fn rational_roots(poly: &IntPoly) -> Vec<Rational> {
    if poly.is_zero() {
        return Vec::new();
    }
    let mut coeffs = poly.coeffs().to_vec();
    let mut roots = Vec::new();
    // strip factor x
    let mut has_zero = false;
    while coeffs.first().is_some_and(|c| c.is_zero()) {
        coeffs.remove(0);
        has_zero = true;
    }
    if has_zero {
        roots.push(Rational::zero());
    }
    if coeffs.len() <= 1 {
        return roots;
    }
    let p = IntPoly::new(coeffs);
    let a0 = p.coeffs()[0].abs();
    let an = p.leading().abs();
    let divisors = |n: &BigInt| -> Vec<BigInt> {
        let mut ds = Vec::new();
        let mut i = BigInt::one();
        while &i * &i <= *n {
            if (n % &i).is_zero() {
                ds.push(i.clone());
                let other = n / &i;
                if other != i {
                    ds.push(other);
                }
            }
            i += 1;
        }
        ds
    };
    let rp = p.to_rat();
    for num in divisors(&a0) {
        for den in divisors(&an) {
            if !num.gcd(&den).is_one() {
                continue;
            }
            for s in [1i32, -1] {
                let r = Rational::new(&num * BigInt::from(s), den.clone());
                if rp.eval(&r).is_zero() && !roots.contains(&r) {
                    roots.push(r);
                }
            }
        }
    }
    roots.sort();
    roots
}
