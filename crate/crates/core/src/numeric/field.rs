//! A single real number field `Q(beta)` and exact arithmetic on its elements.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::interval::RatInterval;
use super::poly::{isolate_real_roots, rational_roots, refine_root, IntPoly, RatPoly, Rational, SturmChain, DEFAULT_ROOT_BITS};
use crate::error::{Error, Result};

/// `Q(beta)` where `beta` is the unique root of `min_poly` inside `enclosure`.
#[derive(Debug, Clone)]
pub struct NumberField {
    min_poly: IntPoly,
    modulus: RatPoly,
    squarefree: RatPoly,
    enclosure: RatInterval,
    root: f64,
}

impl NumberField {
    /// The field of rationals, presented as `Q[x]/(x)` with generator 0.
    pub fn rationals() -> Arc<NumberField> {
        let min_poly = IntPoly::from_i64(&[0, 1]);
        let modulus = min_poly.to_rat();
        Arc::new(NumberField {
            squarefree: modulus.clone(),
            modulus,
            min_poly,
            enclosure: RatInterval::point(Rational::zero()),
            root: 0.0,
        })
    }

    /// Builds a field from a monic integer polynomial and a rational interval
    /// isolating the chosen real root.
    ///
    /// Irreducibility is sanity-checked only (square-free, no rational root
    /// when the degree exceeds one).
    pub fn new(min_poly: IntPoly, enclosure: RatInterval) -> Result<Arc<NumberField>> {
        if min_poly.is_zero() || min_poly.degree() == 0 {
            return Err(Error::InvalidPolynomial("minimal polynomial must have degree >= 1".into()));
        }
        if !min_poly.is_monic() {
            return Err(Error::InvalidPolynomial(format!("{min_poly} is not monic")));
        }
        let modulus = min_poly.to_rat();
        let squarefree = modulus.squarefree_part();
        if squarefree.degree() != modulus.degree() {
            return Err(Error::InvalidPolynomial(format!("{min_poly} has repeated roots")));
        }
        if min_poly.degree() > 1 && !rational_roots(&min_poly).is_empty() {
            return Err(Error::InvalidPolynomial(format!("{min_poly} has a rational root (reducible)")));
        }
        let chain = SturmChain::new(&modulus);
        let at_lo = modulus.eval(&enclosure.lo).is_zero() as usize;
        let count = chain.count(&enclosure.lo, &enclosure.hi) + at_lo;
        if count != 1 {
            return Err(Error::InvalidPolynomial(format!(
                "enclosure {enclosure} holds {count} roots of {min_poly}, expected exactly one"
            )));
        }
        let enclosure = if at_lo == 1 {
            RatInterval::point(enclosure.lo.clone())
        } else {
            refine_root(&modulus, &enclosure, DEFAULT_ROOT_BITS)
        };
        let root = enclosure.mid_f64();
        Ok(Arc::new(NumberField {
            min_poly,
            modulus,
            squarefree,
            enclosure,
            root,
        }))
    }

    /// Field generated by the largest real root of `min_poly`.
    pub fn largest_root(min_poly: IntPoly) -> Result<Arc<NumberField>> {
        let roots = isolate_real_roots(&min_poly)?;
        let top = roots
            .last()
            .ok_or_else(|| Error::InvalidPolynomial(format!("{min_poly} has no real root")))?;
        Self::new(min_poly, top.interval.clone())
    }

    pub fn degree(&self) -> usize {
        self.min_poly.degree()
    }

    pub fn min_poly(&self) -> &IntPoly {
        &self.min_poly
    }

    pub fn enclosure(&self) -> &RatInterval {
        &self.enclosure
    }

    pub fn root_f64(&self) -> f64 {
        self.root
    }

    pub fn is_rational(&self) -> bool {
        self.degree() == 1
    }

    /// Enclosure refined to `bits` of precision; the field itself is untouched.
    pub fn refined_enclosure(&self, bits: u32) -> RatInterval {
        refine_root(&self.squarefree, &self.enclosure, bits)
    }

    pub fn same_as(&self, other: &NumberField) -> bool {
        self.min_poly == other.min_poly && self.enclosure.meets(&other.enclosure)
    }

    pub fn generator(self: &Arc<Self>) -> AlgebraicNumber {
        let d = self.degree();
        if d == 1 {
            // generator of Q[x]/(x) is the root itself
            let r = -&self.modulus.coeffs()[0];
            return AlgebraicNumber::from_rational(self, r);
        }
        let mut coords = vec![Rational::zero(); d];
        coords[1] = Rational::one();
        AlgebraicNumber {
            field: self.clone(),
            coords,
        }
    }
}

/// Element of a [`NumberField`], stored by its coordinates in the power basis
/// `1, beta, ..., beta^(d-1)`.
#[derive(Debug, Clone)]
pub struct AlgebraicNumber {
    field: Arc<NumberField>,
    coords: Vec<Rational>,
}

impl AlgebraicNumber {
    pub fn from_coords(field: &Arc<NumberField>, mut coords: Vec<Rational>) -> Result<Self> {
        if coords.len() > field.degree() {
            return Err(Error::Parse(format!(
                "{} coordinates given for a degree-{} field",
                coords.len(),
                field.degree()
            )));
        }
        coords.resize(field.degree(), Rational::zero());
        Ok(AlgebraicNumber {
            field: field.clone(),
            coords,
        })
    }

    pub fn from_rational(field: &Arc<NumberField>, r: Rational) -> Self {
        let mut coords = vec![Rational::zero(); field.degree()];
        coords[0] = r;
        AlgebraicNumber {
            field: field.clone(),
            coords,
        }
    }

    pub fn from_int(field: &Arc<NumberField>, n: i64) -> Self {
        Self::from_rational(field, Rational::from_integer(BigInt::from(n)))
    }

    pub fn zero(field: &Arc<NumberField>) -> Self {
        Self::from_int(field, 0)
    }

    pub fn one(field: &Arc<NumberField>) -> Self {
        Self::from_int(field, 1)
    }

    /// Parses `p/q` (a rational) or `(c0, c1, ...)` (power-basis coordinates).
    pub fn parse(field: &Arc<NumberField>, s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some(inner) = t.strip_prefix('(').and_then(|x| x.strip_suffix(')')) {
            let coords = inner
                .split(',')
                .map(parse_rational)
                .collect::<Result<Vec<_>>>()?;
            Self::from_coords(field, coords)
        } else {
            Ok(Self::from_rational(field, parse_rational(t)?))
        }
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// The value when the element is rational (all higher coordinates zero).
    pub fn as_rational(&self) -> Option<&Rational> {
        if self.coords[1..].iter().all(|c| c.is_zero()) {
            Some(&self.coords[0])
        } else {
            None
        }
    }

    fn poly(&self) -> RatPoly {
        RatPoly::new(self.coords.clone())
    }

    fn from_poly(field: &Arc<NumberField>, p: RatPoly) -> Self {
        let r = if p.degree() >= field.degree() && !p.is_zero() {
            p.rem(&field.modulus)
        } else {
            p
        };
        let mut coords = r.coeffs().to_vec();
        coords.resize(field.degree(), Rational::zero());
        AlgebraicNumber {
            field: field.clone(),
            coords,
        }
    }

    fn check_field(&self, other: &AlgebraicNumber) {
        assert!(
            Arc::ptr_eq(&self.field, &other.field) || self.field.same_as(&other.field),
            "arithmetic across different number fields"
        );
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<AlgebraicNumber> {
        if self.is_zero() {
            return None;
        }
        if self.field.is_rational() {
            return Some(Self::from_rational(&self.field, self.coords[0].recip()));
        }
        // extended Euclid: s * a + t * m = g
        let m = self.field.modulus.clone();
        let (mut r0, mut r1) = (m, self.poly());
        let (mut s0, mut s1) = (RatPoly::zero(), RatPoly::constant(Rational::one()));
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            let s = s0.sub(&q.mul(&s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        if r0.degree() != 0 {
            return None;
        }
        let scale = Rational::one() / r0.leading();
        Some(Self::from_poly(&self.field, s0.scale(&scale)))
    }

    pub fn div(&self, other: &AlgebraicNumber) -> Option<AlgebraicNumber> {
        other.inv().map(|i| self * &i)
    }

    pub fn pow(&self, mut e: u32) -> AlgebraicNumber {
        let mut base = self.clone();
        let mut acc = Self::one(&self.field);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Rational interval enclosing the value, from the given generator enclosure.
    pub fn enclose(&self, gen: &RatInterval) -> RatInterval {
        if self.field.is_rational() {
            return RatInterval::point(self.coords[0].clone());
        }
        self.poly().eval_interval(gen)
    }

    /// Exact sign, by refining the generator enclosure until the interval
    /// evaluation excludes zero.
    pub fn sign(&self) -> i8 {
        if self.is_zero() {
            return 0;
        }
        if self.field.is_rational() {
            return super::poly::sign_of(&self.coords[0]);
        }
        let mut bits = DEFAULT_ROOT_BITS;
        let mut gen = self.field.enclosure.clone();
        loop {
            let iv = self.enclose(&gen);
            if iv.lo.is_positive() {
                return 1;
            }
            if iv.hi.is_negative() {
                return -1;
            }
            if bits >= 4096 {
                // only reachable when the declared polynomial is reducible
                let g = self.poly().gcd(&self.field.modulus);
                if g.degree() > 0 && SturmChain::new(&g.squarefree_part()).count(&gen.lo, &gen.hi) > 0 {
                    return 0;
                }
            }
            bits *= 2;
            gen = self.field.refined_enclosure(bits);
        }
    }

    pub fn to_f64(&self) -> f64 {
        let r = self.field.root;
        self.coords
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * r + c.to_f64().unwrap_or(f64::NAN))
    }

    /// Exact floor.
    pub fn floor(&self) -> BigInt {
        if self.field.is_rational() {
            return self.coords[0].floor().to_integer();
        }
        let iv = self.enclose(&self.field.enclosure);
        let lo = iv.lo.floor().to_integer();
        let hi = iv.hi.floor().to_integer();
        let mut k = hi;
        while k > lo {
            let diff = self - &Self::from_rational(&self.field, Rational::from_integer(k.clone()));
            if diff.sign() >= 0 {
                return k;
            }
            k -= 1;
        }
        lo
    }

    pub fn abs(&self) -> AlgebraicNumber {
        if self.sign() < 0 {
            -self
        } else {
            self.clone()
        }
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || Error::Parse(format!("bad rational `{t}`"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        Ok(Rational::new(n, d))
    } else if let Some((int, frac)) = t.split_once('.') {
        // terminating decimal, exact
        let neg = int.trim_start().starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        if !frac.chars().all(|c| c.is_ascii_digit()) || frac.is_empty() {
            return Err(bad());
        }
        let f: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let fr = Rational::new(f, scale);
        let ip = Rational::from_integer(int_part.abs());
        let v = ip + fr;
        Ok(if neg { -v } else { v })
    } else {
        Ok(Rational::from_integer(t.parse().map_err(|_| bad())?))
    }
}

impl PartialEq for AlgebraicNumber {
    fn eq(&self, other: &Self) -> bool {
        self.coords == other.coords
    }
}

impl Eq for AlgebraicNumber {}

impl Hash for AlgebraicNumber {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.coords.hash(state);
    }
}

impl PartialOrd for AlgebraicNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AlgebraicNumber {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.field.is_rational() {
            return self.coords[0].cmp(&other.coords[0]);
        }
        if self.coords == other.coords {
            return Ordering::Equal;
        }
        let (a, b) = (self.to_f64(), other.to_f64());
        let scale = 1.0 + a.abs().max(b.abs());
        if (a - b).abs() > 1e-9 * scale {
            return a.partial_cmp(&b).unwrap_or(Ordering::Equal);
        }
        (self - other).sign().cmp(&0)
    }
}

impl fmt::Display for AlgebraicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.as_rational() {
            return write!(f, "{r}");
        }
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl Add for &AlgebraicNumber {
    type Output = AlgebraicNumber;
    fn add(self, o: &AlgebraicNumber) -> AlgebraicNumber {
        self.check_field(o);
        AlgebraicNumber {
            field: self.field.clone(),
            coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &AlgebraicNumber {
    type Output = AlgebraicNumber;
    fn sub(self, o: &AlgebraicNumber) -> AlgebraicNumber {
        self.check_field(o);
        AlgebraicNumber {
            field: self.field.clone(),
            coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &AlgebraicNumber {
    type Output = AlgebraicNumber;
    fn mul(self, o: &AlgebraicNumber) -> AlgebraicNumber {
        self.check_field(o);
        if self.field.is_rational() {
            return AlgebraicNumber::from_rational(&self.field, &self.coords[0] * &o.coords[0]);
        }
        AlgebraicNumber::from_poly(&self.field, self.poly().mul(&o.poly()))
    }
}

impl Neg for &AlgebraicNumber {
    type Output = AlgebraicNumber;
    fn neg(self) -> AlgebraicNumber {
        AlgebraicNumber {
            field: self.field.clone(),
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for AlgebraicNumber {
            type Output = AlgebraicNumber;
            fn $m(self, o: AlgebraicNumber) -> AlgebraicNumber {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for AlgebraicNumber {
    type Output = AlgebraicNumber;
    fn neg(self) -> AlgebraicNumber {
        -&self
    }
}
