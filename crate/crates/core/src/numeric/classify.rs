//! Pisot / Salem classification of algebraic integers.
//!
//! Unit-circle conjugates are detected algebraically: a Salem polynomial is
//! self-reciprocal, and writing it as `x^m q(x + 1/x)` turns "conjugate on the
//! unit circle" into "real root of `q` in (-2, 2)", which Sturm counting
//! decides exactly. Strict moduli are certified with Weierstrass inclusion
//! disks around Aberth approximations.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::interval::RatInterval;
use super::poly::{isolate_real_roots, rational_roots, IntPoly, RatPoly, Rational, SturmChain};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PisotSalemClass {
    Pisot,
    Salem,
    Neither,
}

impl std::fmt::Display for PisotSalemClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PisotSalemClass::Pisot => "Pisot",
            PisotSalemClass::Salem => "Salem",
            PisotSalemClass::Neither => "Neither",
        };
        f.write_str(s)
    }
}

/// Disk `|z - center| <= radius` certified to hold exactly one root.
#[derive(Debug, Clone, Serialize)]
pub struct ConjugateEnclosure {
    pub re: f64,
    pub im: f64,
    pub radius: f64,
    pub modulus_lo: f64,
    pub modulus_hi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub class: PisotSalemClass,
    /// Exact rational enclosure of the dominant real root.
    pub dominant_lo: String,
    pub dominant_hi: String,
    pub dominant_approx: f64,
    /// Whether the polynomial is self-reciprocal.
    pub reciprocal: bool,
    /// `q` with `p(x) = x^m q(x + 1/x)`, constant term first, for reciprocal input.
    pub trace_poly: Option<Vec<String>>,
    /// Roots of `q` below -2, in (-2, 2), above 2 (reciprocal input only).
    pub trace_counts: Option<[usize; 3]>,
    /// One enclosure per conjugate other than the dominant root.
    pub conjugates: Vec<ConjugateEnclosure>,
}

fn check_input(poly: &IntPoly) -> Result<()> {
    if poly.is_zero() || poly.degree() == 0 {
        return Err(Error::InvalidPolynomial("degree must be at least one".into()));
    }
    if !poly.is_monic() {
        return Err(Error::InvalidPolynomial(format!("{poly} is not monic")));
    }
    let p = poly.to_rat();
    if p.squarefree_part().degree() != p.degree() {
        return Err(Error::InvalidPolynomial(format!("{poly} is reducible (repeated factor)")));
    }
    if poly.degree() > 1 && !rational_roots(poly).is_empty() {
        return Err(Error::InvalidPolynomial(format!("{poly} is reducible (rational root)")));
    }
    Ok(())
}

fn is_reciprocal(poly: &IntPoly) -> bool {
    let c = poly.coeffs();
    let n = c.len();
    (0..n).all(|i| c[i] == c[n - 1 - i])
}

/// `q` with `p(x) = x^m q(x + 1/x)` for a self-reciprocal `p` of degree `2m`.
fn trace_polynomial(poly: &IntPoly) -> RatPoly {
    let c = poly.to_rat();
    let m = poly.degree() / 2;
    // V_0 = 2, V_1 = y, V_{k+1} = y V_k - V_{k-1}  (x^k + x^-k in terms of y)
    let y = RatPoly::new(vec![Rational::zero(), Rational::one()]);
    let mut v_prev = RatPoly::constant(Rational::from_integer(BigInt::from(2)));
    let mut v_cur = y.clone();
    let mut q = RatPoly::constant(c.coeffs()[m].clone());
    for k in 1..=m {
        if k > 1 {
            let next = y.mul(&v_cur).sub(&v_prev);
            v_prev = v_cur;
            v_cur = next;
        }
        q = q.add(&v_cur.scale(&c.coeffs()[m + k]));
    }
    q
}

fn horner(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::zero(), |acc, &c| acc * z + c)
}

/// All complex roots by the Aberth–Ehrlich iteration.
fn aberth_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let deriv: Vec<f64> = coeffs.iter().enumerate().skip(1).map(|(i, &c)| c * i as f64).collect();
    let radius = 1.0
        + coeffs[..n]
            .iter()
            .map(|c| (c / lead).abs())
            .fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius * 0.7, 0.4 + std::f64::consts::TAU * k as f64 / n as f64))
        .collect();
    for _ in 0..2000 {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let pv = horner(coeffs, z[i]);
            let dv = horner(&deriv, z[i]);
            if pv == Complex64::zero() {
                continue;
            }
            let ratio = pv / dv;
            let sum: Complex64 = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let step = ratio / (Complex64::one() - ratio * sum);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if max_step < 1e-17 {
            break;
        }
    }
    z
}

/// Weierstrass inclusion disks: with `W_i = p(z_i) / (a_n prod_{j != i} (z_i - z_j))`,
/// the disks `|z - z_i| <= n |W_i|` cover all roots and each connected
/// component holds as many roots as disks. Rounding is absorbed by inflating.
fn inclusion_disks(coeffs: &[f64], z: &[Complex64]) -> Vec<(Complex64, f64)> {
    let n = z.len();
    let u = f64::EPSILON;
    let lead = coeffs[n].abs();
    z.iter()
        .enumerate()
        .map(|(i, &zi)| {
            let pv = horner(coeffs, zi).norm();
            let abs_sum: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c.abs() * zi.norm().powi(k as i32))
                .sum();
            let p_bound = pv + 4.0 * (n as f64 + 1.0) * u * abs_sum;
            let denom: f64 = (0..n).filter(|&j| j != i).map(|j| (zi - z[j]).norm()).product::<f64>()
                * lead
                * (1.0 - 8.0 * n as f64 * u);
            let r = n as f64 * p_bound / denom * (1.0 + 1e-9) + 4.0 * u * zi.norm();
            (zi, r)
        })
        .collect()
}

fn disks_disjoint(disks: &[(Complex64, f64)]) -> bool {
    for i in 0..disks.len() {
        for j in i + 1..disks.len() {
            if (disks[i].0 - disks[j].0).norm() <= disks[i].1 + disks[j].1 {
                return false;
            }
        }
    }
    true
}

/// Classifies the dominant real root of a monic irreducible integer polynomial.
pub fn classify_pisot_salem(poly: &IntPoly) -> Result<Classification> {
    check_input(poly)?;
    let one = Rational::one();
    let roots = isolate_real_roots(poly)?;
    let dominant = roots
        .last()
        .filter(|r| r.interval.hi > one)
        .ok_or_else(|| Error::InvalidPolynomial(format!("{poly} has no real root > 1")))?;
    let mut dom_iv: RatInterval = dominant.interval.clone();
    if dom_iv.lo <= one {
        // root > 1 lies in (1, hi]; 1 itself is not a root (irreducible)
        dom_iv = RatInterval::new(one.clone(), dom_iv.hi.clone());
    }
    let dominant_approx = dom_iv.mid_f64();

    let coeffs: Vec<f64> = poly.coeffs().iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
    let conjugates: Vec<ConjugateEnclosure> = if poly.degree() == 1 {
        Vec::new()
    } else {
        let z = aberth_roots(&coeffs);
        let disks = inclusion_disks(&coeffs, &z);
        if !disks_disjoint(&disks) {
            return Err(Error::Unsupported(format!(
                "could not separate the complex roots of {poly} in double precision"
            )));
        }
        let dom_idx = disks
            .iter()
            .enumerate()
            .min_by(|a, b| {
                let da = (a.1 .0 - Complex64::new(dominant_approx, 0.0)).norm();
                let db = (b.1 .0 - Complex64::new(dominant_approx, 0.0)).norm();
                da.total_cmp(&db)
            })
            .map(|(i, _)| i)
            .unwrap_or(0);
        disks
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != dom_idx)
            .map(|(_, &(c, r))| ConjugateEnclosure {
                re: c.re,
                im: c.im,
                radius: r,
                modulus_lo: (c.norm() - r).max(0.0),
                modulus_hi: c.norm() + r,
            })
            .collect()
    };

    let reciprocal = is_reciprocal(poly);
    let mut trace_poly = None;
    let mut trace_counts = None;
    let class = if poly.degree() == 1 {
        PisotSalemClass::Pisot
    } else if reciprocal && poly.degree() >= 4 && poly.degree().is_multiple_of(2) {
        let q = trace_polynomial(poly);
        let chain = SturmChain::new(&q.squarefree_part());
        let two = Rational::from_integer(BigInt::from(2));
        let (m2, p2) = (-two.clone(), two);
        let on_boundary = q.eval(&m2).is_zero() || q.eval(&p2).is_zero();
        let below = chain.count_below(&m2);
        let above = chain.count_above(&p2);
        let inside = chain.count(&m2, &p2);
        trace_poly = Some(q.coeffs().iter().map(|c| c.to_string()).collect());
        trace_counts = Some([below, inside, above]);
        let all_real = chain.count_all() == q.degree();
        if !on_boundary && all_real && below == 0 && above == 1 && inside >= 1 {
            PisotSalemClass::Salem
        } else {
            PisotSalemClass::Neither
        }
    } else {
        // irreducible and not self-reciprocal: no conjugate lies on the unit circle
        if conjugates.iter().all(|c| c.modulus_hi < 1.0) {
            PisotSalemClass::Pisot
        } else if conjugates.iter().any(|c| c.modulus_lo > 1.0) {
            PisotSalemClass::Neither
        } else {
            return Err(Error::Unsupported(format!(
                "a conjugate of {poly} is too close to the unit circle to certify in double precision"
            )));
        }
    };

    Ok(Classification {
        class,
        dominant_lo: dom_iv.lo.to_string(),
        dominant_hi: dom_iv.hi.to_string(),
        dominant_approx,
        reciprocal,
        trace_poly,
        trace_counts,
        conjugates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_ratio_is_pisot() {
        let c = classify_pisot_salem(&IntPoly::from_i64(&[-1, -1, 1])).unwrap();
        assert_eq!(c.class, PisotSalemClass::Pisot);
        assert_eq!(c.conjugates.len(), 1);
        assert!(c.conjugates[0].modulus_hi < 1.0);
        assert!((c.dominant_approx - 1.618_033_988_749_895).abs() < 1e-12);
    }

    #[test]
    fn lehmer_type_quartic_is_salem() {
        let c = classify_pisot_salem(&IntPoly::from_i64(&[1, -1, -1, -1, 1])).unwrap();
        assert_eq!(c.class, PisotSalemClass::Salem);
        assert!(c.reciprocal);
        assert_eq!(c.trace_counts, Some([0, 1, 1]));
        assert!((c.dominant_approx - 1.72208).abs() < 1e-5);
    }

    #[test]
    fn integers_and_quadratic_units() {
        assert_eq!(
            classify_pisot_salem(&IntPoly::from_i64(&[-2, 1])).unwrap().class,
            PisotSalemClass::Pisot
        );
        // x^2 - 3x + 1: self-reciprocal quadratic, conjugate 1/beta < 1
        assert_eq!(
            classify_pisot_salem(&IntPoly::from_i64(&[1, -3, 1])).unwrap().class,
            PisotSalemClass::Pisot
        );
        // x^3 - x - 1: smallest Pisot number
        assert_eq!(
            classify_pisot_salem(&IntPoly::from_i64(&[-1, -1, 0, 1])).unwrap().class,
            PisotSalemClass::Pisot
        );
        // x^2 - 2: conjugate -sqrt 2 has modulus > 1
        assert_eq!(
            classify_pisot_salem(&IntPoly::from_i64(&[-2, 0, 1])).unwrap().class,
            PisotSalemClass::Neither
        );
    }

    #[test]
    fn lehmer_polynomial_is_salem() {
        // Lehmer's degree-10 polynomial, Salem number ~1.17628
        let c = classify_pisot_salem(&IntPoly::from_i64(&[1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1])).unwrap();
        assert_eq!(c.class, PisotSalemClass::Salem);
        assert!((c.dominant_approx - 1.176_280_818).abs() < 1e-8);
    }

    #[test]
    fn invalid_inputs() {
        assert!(classify_pisot_salem(&IntPoly::from_i64(&[-1, 0, 2])).is_err()); // not monic
        assert!(classify_pisot_salem(&IntPoly::from_i64(&[-1, 0, 1])).is_err()); // reducible
        assert!(classify_pisot_salem(&IntPoly::from_i64(&[1, 1])).is_err()); // root -1
        assert!(classify_pisot_salem(&IntPoly::from_i64(&[1, 0, 1])).is_err()); // no real root
    }

    #[test]
    fn trace_polynomial_of_quartic() {
        let q = trace_polynomial(&IntPoly::from_i64(&[1, -1, -1, -1, 1]));
        // y^2 - y - 3
        assert_eq!(q, IntPoly::from_i64(&[-3, -1, 1]).to_rat());
    }
}
