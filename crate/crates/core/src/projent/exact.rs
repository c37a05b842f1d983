//! Exact cell masses of the projected measure for integer-base systems.
//!
//! With ratios `1/b_j` and translations `c_{ij}/D_j`, the cells
//! `F_m[k] = prod_j b_j^{-m} [k_j/D_j, (k_j+1)/D_j)` satisfy
//! `S_i(F_{m-1}[k]) = F_m[k + c_i b^m]`, so the masses at depth `m` follow from
//! those at depth `m-1` by a push along the linear representation of the
//! measure. Depth-0 masses solve a finite fixed-point system.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use super::ln_big;
use crate::coding::SymbolicMeasure;
use crate::error::{Error, Result};
use crate::ifs::{invariant_box, IfsSpec};
use crate::numeric::linalg::{solve, Solution};
use crate::numeric::Rational;

/// Largest fixed-point system solved exactly.
pub const MAX_UNIT_UNKNOWNS: usize = 900;

/// Largest number of nonzero refined cells kept at one depth.
pub const MAX_SUPPORT: usize = 4_000_000;

pub(crate) struct Lattice {
    pub dim: usize,
    pub base: Vec<i64>,
    pub denom: Vec<i64>,
    /// `digits[i][j] = a_{ij} * D_j`
    pub digits: Vec<Vec<i64>>,
    pub unit_lo: Vec<i64>,
    pub unit_hi: Vec<i64>,
}

fn small(x: &BigInt, what: &str) -> Result<i64> {
    x.to_i64()
        .ok_or_else(|| Error::Unsupported(format!("{what} too large for the exact method")))
}

/// Integer description of the system, when the exact method applies.
pub(crate) fn lattice_of(spec: &IfsSpec) -> Result<Lattice> {
    if !spec.field().is_rational() {
        return Err(Error::Unsupported("exact pushforward needs rational coefficients".into()));
    }
    let ratios = spec.shared_ratios()?;
    let mut base = Vec::new();
    for r in &ratios {
        let q = r.as_rational().expect("rational field");
        if !q.numer().is_one() {
            return Err(Error::Unsupported(format!("ratio {q} is not of the form 1/b")));
        }
        base.push(small(q.denom(), "base")?);
    }
    let mut denom = Vec::new();
    let mut digits = vec![Vec::new(); spec.alphabet()];
    for f in spec.factors() {
        let t: Vec<Rational> = f
            .translations()
            .iter()
            .map(|a| a.as_rational().expect("rational field").clone())
            .collect();
        let d = t.iter().fold(BigInt::one(), |m, x| m.lcm(x.denom()));
        for (i, x) in t.iter().enumerate() {
            digits[i].push(small(&(x * Rational::from_integer(d.clone())).to_integer(), "digit")?);
        }
        denom.push(small(&d, "denominator")?);
    }
    let b = invariant_box(spec);
    let mut unit_lo = Vec::new();
    let mut unit_hi = Vec::new();
    for ((lo, hi), d) in b.coords.iter().zip(&denom) {
        let dq = Rational::from_integer(BigInt::from(*d));
        let lo = lo.as_rational().unwrap() * &dq;
        let hi = hi.as_rational().unwrap() * &dq;
        unit_lo.push(small(&lo.floor().to_integer(), "box")?);
        unit_hi.push(small(&hi.floor().to_integer(), "box")?);
    }
    Ok(Lattice {
        dim: spec.dim(),
        base,
        denom,
        digits,
        unit_lo,
        unit_hi,
    })
}

struct Grid {
    lo: Vec<i64>,
    size: Vec<i64>,
}

impl Grid {
    fn total(&self) -> usize {
        self.size.iter().product::<i64>() as usize
    }

    fn index(&self, k: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for ((x, lo), n) in k.iter().zip(&self.lo).zip(&self.size) {
            let off = x - lo;
            if off < 0 || off >= *n {
                return None;
            }
            idx = idx * *n as usize + off as usize;
        }
        Some(idx)
    }

    fn point(&self, mut idx: usize) -> Vec<i64> {
        let mut k = vec![0; self.lo.len()];
        for c in (0..self.lo.len()).rev() {
            let n = self.size[c] as usize;
            k[c] = self.lo[c] + (idx % n) as i64;
            idx /= n;
        }
        k
    }
}

/// Solves for `nu_s(U_k)` on the unit cells meeting the invariant box.
fn unit_masses(lat: &Lattice, m: &SymbolicMeasure) -> Result<(Grid, Vec<Vec<Rational>>)> {
    let rep = m.linear_rep();
    let grid = Grid {
        lo: lat.unit_lo.clone(),
        size: lat.unit_lo.iter().zip(&lat.unit_hi).map(|(a, b)| b - a + 1).collect(),
    };
    let cells = grid.total();
    let unknowns = cells * rep.states;
    if unknowns > MAX_UNIT_UNKNOWNS {
        return Err(Error::Unsupported(format!(
            "{unknowns} unit-cell unknowns exceed the exact-solve limit"
        )));
    }
    let var = |s: usize, c: usize| s * cells + c;
    let mut a = vec![vec![Rational::zero(); unknowns]; unknowns + rep.states];
    let b_rhs: Vec<Rational> = (0..unknowns + rep.states)
        .map(|r| if r >= unknowns { Rational::one() } else { Rational::zero() })
        .collect();
    for c in 0..cells {
        let k = grid.point(c);
        for s in 0..rep.states {
            let row = var(s, c);
            a[row][row] += Rational::one();
            for t in rep.terms.iter().filter(|t| t.from == s) {
                let digit = &lat.digits[t.symbol as usize];
                // S^{-1} U_k = prod_j [ (k_j - c_j) b_j, (k_j - c_j) b_j + b_j )
                let starts: Vec<i64> = (0..lat.dim).map(|j| (k[j] - digit[j]) * lat.base[j]).collect();
                let mut offs = vec![0i64; lat.dim];
                loop {
                    let kk: Vec<i64> = starts.iter().zip(&offs).map(|(s, o)| s + o).collect();
                    if let Some(ci) = grid.index(&kk) {
                        let col = var(t.to, ci);
                        a[row][col] -= &t.weight;
                    }
                    let mut j = 0;
                    while j < lat.dim {
                        offs[j] += 1;
                        if offs[j] < lat.base[j] {
                            break;
                        }
                        offs[j] = 0;
                        j += 1;
                    }
                    if j == lat.dim {
                        break;
                    }
                }
            }
        }
    }
    for s in 0..rep.states {
        for c in 0..cells {
            a[unknowns + s][var(s, c)] = Rational::one();
        }
    }
    match solve(&a, &b_rhs) {
        Solution::Unique(x) => {
            let per_state = (0..rep.states)
                .map(|s| x[s * cells..(s + 1) * cells].to_vec())
                .collect();
            Ok((grid, per_state))
        }
        Solution::Infinite => Err(Error::NotUnique),
        Solution::Inconsistent => Err(Error::InvalidMeasure("unit-cell system is inconsistent".into())),
    }
}

/// Sparse cell table: multi-index and per-state integer numerators.
type Cells = Vec<(Vec<i64>, Vec<BigInt>)>;

fn merge_sorted(mut v: Vec<(Vec<i64>, Vec<BigInt>)>) -> Cells {
    v.par_sort_unstable_by(|a, b| a.0.cmp(&b.0));
    let mut out: Cells = Vec::with_capacity(v.len());
    for (k, vals) in v {
        match out.last_mut() {
            Some((lk, lv)) if *lk == k => {
                for (a, b) in lv.iter_mut().zip(vals) {
                    *a += b;
                }
            }
            _ => out.push((k, vals)),
        }
    }
    out
}

/// `H(pi^{-1} Q_m)` for `m = 0..=n_max`, exactly up to the final logarithms,
/// each with a bound on its floating-point error.
pub(crate) fn exact_grid_entropies(spec: &IfsSpec, m: &SymbolicMeasure, n_max: usize) -> Result<Vec<(f64, f64)>> {
    let lat = lattice_of(spec)?;
    let rep = m.linear_rep();
    let (grid, unit) = unit_masses(&lat, m)?;

    // common denominators: unit masses Q0, transition weights W, initial weights A
    let q0 = unit.iter().flatten().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let w_den = rep.terms.iter().fold(BigInt::one(), |acc, t| acc.lcm(t.weight.denom()));
    let a_den = rep.alpha.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let scale = |x: &Rational, d: &BigInt| (x * Rational::from_integer(d.clone())).to_integer();
    let alpha: Vec<BigInt> = rep.alpha.iter().map(|x| scale(x, &a_den)).collect();
    let terms: Vec<(usize, usize, usize, BigInt)> = rep
        .terms
        .iter()
        .map(|t| (t.symbol as usize, t.from, t.to, scale(&t.weight, &w_den)))
        .collect();

    let mut cells: Cells = (0..grid.total())
        .filter_map(|c| {
            let vals: Vec<BigInt> = (0..rep.states).map(|s| scale(&unit[s][c], &q0)).collect();
            vals.iter().any(|v| !v.is_zero()).then(|| (grid.point(c), vals))
        })
        .collect();
    let mut den = &a_den * &q0;
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(grid_entropy(&cells, &lat.denom, &alpha, &den));

    let mut pow: Vec<i64> = vec![1; lat.dim];
    for level in 1..=n_max {
        for (p, b) in pow.iter_mut().zip(&lat.base) {
            *p = p
                .checked_mul(*b)
                .ok_or_else(|| Error::Unsupported(format!("level {level} too deep for the exact method")))?;
        }
        let shift: Vec<Vec<i64>> = lat
            .digits
            .iter()
            .map(|d| d.iter().zip(&pow).map(|(c, p)| c * p).collect())
            .collect();
        let pushed: Vec<(Vec<i64>, Vec<BigInt>)> = cells
            .par_iter()
            .flat_map_iter(|(k, v)| {
                let mut local: Vec<(Vec<i64>, Vec<BigInt>)> = Vec::new();
                for (sym, shift_s) in shift.iter().enumerate() {
                    let mut vals = vec![BigInt::zero(); rep.states];
                    let mut any = false;
                    for (j, from, to, w) in terms.iter() {
                        if *j == sym && !v[*to].is_zero() {
                            vals[*from] += w * &v[*to];
                            any = true;
                        }
                    }
                    if any {
                        let nk: Vec<i64> = k.iter().zip(shift_s).map(|(a, b)| a + b).collect();
                        local.push((nk, vals));
                    }
                }
                local
            })
            .collect();
        cells = merge_sorted(pushed);
        if cells.len() > MAX_SUPPORT {
            return Err(Error::CapExceeded {
                needed: cells.len() as u128,
                cap: MAX_SUPPORT as u128,
            });
        }
        den *= &w_den;
        out.push(grid_entropy(&cells, &lat.denom, &alpha, &den));
    }
    Ok(out)
}

/// Entropy of the grid-cell masses `sum_s alpha_s nu_s(C)` with `C ⊇ F[k]` for `k_j div D_j`,
/// and an error bound. Each `ln p` is a difference of two large logarithms, so
/// it carries an absolute error of order `eps ln den`; the sum adds `N eps H`.
fn grid_entropy(cells: &Cells, denom: &[i64], alpha: &[BigInt], den: &BigInt) -> (f64, f64) {
    let mut keyed: Vec<(Vec<i64>, BigInt)> = cells
        .iter()
        .map(|(k, v)| {
            let g: Vec<i64> = k.iter().zip(denom).map(|(x, d)| x.div_floor(d)).collect();
            let mass: BigInt = v.iter().zip(alpha).map(|(a, b)| a * b).sum();
            (g, mass)
        })
        .collect();
    keyed.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    let ln_den = ln_big(den);
    let mut h = 0.0;
    let mut terms = 0usize;
    let mut i = 0;
    while i < keyed.len() {
        let mut mass = keyed[i].1.clone();
        let mut j = i + 1;
        while j < keyed.len() && keyed[j].0 == keyed[i].0 {
            mass += &keyed[j].1;
            j += 1;
        }
        if mass.is_positive() {
            let lp = ln_big(&mass) - ln_den;
            h -= lp.exp() * lp;
            terms += 1;
        }
        i = j;
    }
    let h = h.max(0.0);
    let err = 4.0 * f64::EPSILON * ((ln_den.abs() + 1.0) * (1.0 + h) + terms as f64 * h);
    (h, err)
}
