//! Grid entropy from distinct-map classes, each placed at its anchor point.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::coding::SymbolicMeasure;
use crate::error::Result;
use crate::ifs::{invariant_box, IfsSpec};
use crate::numeric::{AlgebraicNumber, Rational};
use crate::overlap::distinct_maps;

/// Extra levels beyond the first one whose class boxes fit inside a cell.
pub const DEFAULT_EXTRA_DEPTH: usize = 2;

#[derive(Debug, Clone)]
pub(crate) struct Anchored {
    pub entropy: f64,
    pub lower: f64,
    pub upper: f64,
    pub straddle_mass: f64,
}

fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
    }
}

fn ceil(x: &AlgebraicNumber) -> BigInt {
    -(-x).floor()
}

/// Depth `s` with `rho_j^s * width_j <= 1` for every coordinate.
fn fit_depth(ratios: &[AlgebraicNumber], widths: &[AlgebraicNumber]) -> usize {
    let mut s = 0;
    loop {
        let ok = ratios
            .iter()
            .zip(widths)
            .all(|(r, w)| (&r.pow(s as u32) * w) <= AlgebraicNumber::one(r.field()));
        if ok {
            return s;
        }
        s += 1;
    }
}

pub(crate) fn anchored_grid_entropy(
    spec: &IfsSpec,
    m: &SymbolicMeasure,
    n: usize,
    extra_depth: usize,
    cap: u128,
) -> Result<Anchored> {
    let ratios = spec.shared_ratios()?;
    let b = invariant_box(spec);
    let widths = b.widths();
    let s = fit_depth(&ratios, &widths) + extra_depth;
    let table = distinct_maps(spec, n + s, Some(m), cap)?;
    let masses = table.masses().expect("measure supplied");
    let mid = b.midpoint();
    let inv_cell: Vec<AlgebraicNumber> = ratios
        .iter()
        .map(|r| r.pow(n as u32).inv().expect("nonzero ratio"))
        .collect();

    let placed: Vec<(Vec<BigInt>, bool)> = (0..table.len())
        .into_par_iter()
        .map(|i| {
            let map = table.map(i);
            let mut key = Vec::with_capacity(map.parts.len());
            let mut straddles = false;
            for (j, (r, t)) in map.parts.iter().enumerate() {
                let cell = |x: &AlgebraicNumber| (&(x + t) * &inv_cell[j]).floor();
                let anchor = cell(&(r * &mid[j]));
                let lo = cell(&(r * &b.coords[j].0));
                let hi = cell(&(r * &b.coords[j].1));
                straddles |= lo != hi;
                key.push(anchor);
            }
            (key, straddles)
        })
        .collect();

    let mut order: Vec<usize> = (0..placed.len()).collect();
    order.sort_by(|&a, &b| placed[a].0.cmp(&placed[b].0));
    let mut entropy = 0.0;
    let mut straddle = Rational::zero();
    let mut i = 0;
    while i < order.len() {
        let mut mass = Rational::zero();
        let mut j = i;
        while j < order.len() && placed[order[j]].0 == placed[order[i]].0 {
            let c = order[j];
            mass += &masses[c];
            if placed[c].1 {
                straddle += &masses[c];
            }
            j += 1;
        }
        let p = mass.to_f64().unwrap_or(0.0);
        if p > 0.0 {
            entropy -= p * p.ln();
        }
        i = j;
    }

    let d = spec.dim() as f64;
    let bmass = straddle.to_f64().unwrap_or(1.0).clamp(0.0, 1.0);
    let tight = binary_entropy(bmass) + bmass * d * 3f64.ln();
    let (mut c0, mut c1) = (1.0f64, 1.0f64);
    for (r, w) in ratios.iter().zip(&widths) {
        let span = ceil(&(&r.pow(s as u32) * w)).to_f64().unwrap_or(f64::INFINITY);
        c0 *= span + 1.0;
        c1 *= span + 2.0;
    }
    Ok(Anchored {
        entropy,
        lower: (entropy - tight.min(c1.ln())).max(0.0),
        upper: entropy + tight.min(c0.ln()),
        straddle_mass: bmass,
    })
}
