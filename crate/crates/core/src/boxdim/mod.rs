//! Certified grid-box counts and box-counting dimension.
//!
//! A cell counts when its interior meets `K`. Lower counts come from points
//! of `K` (images of a fixed point) lying strictly inside a cell; upper counts
//! from cells whose interior meets a covering box `S_u(B)`. Coordinates where
//! `K` is degenerate use half-open cells instead.

use std::io::Write;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ifs::{csv_err, invariant_box, IfsSpec};
use crate::numeric::AlgebraicNumber;
use crate::overlap::{distinct_maps, least_squares_slope, DEFAULT_CAP};

/// Extra class depth beyond the first level whose boxes fit in a cell.
pub const DEFAULT_EXTRA_DEPTH: usize = 2;

#[derive(Debug, Clone, Serialize)]
pub struct BoxCount {
    pub level: usize,
    pub lower: usize,
    pub upper: usize,
    /// Per-coordinate exponents: the cell side in coordinate `j` is `rho_j^{e_j}`.
    pub exponents: Vec<usize>,
    /// `-log` of the nominal cell side.
    pub log_inv_side: f64,
}

/// Occupied cells of one count, for rendering.
#[derive(Debug, Clone)]
pub struct BoxCells {
    pub lower: Vec<Vec<i64>>,
    pub upper: Vec<Vec<i64>>,
}

fn to_i64(x: BigInt) -> Result<i64> {
    x.to_i64().ok_or(Error::Overflow(0))
}

fn ceil(x: &AlgebraicNumber) -> BigInt {
    -(-x).floor()
}

/// Per-coordinate cell sides `rho_j^{e_j}`, with `rho_j` the factor's largest ratio.
fn sides(spec: &IfsSpec, exponents: &[usize]) -> Vec<AlgebraicNumber> {
    spec.factors()
        .iter()
        .zip(exponents)
        .map(|(f, e)| {
            let r = f.maps().iter().map(|m| m.ratio.clone()).max().expect("nonempty");
            r.pow(*e as u32)
        })
        .collect()
}

/// Counts cells of side `rho_j^{e_j}` (coordinate `j`) meeting `K`.
pub fn count_cells(spec: &IfsSpec, exponents: &[usize], extra_depth: usize, cap: u128) -> Result<BoxCells> {
    if exponents.len() != spec.dim() {
        return Err(Error::InvalidSpec("one exponent per coordinate required".into()));
    }
    let b = invariant_box(spec);
    let widths = b.widths();
    let side = sides(spec, exponents);
    let inv: Vec<AlgebraicNumber> = side.iter().map(|s| s.inv().expect("positive side")).collect();
    let degenerate: Vec<bool> = widths.iter().map(|w| w.is_zero()).collect();

    // depth m with every class box at most one cell wide
    let mut m = 0usize;
    loop {
        let probe = sides(spec, &vec![m; spec.dim()]);
        if probe
            .iter()
            .zip(&widths)
            .zip(&side)
            .all(|((p, w), s)| &(p * w) <= s)
        {
            break;
        }
        m += 1;
    }
    let table = distinct_maps(spec, m + extra_depth, None, cap)?;
    let p: Vec<AlgebraicNumber> = spec.map(0).iter().map(|f| f.fixed_point()).collect();

    let per_class: Result<Vec<(Option<Vec<i64>>, Vec<Vec<i64>>)>> = (0..table.len())
        .into_par_iter()
        .map(|i| {
            let map = table.map(i);
            let anchor = map.apply(&p);
            let mut witness = Some(Vec::with_capacity(spec.dim()));
            let mut ranges = Vec::with_capacity(spec.dim());
            for j in 0..spec.dim() {
                let (r, t) = &map.parts[j];
                let a = &anchor[j] * &inv[j];
                let k = a.floor();
                if !degenerate[j] && AlgebraicNumber::from_rational(a.field(), k.clone().into()) == a {
                    witness = None;
                }
                if let Some(w) = witness.as_mut() {
                    w.push(to_i64(k)?);
                }
                let lo = &(&(r * &b.coords[j].0) + t) * &inv[j];
                let hi = &(&(r * &b.coords[j].1) + t) * &inv[j];
                let (k0, k1) = if degenerate[j] {
                    let k = lo.floor();
                    (k.clone(), k)
                } else {
                    (lo.floor(), ceil(&hi) - 1)
                };
                ranges.push((to_i64(k0)?, to_i64(k1)?));
            }
            let mut cells = vec![Vec::with_capacity(spec.dim())];
            for (k0, k1) in ranges {
                cells = cells
                    .into_iter()
                    .flat_map(|c| {
                        (k0..=k1).map(move |k| {
                            let mut c = c.clone();
                            c.push(k);
                            c
                        })
                    })
                    .collect();
            }
            Ok((witness, cells))
        })
        .collect();
    let per_class = per_class?;
    let mut lower: Vec<Vec<i64>> = per_class.iter().filter_map(|(w, _)| w.clone()).collect();
    let mut upper: Vec<Vec<i64>> = per_class.into_iter().flat_map(|(_, c)| c).collect();
    lower.par_sort_unstable();
    lower.dedup();
    upper.par_sort_unstable();
    upper.dedup();
    Ok(BoxCells { lower, upper })
}

/// Cell exponents for level `n`: equal exponents for one factor or equal
/// ratios, and the almost-cube schedule `k_j(n) = sum_{i >= j} q_i(n)` otherwise.
pub fn almost_cube_exponents(spec: &IfsSpec, n: usize) -> (Vec<usize>, f64) {
    let logs: Vec<f64> = spec
        .factors()
        .iter()
        .map(|f| -f.ratios_f64().iter().cloned().fold(0.0, f64::max).ln())
        .collect();
    let lambda_max = logs.iter().cloned().fold(0.0, f64::max);
    // sort coordinates by ratio, largest ratio (smallest lambda) first
    let mut order: Vec<usize> = (0..logs.len()).collect();
    order.sort_by(|&a, &b| logs[a].total_cmp(&logs[b]));
    let d = order.len();
    let mut exps = vec![0usize; d];
    let mut acc = n;
    exps[order[d - 1]] = n;
    for pos in (0..d - 1).rev() {
        let (lj, lj1) = (logs[order[pos]], logs[order[pos + 1]]);
        let q = ((lambda_max / lj - lambda_max / lj1) * n as f64 + 1e-9).floor().max(0.0) as usize;
        acc += q;
        exps[order[pos]] = acc;
    }
    (exps, n as f64 * lambda_max)
}

pub fn box_count(spec: &IfsSpec, n: usize) -> Result<BoxCount> {
    box_count_with(spec, n, DEFAULT_EXTRA_DEPTH, DEFAULT_CAP)
}

pub fn box_count_with(spec: &IfsSpec, n: usize, extra_depth: usize, cap: u128) -> Result<BoxCount> {
    let (exponents, log_inv_side) = almost_cube_exponents(spec, n);
    let cells = count_cells(spec, &exponents, extra_depth, cap)?;
    Ok(BoxCount {
        level: n,
        lower: cells.lower.len(),
        upper: cells.upper.len(),
        exponents,
        log_inv_side,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoxDimension {
    /// Regression slope of the mean log count.
    pub value: f64,
    /// Regression slopes of the lower and upper counts (ordered).
    pub lower: f64,
    pub upper: f64,
    pub fit_from: usize,
    pub counts: Vec<BoxCount>,
}

/// Box dimension from counts at levels `1..=n_max`, fitted on the upper half.
pub fn box_dimension(spec: &IfsSpec, n_max: usize) -> Result<BoxDimension> {
    box_dimension_with(spec, n_max, DEFAULT_EXTRA_DEPTH, DEFAULT_CAP)
}

pub fn box_dimension_with(spec: &IfsSpec, n_max: usize, extra_depth: usize, cap: u128) -> Result<BoxDimension> {
    if n_max < 2 {
        return Err(Error::InvalidSpec("box dimension needs at least two levels".into()));
    }
    let counts = (1..=n_max)
        .map(|n| box_count_with(spec, n, extra_depth, cap))
        .collect::<Result<Vec<_>>>()?;
    let fit_from = (n_max / 2).max(1);
    let fit = &counts[fit_from - 1..];
    let xs: Vec<f64> = fit.iter().map(|c| c.log_inv_side).collect();
    let lo: Vec<f64> = fit.iter().map(|c| (c.lower.max(1) as f64).ln()).collect();
    let hi: Vec<f64> = fit.iter().map(|c| (c.upper.max(1) as f64).ln()).collect();
    let mid: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let (s_lo, s_hi) = (least_squares_slope(&xs, &lo), least_squares_slope(&xs, &hi));
    Ok(BoxDimension {
        value: least_squares_slope(&xs, &mid),
        lower: s_lo.min(s_hi),
        upper: s_lo.max(s_hi),
        fit_from,
        counts,
    })
}

pub fn write_counts_csv<W: Write>(bd: &BoxDimension, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "lower", "upper", "log_inv_side"]).map_err(csv_err)?;
    for c in &bd.counts {
        w.write_record([
            c.level.to_string(),
            c.lower.to_string(),
            c.upper.to_string(),
            crate::fmt12(c.log_inv_side),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}

/// Binary PGM of a 2-D occupancy grid: 255 certified, 128 cover only, 0 empty.
/// Rows run from the largest second coordinate down.
pub fn write_pgm<W: Write>(cells: &BoxCells, mut out: W) -> Result<()> {
    let io = |e: std::io::Error| Error::Parse(format!("pgm: {e}"));
    if cells.upper.first().map(|c| c.len()) != Some(2) {
        return Err(Error::Unsupported("raster output needs a 2-D system".into()));
    }
    let (x0, x1) = bounds(&cells.upper, 0);
    let (y0, y1) = bounds(&cells.upper, 1);
    let (w, h) = ((x1 - x0 + 1) as usize, (y1 - y0 + 1) as usize);
    if w * h > 1 << 26 {
        return Err(Error::CapExceeded {
            needed: (w * h) as u128,
            cap: 1 << 26,
        });
    }
    let mut img = vec![0u8; w * h];
    let pix = |c: &Vec<i64>| (((y1 - c[1]) as usize) * w) + (c[0] - x0) as usize;
    for c in &cells.upper {
        img[pix(c)] = 128;
    }
    for c in &cells.lower {
        img[pix(c)] = 255;
    }
    write!(out, "P5\n{w} {h}\n255\n").map_err(io)?;
    out.write_all(&img).map_err(io)?;
    Ok(())
}

fn bounds(cells: &[Vec<i64>], c: usize) -> (i64, i64) {
    let lo = cells.iter().map(|v| v[c]).min().unwrap_or(0);
    let hi = cells.iter().map(|v| v[c]).max().unwrap_or(0);
    (lo, hi)
}
