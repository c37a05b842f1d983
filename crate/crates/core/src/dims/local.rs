//! Monte Carlo local dimension: empirical ball masses from an independent
//! sample cloud, regressed against the radius on a log scale.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coding::SymbolicMeasure;
use crate::error::{Error, Result};
use crate::ifs::{csv_err, invariant_box, pi_truncate, IfsSpec};
use crate::overlap::least_squares_slope;

/// Radii with a mean in-ball count below this are dropped.
const MIN_MEAN_COUNT: f64 = 20.0;
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy)]
pub struct McOptions {
    /// Size of the sample cloud.
    pub samples: usize,
    /// Number of reference points.
    pub points: usize,
    /// Radii `rho_min^k` for `k` in this range.
    pub k_min: u32,
    pub k_max: u32,
    pub seed: u64,
}

impl McOptions {
    pub fn with_seed(seed: u64) -> Self {
        McOptions {
            samples: 100_000,
            points: 256,
            k_min: 4,
            k_max: 12,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalDimension {
    pub mean: f64,
    /// Sample standard deviation of the per-point slopes.
    pub std: f64,
    pub stderr: f64,
    pub slopes: Vec<f64>,
    pub radii: Vec<f64>,
    /// Exponents `k` removed for having too few in-ball samples.
    pub dropped: Vec<u32>,
    pub samples: usize,
    pub seed: u64,
}

/// Floating-point point of `pi(u)` for the cloud; maps applied innermost first.
fn float_point(maps: &[Vec<(f64, f64)>], mid: &[f64], u: &[u32]) -> Vec<f64> {
    let mut x = mid.to_vec();
    for &s in u.iter().rev() {
        for (j, xj) in x.iter_mut().enumerate() {
            let (r, t) = maps[s as usize][j];
            *xj = r * *xj + t;
        }
    }
    x
}

pub fn local_dimension_mc(spec: &IfsSpec, m: &SymbolicMeasure, opts: &McOptions) -> Result<LocalDimension> {
    if m.alphabet() != spec.alphabet() {
        return Err(Error::InvalidMeasure("measure and system alphabets differ".into()));
    }
    if opts.samples < 2 || opts.points < 2 || opts.k_min > opts.k_max {
        return Err(Error::InvalidSpec("sampling schedule is empty".into()));
    }
    let all: Vec<f64> = spec.factors().iter().flat_map(|f| f.ratios_f64()).collect();
    let rho_min = all.iter().cloned().fold(1.0, f64::min);
    let rho_max = all.iter().cloned().fold(0.0, f64::max);
    let b = invariant_box(spec).to_f64();
    let width = b.iter().map(|(lo, hi)| hi - lo).fold(0.0, f64::max).max(1e-300);
    let mid: Vec<f64> = b.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
    let r_min = rho_min.powi(opts.k_max as i32);
    let depth = ((r_min * 1e-3 / width).ln() / rho_max.ln()).ceil().max(1.0) as usize;
    let maps: Vec<Vec<(f64, f64)>> = (0..spec.alphabet())
        .map(|i| spec.map(i).iter().map(|f| (f.ratio.to_f64(), f.translation.to_f64())).collect())
        .collect();

    let mut seeder = ChaCha8Rng::seed_from_u64(opts.seed);
    let cloud_seed: u64 = seeder.gen();
    let ref_seed: u64 = seeder.gen();
    let sampler = m.sampler();

    let chunks = opts.samples.div_ceil(CHUNK);
    let mut cloud: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(cloud_seed);
            rng.set_stream(c as u64);
            let len = CHUNK.min(opts.samples - c * CHUNK);
            let (maps, mid, sampler) = (&maps, &mid, &sampler);
            (0..len).map(move |_| float_point(maps, mid, sampler.sample(&mut rng, depth).symbols()))
        })
        .collect();
    cloud.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let xs: Vec<f64> = cloud.iter().map(|p| p[0]).collect();

    let refs: Vec<Vec<f64>> = (0..opts.points)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(ref_seed);
            rng.set_stream(i as u64);
            let u = sampler.sample(&mut rng, depth);
            pi_truncate(spec, &u).point.iter().map(|x| x.to_f64()).collect()
        })
        .collect();

    let ks: Vec<u32> = (opts.k_min..=opts.k_max).collect();
    let radii: Vec<f64> = ks.iter().map(|&k| rho_min.powi(k as i32)).collect();
    let counts: Vec<Vec<usize>> = refs
        .par_iter()
        .map(|z| {
            radii
                .iter()
                .map(|&r| {
                    let a = xs.partition_point(|&x| x < z[0] - r);
                    let b = xs.partition_point(|&x| x <= z[0] + r);
                    cloud[a..b]
                        .iter()
                        .filter(|p| p.iter().zip(z).skip(1).all(|(x, y)| (x - y).abs() <= r))
                        .count()
                })
                .collect()
        })
        .collect();

    let mut keep = Vec::new();
    let mut dropped = Vec::new();
    for (i, &k) in ks.iter().enumerate() {
        let mean = counts.iter().map(|c| c[i] as f64).sum::<f64>() / counts.len() as f64;
        if mean >= MIN_MEAN_COUNT {
            keep.push(i);
        } else {
            dropped.push(k);
        }
    }
    if keep.len() < 3 {
        return Err(Error::Unsupported(format!(
            "only {} radii have enough samples; use larger radii or more samples",
            keep.len()
        )));
    }
    let n = opts.samples as f64;
    let slopes: Vec<f64> = counts
        .iter()
        .filter_map(|c| {
            let (lx, ly): (Vec<f64>, Vec<f64>) = keep
                .iter()
                .filter(|&&i| c[i] > 0)
                .map(|&i| (radii[i].ln(), (c[i] as f64 / n).ln()))
                .unzip();
            (lx.len() >= 3).then(|| least_squares_slope(&lx, &ly))
        })
        .collect();
    let k = slopes.len() as f64;
    let mean = slopes.iter().sum::<f64>() / k;
    let std = (slopes.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0)).sqrt();
    Ok(LocalDimension {
        mean,
        std,
        stderr: std / k.sqrt(),
        slopes,
        radii: keep.iter().map(|&i| radii[i]).collect(),
        dropped,
        samples: opts.samples,
        seed: opts.seed,
    })
}

pub fn write_slopes_csv<W: Write>(ld: &LocalDimension, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["point", "slope"]).map_err(csv_err)?;
    for (i, s) in ld.slopes.iter().enumerate() {
        w.write_record([i.to_string(), crate::fmt12(*s)]).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lebesgue_and_determinism() {
        let bin = IfsSpec::rational_1d(&[("1/2", "0"), ("1/2", "1/2")]).unwrap();
        let opts = McOptions {
            samples: 20_000,
            points: 64,
            k_min: 3,
            k_max: 8,
            seed: 7,
        };
        let a = local_dimension_mc(&bin, &SymbolicMeasure::uniform(2), &opts).unwrap();
        assert!((a.mean - 1.0).abs() < 0.05, "{}", a.mean);
        let b = local_dimension_mc(&bin, &SymbolicMeasure::uniform(2), &opts).unwrap();
        assert_eq!(a.slopes, b.slopes);
    }
}
