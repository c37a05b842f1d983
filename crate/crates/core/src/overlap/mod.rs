//! Exact overlaps: distinct composed maps `N_n`, overlap multiplicity `t_n`,
//! and the AWSC growth heuristic.

mod enumerate;
mod sweep;

use std::io::Write;

use serde::Serialize;

pub use enumerate::{distinct_maps, ClassTable, DEFAULT_CAP};
pub use sweep::max_cover;

use crate::error::{Error, Result};
use crate::ifs::{csv_err, invariant_box, IfsSpec};

/// Default growth threshold (nats per level) below which AWSC is deemed plausible.
pub const DEFAULT_AWSC_EPS: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Multiplicity {
    /// Largest number of class images sharing an interior point.
    pub interior: usize,
    /// Largest number of closed class images sharing a point (the `t_n` upper bound).
    pub touch: usize,
    pub classes: usize,
    pub words: u128,
}

/// Overlap counts of the images `S_u(B)` of the invariant box over distinct maps.
pub fn multiplicity_of(spec: &IfsSpec, table: &ClassTable) -> Multiplicity {
    let b = invariant_box(spec);
    let boxes: Vec<_> = (0..table.len()).map(|i| table.image_box(i, &b).coords).collect();
    let refs: Vec<&[_]> = boxes.iter().map(|v| v.as_slice()).collect();
    let widths = b.widths();
    let open: Vec<bool> = widths.iter().map(|w| w.sign() > 0).collect();
    let closed = vec![false; open.len()];
    Multiplicity {
        interior: max_cover(&refs, &open),
        touch: max_cover(&refs, &closed),
        classes: table.len(),
        words: table.counts().iter().fold(0u128, |a, c| a.saturating_add(*c)),
    }
}

pub fn overlap_multiplicity(spec: &IfsSpec, n: usize, cap: u128) -> Result<Multiplicity> {
    let table = distinct_maps(spec, n, None, cap)?;
    Ok(multiplicity_of(spec, &table))
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileRow {
    pub n: usize,
    pub distinct: usize,
    pub t_interior: usize,
    pub t_touch: usize,
    pub log_n_rate: f64,
    pub log_t_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AwscVerdict {
    ConsistentWithAwsc,
    GrowthDetected,
}

impl std::fmt::Display for AwscVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AwscVerdict::ConsistentWithAwsc => "consistent-with-AWSC",
            AwscVerdict::GrowthDetected => "growth-detected",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlapProfile {
    pub rows: Vec<ProfileRow>,
    /// Least-squares slope of `log t_n` against `n` over the upper half of the levels.
    pub growth_rate: f64,
    pub eps: f64,
    pub verdict: AwscVerdict,
}

/// `N_n` and `t_n` for `n = 1..=n_max`, with a heuristic AWSC verdict.
///
/// The verdict reads "consistent" when the fitted exponential growth rate of
/// the closed multiplicity stays below `eps`. It is evidence, not a proof.
pub fn awsc_diagnostic(spec: &IfsSpec, n_max: usize, eps: f64, cap: u128) -> Result<OverlapProfile> {
    if n_max == 0 {
        return Err(Error::InvalidSpec("n_max must be positive".into()));
    }
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let table = distinct_maps(spec, n, None, cap)?;
        let m = multiplicity_of(spec, &table);
        rows.push(ProfileRow {
            n,
            distinct: m.classes,
            t_interior: m.interior,
            t_touch: m.touch,
            log_n_rate: (m.classes as f64).ln() / n as f64,
            log_t_rate: (m.touch as f64).ln() / n as f64,
        });
    }
    let tail = &rows[(n_max - 1) / 2..];
    let growth_rate = if tail.len() < 2 {
        rows.last().map(|r| r.log_t_rate).unwrap_or(0.0)
    } else {
        let xs: Vec<f64> = tail.iter().map(|r| r.n as f64).collect();
        let ys: Vec<f64> = tail.iter().map(|r| (r.t_touch as f64).ln()).collect();
        least_squares_slope(&xs, &ys)
    };
    let verdict = if growth_rate <= eps {
        AwscVerdict::ConsistentWithAwsc
    } else {
        AwscVerdict::GrowthDetected
    };
    Ok(OverlapProfile {
        rows,
        growth_rate,
        eps,
        verdict,
    })
}

pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn write_profile_csv<W: Write>(profile: &OverlapProfile, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "N_n", "t_n_interior", "t_n_touch", "log_N_over_n", "log_t_over_n"])
        .map_err(csv_err)?;
    for r in &profile.rows {
        w.write_record([
            r.n.to_string(),
            r.distinct.to_string(),
            r.t_interior.to_string(),
            r.t_touch.to_string(),
            crate::fmt12(r.log_n_rate),
            crate::fmt12(r.log_t_rate),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::{all_words, SymbolicMeasure};
    use crate::ifs::compose;
    use crate::numeric::{AlgebraicNumber, IntPoly, NumberField, Rational};

    fn dup3() -> IfsSpec {
        IfsSpec::rational_1d(&[("1/2", "0"), ("1/2", "0"), ("1/2", "1/2")]).unwrap()
    }

    fn golden() -> IfsSpec {
        let field = NumberField::largest_root(IntPoly::from_i64(&[-1, -1, 1])).unwrap();
        let rho = AlgebraicNumber::parse(&field, "(-1, 1)").unwrap();
        IfsSpec::product(field, &[rho], &[vec!["0"], vec!["(2, -1)"]]).unwrap()
    }

    /// Brute force: compose every word and deduplicate by exact equality.
    fn brute_force_count(spec: &IfsSpec, n: usize) -> usize {
        let mut maps: Vec<_> = all_words(spec.alphabet(), n).map(|w| compose(spec, &w).parts).collect();
        maps.sort();
        maps.dedup();
        maps.len()
    }

    #[test]
    fn counts_match_brute_force() {
        assert_eq!(distinct_maps(&dup3(), 3, None, DEFAULT_CAP).unwrap().len(), 8);
        assert_eq!(distinct_maps(&golden(), 3, None, DEFAULT_CAP).unwrap().len(), 7);
        let sep = IfsSpec::rational_1d(&[("1/5", "0"), ("1/5", "2/5"), ("1/5", "4/5")]).unwrap();
        assert_eq!(distinct_maps(&sep, 2, None, DEFAULT_CAP).unwrap().len(), 9);
        let per_map = IfsSpec::rational_1d(&[("1/2", "0"), ("1/4", "1/2"), ("1/4", "3/4")]).unwrap();
        for spec in [dup3(), golden(), per_map] {
            for n in 1..=6 {
                let t = distinct_maps(&spec, n, None, DEFAULT_CAP).unwrap();
                assert_eq!(t.len(), brute_force_count(&spec, n));
            }
        }
    }

    #[test]
    fn masses_aggregate() {
        let m = SymbolicMeasure::uniform(3);
        let t = distinct_maps(&dup3(), 4, Some(&m), DEFAULT_CAP).unwrap();
        let total: Rational = t.masses().unwrap().iter().sum();
        assert_eq!(total, Rational::from_integer(1.into()));
        assert_eq!(t.counts().iter().sum::<u128>(), 81);
    }

    #[test]
    fn multiplicities() {
        let bin = IfsSpec::rational_1d(&[("1/2", "0"), ("1/2", "1/2")]).unwrap();
        let m = overlap_multiplicity(&bin, 4, DEFAULT_CAP).unwrap();
        assert_eq!((m.interior, m.touch), (1, 2));
        let m = overlap_multiplicity(&dup3(), 2, DEFAULT_CAP).unwrap();
        assert_eq!((m.interior, m.classes, m.words), (1, 4, 9));
        let single = IfsSpec::rational_1d(&[("1/3", "1/5")]).unwrap();
        assert_eq!(overlap_multiplicity(&single, 5, DEFAULT_CAP).unwrap().touch, 1);
    }

    #[test]
    fn cap_and_overflow() {
        let e = distinct_maps(&dup3(), 5, None, 10).unwrap_err();
        assert!(matches!(e, Error::CapExceeded { .. }));
        let deep = IfsSpec::rational_1d(&[("1/1000", "0"), ("1/1000", "1/7")]).unwrap();
        assert!(matches!(distinct_maps(&deep, 20, None, DEFAULT_CAP), Err(Error::Overflow(_))));
    }

    #[test]
    fn awsc_examples() {
        let p = awsc_diagnostic(&dup3(), 12, DEFAULT_AWSC_EPS, DEFAULT_CAP).unwrap();
        assert_eq!(p.verdict, AwscVerdict::ConsistentWithAwsc);
        let p = awsc_diagnostic(&golden(), 12, DEFAULT_AWSC_EPS, DEFAULT_CAP).unwrap();
        assert_eq!(p.verdict, AwscVerdict::ConsistentWithAwsc);
        let cantor = IfsSpec::rational_1d(&[("1/3", "0"), ("1/3", "2/3")]).unwrap();
        let p = awsc_diagnostic(&cantor, 10, DEFAULT_AWSC_EPS, DEFAULT_CAP).unwrap();
        assert!(p.rows.iter().all(|r| r.t_touch == 1));
    }
}
