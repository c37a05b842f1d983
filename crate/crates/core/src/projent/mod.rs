//! Projection entropy through grid-partition entropies `H(pi^{-1} Q_n)`.
//!
//! Two methods compute `H` at a level. The exact method pushes the measure
//! through integer-base cell families and leaves no error. The anchored method
//! works for any shared-ratio system and places the mass of each distinct map
//! at one point, with a certified bracket. The limit `h_pi` is estimated by
//! the difference quotient of the two deepest levels, which cancels the
//! bounded additive term in `H(n) = n h_pi + O(1)`.

mod anchored;
mod exact;

use std::io::Write;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

pub use anchored::DEFAULT_EXTRA_DEPTH;
pub use exact::{MAX_SUPPORT, MAX_UNIT_UNKNOWNS};

use crate::coding::SymbolicMeasure;
use crate::error::{Error, Result};
use crate::ifs::{csv_err, IfsSpec};
use crate::overlap::DEFAULT_CAP;

/// Natural log of a positive big integer.
pub(crate) fn ln_big(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap_or(f64::NAN).ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap_or(f64::NAN).ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EntropyMethod {
    ExactPushforward,
    AnchoredAtoms,
}

impl std::fmt::Display for EntropyMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EntropyMethod::ExactPushforward => "exact-pushforward",
            EntropyMethod::AnchoredAtoms => "anchored-atoms",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Exact when the system admits it, anchored otherwise.
    #[default]
    Auto,
    Exact,
    Anchored,
}

#[derive(Debug, Clone, Copy)]
pub struct ProjentOptions {
    pub mode: Mode,
    pub cap: u128,
    pub extra_depth: usize,
}

impl Default for ProjentOptions {
    fn default() -> Self {
        ProjentOptions {
            mode: Mode::Auto,
            cap: DEFAULT_CAP,
            extra_depth: DEFAULT_EXTRA_DEPTH,
        }
    }
}

/// Entropy per level with a certified bracket: `value = total / level`.
#[derive(Debug, Clone, Serialize)]
pub struct EntropyEstimate {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: usize,
    pub method: EntropyMethod,
    /// `H(pi^{-1} Q_n)` itself and its bracket.
    pub total: f64,
    pub total_lower: f64,
    pub total_upper: f64,
    /// Mass of classes whose box meets several cells (anchored method only).
    pub straddle_mass: Option<f64>,
}

impl EntropyEstimate {
    fn from_total(level: usize, method: EntropyMethod, total: f64, lo: f64, hi: f64, straddle: Option<f64>) -> Self {
        let n = level.max(1) as f64;
        EntropyEstimate {
            value: total / n,
            lower: lo / n,
            upper: hi / n,
            level,
            method,
            total,
            total_lower: lo,
            total_upper: hi,
            straddle_mass: straddle,
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

fn exact_applicable(e: &Error) -> bool {
    matches!(e, Error::Unsupported(_) | Error::NotUnique | Error::CapExceeded { .. })
}

/// Grid entropies at every level in `levels`.
pub fn grid_entropies(
    spec: &IfsSpec,
    m: &SymbolicMeasure,
    levels: std::ops::RangeInclusive<usize>,
    opts: &ProjentOptions,
) -> Result<Vec<EntropyEstimate>> {
    if m.alphabet() != spec.alphabet() {
        return Err(Error::InvalidMeasure("measure and system alphabets differ".into()));
    }
    spec.shared_ratios()?;
    let (n1, n2) = (*levels.start(), *levels.end());
    if opts.mode != Mode::Anchored {
        match exact::exact_grid_entropies(spec, m, n2) {
            Ok(h) => {
                return Ok((n1..=n2)
                    .map(|n| {
                        let (t, err) = h[n];
                        EntropyEstimate::from_total(n, EntropyMethod::ExactPushforward, t, (t - err).max(0.0), t + err, None)
                    })
                    .collect())
            }
            Err(e) if opts.mode == Mode::Auto && exact_applicable(&e) => {}
            Err(e) => return Err(e),
        }
    }
    (n1..=n2)
        .map(|n| {
            let a = anchored::anchored_grid_entropy(spec, m, n, opts.extra_depth, opts.cap)?;
            Ok(EntropyEstimate::from_total(
                n,
                EntropyMethod::AnchoredAtoms,
                a.entropy,
                a.lower,
                a.upper,
                Some(a.straddle_mass),
            ))
        })
        .collect()
}

/// `H(pi^{-1} Q_n) / n` with its bracket.
pub fn grid_pushforward_entropy(spec: &IfsSpec, m: &SymbolicMeasure, n: usize) -> Result<EntropyEstimate> {
    grid_pushforward_entropy_with(spec, m, n, &ProjentOptions::default())
}

pub fn grid_pushforward_entropy_with(
    spec: &IfsSpec,
    m: &SymbolicMeasure,
    n: usize,
    opts: &ProjentOptions,
) -> Result<EntropyEstimate> {
    if n == 0 {
        return Err(Error::InvalidSpec("level must be at least 1".into()));
    }
    Ok(grid_entropies(spec, m, n..=n, opts)?.remove(0))
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectionEntropy {
    /// Difference-quotient estimate of `h_pi`.
    pub estimate: EntropyEstimate,
    pub n1: usize,
    pub n2: usize,
    pub levels: Vec<EntropyEstimate>,
    /// `H(k+1) - H(k)` for `n1 <= k < n2`.
    pub step_quotients: Vec<f64>,
    /// Largest minus smallest step quotient.
    pub spread: f64,
    /// Set when factors contract at different rates, where the grid limit is
    /// used in its per-factor (diagonal) form.
    pub note: Option<String>,
}

/// Estimates `h_pi` from levels `n_max - 4 ..= n_max`.
///
/// The bracket contains the bracket propagated from the two end levels and
/// every one-step quotient, so it also reflects how settled the sequence is.
pub fn projection_entropy(
    spec: &IfsSpec,
    m: &SymbolicMeasure,
    n_max: usize,
    opts: &ProjentOptions,
) -> Result<ProjectionEntropy> {
    if n_max == 0 {
        return Err(Error::InvalidSpec("n_max must be at least 1".into()));
    }
    let n1 = n_max.saturating_sub(4);
    let levels = grid_entropies(spec, m, n1..=n_max, opts)?;
    let first = &levels[0];
    let last = levels.last().expect("nonempty");
    let dn = (n_max - n1) as f64;
    let value = (last.total - first.total) / dn;
    let mut lower = (last.total_lower - first.total_upper) / dn;
    let mut upper = (last.total_upper - first.total_lower) / dn;
    let steps: Vec<f64> = levels.windows(2).map(|w| w[1].total - w[0].total).collect();
    for w in levels.windows(2) {
        lower = lower.min(w[1].total_lower - w[0].total_upper);
        upper = upper.max(w[1].total_upper - w[0].total_lower);
    }
    let spread = steps.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - steps.iter().cloned().fold(f64::INFINITY, f64::min);
    let method = last.method;
    let ratios: Vec<f64> = spec.factors().iter().map(|f| f.ratios_f64()[0]).collect();
    let note = ratios
        .windows(2)
        .any(|w| w[0] != w[1])
        .then(|| "factors contract at different rates; grid cells use per-factor widths".to_string());
    Ok(ProjectionEntropy {
        estimate: EntropyEstimate {
            value,
            lower: lower.min(value),
            upper: upper.max(value),
            level: n_max,
            method,
            total: last.total,
            total_lower: last.total_lower,
            total_upper: last.total_upper,
            straddle_mass: last.straddle_mass,
        },
        n1,
        n2: n_max,
        levels,
        step_quotients: steps,
        spread: spread.max(0.0),
        note,
    })
}

/// Per-level table: `n, H, H_lower, H_upper, H_over_n, step`.
pub fn write_levels_csv<W: Write>(pe: &ProjectionEntropy, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "H", "H_lower", "H_upper", "H_over_n", "step_quotient", "method"])
        .map_err(csv_err)?;
    for (i, l) in pe.levels.iter().enumerate() {
        let step = if i == 0 {
            String::new()
        } else {
            crate::fmt12(pe.step_quotients[i - 1])
        };
        w.write_record([
            l.level.to_string(),
            crate::fmt12(l.total),
            crate::fmt12(l.total_lower),
            crate::fmt12(l.total_upper),
            crate::fmt12(l.value),
            step,
            l.method.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Rational;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn dup3() -> IfsSpec {
        IfsSpec::rational_1d(&[("1/2", "0"), ("1/2", "0"), ("1/2", "1/2")]).unwrap()
    }

    /// Entropy of the base-2 Bernoulli(p, 1-p) measure, by direct evaluation.
    fn h2(p: f64) -> f64 {
        -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
    }

    #[test]
    fn binary_full_tiling() {
        let bin = IfsSpec::rational_1d(&[("1/2", "0"), ("1/2", "1/2")]).unwrap();
        for n in [1, 5, 12] {
            let e = grid_pushforward_entropy(&bin, &SymbolicMeasure::uniform(2), n).unwrap();
            assert_eq!(e.method, EntropyMethod::ExactPushforward);
            assert!((e.value - 2f64.ln()).abs() < 1e-12);
            assert!(e.lower <= 2f64.ln() && 2f64.ln() <= e.upper && e.width() < 1e-10);
        }
    }

    #[test]
    fn duplicated_map_exact() {
        let e = grid_pushforward_entropy(&dup3(), &SymbolicMeasure::uniform(3), 16).unwrap();
        assert!((e.value - h2(2.0 / 3.0)).abs() < 1e-10);
        let pe = projection_entropy(&dup3(), &SymbolicMeasure::uniform(3), 16, &ProjentOptions::default()).unwrap();
        assert!((pe.estimate.value - h2(2.0 / 3.0)).abs() < 1e-10);
        let m = SymbolicMeasure::bernoulli(vec![q(1, 2), q(1, 4), q(1, 4)]).unwrap();
        let pe = projection_entropy(&dup3(), &m, 16, &ProjentOptions::default()).unwrap();
        assert!((pe.estimate.value - h2(0.75)).abs() < 1e-10);
    }

    #[test]
    fn anchored_brackets_contain_exact() {
        let opts = ProjentOptions {
            mode: Mode::Anchored,
            ..Default::default()
        };
        let m = SymbolicMeasure::uniform(3);
        for n in [4, 8, 12] {
            let a = grid_pushforward_entropy_with(&dup3(), &m, n, &opts).unwrap();
            let e = grid_pushforward_entropy(&dup3(), &m, n).unwrap();
            assert_eq!(a.method, EntropyMethod::AnchoredAtoms);
            assert!(a.total_lower <= e.total + 1e-9 && e.total <= a.total_upper + 1e-9);
        }
    }

    #[test]
    fn point_mass_is_zero() {
        let m = SymbolicMeasure::bernoulli(vec![q(1, 1), q(0, 1), q(0, 1)]).unwrap();
        for mode in [Mode::Exact, Mode::Anchored] {
            let opts = ProjentOptions { mode, ..Default::default() };
            let e = grid_pushforward_entropy_with(&dup3(), &m, 6, &opts).unwrap();
            assert!(e.value.abs() < 1e-12, "{mode:?}");
        }
    }

    #[test]
    fn shape_required() {
        let per_map = IfsSpec::rational_1d(&[("1/2", "0"), ("1/4", "1/2")]).unwrap();
        let e = grid_pushforward_entropy(&per_map, &SymbolicMeasure::uniform(2), 4).unwrap_err();
        assert!(matches!(e, Error::ShapeRequired(_)));
    }
}
