//! Dimension formulas for projected measures, Monte Carlo local dimensions,
//! and dimension maximization over Bernoulli measures.
//!
//! For a product of similarity factors, factors are ordered by their
//! Lyapunov exponents (`tau`), factors with equal ratios are merged into one
//! block, and the dimension is
//! `h_1/lambda_1 + sum_j (h_j - h_{j-1})/lambda_j`
//! where `h_j` is the projection entropy of the first `j` blocks.

mod local;
mod optimize;

use serde::Serialize;

pub use local::{local_dimension_mc, write_slopes_csv, LocalDimension, McOptions};
pub(crate) use optimize::rational_weights;
pub use optimize::{variational_optimize, write_trace_csv, OptimizeOptions, OptimizeResult, TraceRow};

use crate::coding::SymbolicMeasure;
use crate::error::{Error, Result};
use crate::ifs::{invariant_box, IfsSpec};
use crate::overlap::{overlap_multiplicity, DEFAULT_CAP};
use crate::projent::{projection_entropy, ProjentOptions};

/// Default deepest level for projection-entropy estimates.
pub const DEFAULT_LEVELS: usize = 12;

#[derive(Debug, Clone, Copy)]
pub struct DimOptions {
    pub projent: ProjentOptions,
    pub levels: usize,
    /// Use `h_pi = h` on projections with a verified open set condition.
    pub closed_form: bool,
}

impl Default for DimOptions {
    fn default() -> Self {
        DimOptions {
            projent: ProjentOptions::default(),
            levels: DEFAULT_LEVELS,
            closed_form: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PrefixEntropy {
    /// Input coordinates of the prefix projection.
    pub coords: Vec<usize>,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub method: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DimensionReport {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// Lyapunov exponent of each input factor.
    pub lambdas: Vec<f64>,
    /// Input factors sorted by ascending exponent.
    pub tau: Vec<usize>,
    /// Groups of factors with equal ratios, in `tau` order.
    pub blocks: Vec<Vec<usize>>,
    /// `h_{pi_j}` for the projection onto the first `j` blocks.
    pub prefix_entropies: Vec<PrefixEntropy>,
    /// Whether the prefix entropies are nondecreasing within their brackets.
    pub monotone: bool,
    pub method: String,
    pub notes: Vec<String>,
}

impl DimensionReport {
    pub fn summary(&self) -> String {
        use crate::fmt12;
        let mut s = format!(
            "dimension {} [{}, {}] ({})\n",
            fmt12(self.value),
            fmt12(self.lower),
            fmt12(self.upper),
            self.method
        );
        for (j, b) in self.blocks.iter().enumerate() {
            let h = &self.prefix_entropies[j];
            s += &format!(
                "  block {:?}: lambda {}  h {} [{}, {}] ({})\n",
                b,
                fmt12(self.lambdas[b[0]]),
                fmt12(h.value),
                fmt12(h.lower),
                fmt12(h.upper),
                h.method
            );
        }
        for n in &self.notes {
            s += &format!("  note: {n}\n");
        }
        s
    }
}

/// Checks the open set condition with the interior of the invariant box:
/// distinct first-level images must have pairwise disjoint interiors.
/// Coordinates in which the attractor is a point are ignored.
pub fn osc_certified(spec: &IfsSpec) -> Result<bool> {
    let (reduced, _) = spec.collapse_duplicates();
    let live: Vec<usize> = invariant_box(&reduced)
        .widths()
        .iter()
        .enumerate()
        .filter(|(_, w)| w.sign() > 0)
        .map(|(j, _)| j)
        .collect();
    if live.is_empty() {
        return Ok(reduced.alphabet() == 1);
    }
    let proj = reduced.project(&live)?;
    if proj.collapse_duplicates().0.alphabet() != reduced.alphabet() {
        return Ok(false);
    }
    Ok(overlap_multiplicity(&proj, 1, DEFAULT_CAP)?.interior <= 1)
}

fn prefix_entropy(spec: &IfsSpec, coords: &[usize], m: &SymbolicMeasure, opts: &DimOptions) -> Result<PrefixEntropy> {
    let proj = spec.project(coords)?;
    if opts.closed_form {
        let (reduced, g) = proj.collapse_duplicates();
        if osc_certified(&reduced)? {
            if let Ok(pm) = m.push_forward(&g, reduced.alphabet()) {
                let h = pm.shift_entropy();
                return Ok(PrefixEntropy {
                    coords: coords.to_vec(),
                    value: h,
                    lower: h,
                    upper: h,
                    method: "open-set-condition".into(),
                });
            }
        }
    }
    let pe = projection_entropy(&proj, m, opts.levels, &opts.projent)?;
    Ok(PrefixEntropy {
        coords: coords.to_vec(),
        value: pe.estimate.value,
        lower: pe.estimate.lower,
        upper: pe.estimate.upper,
        method: pe.estimate.method.to_string(),
    })
}

/// Dimension of the projected measure of a one-factor system: `h_pi / lambda`.
pub fn dim_conformal(spec: &IfsSpec, m: &SymbolicMeasure, opts: &DimOptions) -> Result<DimensionReport> {
    if spec.dim() != 1 {
        return Err(Error::InvalidSpec("conformal formula needs a one-factor system".into()));
    }
    dim_product(spec, m, opts)
}

/// Dimension of the projected measure of a product of similarity factors.
pub fn dim_product(spec: &IfsSpec, m: &SymbolicMeasure, opts: &DimOptions) -> Result<DimensionReport> {
    if m.alphabet() != spec.alphabet() {
        return Err(Error::InvalidMeasure("measure and system alphabets differ".into()));
    }
    let d = spec.dim();
    if d == 1 && spec.shared_ratios().is_err() {
        return conformal_per_map(spec, m, opts);
    }
    let ratios = spec.shared_ratios()?;
    let lambdas: Vec<f64> = ratios.iter().map(|r| -r.to_f64().ln()).collect();
    let mut tau: Vec<usize> = (0..d).collect();
    // larger ratio = smaller exponent; exact comparison keeps ties exact
    tau.sort_by(|&a, &b| ratios[b].cmp(&ratios[a]).then(a.cmp(&b)));
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for &j in &tau {
        match blocks.last_mut() {
            Some(b) if ratios[b[0]] == ratios[j] => b.push(j),
            _ => blocks.push(vec![j]),
        }
    }
    let mut prefix = Vec::new();
    let mut hs = Vec::with_capacity(blocks.len());
    for b in &blocks {
        prefix.extend_from_slice(b);
        hs.push(prefix_entropy(spec, &prefix, m, opts)?);
    }
    let inv: Vec<f64> = blocks.iter().map(|b| 1.0 / lambdas[b[0]]).collect();
    let (mut value, mut lower, mut upper) = (0.0, 0.0, 0.0);
    for (j, h) in hs.iter().enumerate() {
        let c = inv[j] - inv.get(j + 1).copied().unwrap_or(0.0);
        value += c * h.value;
        lower += c * h.lower;
        upper += c * h.upper;
    }
    let monotone = hs.windows(2).all(|w| w[0].lower <= w[1].upper + 1e-12);
    let mut notes = Vec::new();
    if !monotone {
        notes.push("prefix entropies decrease beyond their brackets".into());
    }
    if blocks.len() < d {
        notes.push("factors with equal ratios merged".into());
    }
    let method = if hs.iter().all(|h| h.method == "open-set-condition") {
        "closed-form"
    } else {
        "projection-entropy"
    };
    Ok(DimensionReport {
        value,
        lower: lower.max(0.0),
        upper,
        lambdas,
        tau,
        blocks,
        prefix_entropies: hs,
        monotone,
        method: method.into(),
        notes,
    })
}

/// One factor with distinct ratios: needs a verified open set condition.
fn conformal_per_map(spec: &IfsSpec, m: &SymbolicMeasure, opts: &DimOptions) -> Result<DimensionReport> {
    let lambda = m.lyapunov_exponent(&spec.factors()[0].ratios_f64())?;
    let h = prefix_entropy(spec, &[0], m, &DimOptions { closed_form: true, ..*opts })?;
    Ok(DimensionReport {
        value: h.value / lambda,
        lower: h.lower / lambda,
        upper: h.upper / lambda,
        lambdas: vec![lambda],
        tau: vec![0],
        blocks: vec![vec![0]],
        prefix_entropies: vec![h],
        monotone: true,
        method: "closed-form".into(),
        notes: vec!["maps contract at different rates; lambda is the measure average".into()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Rational;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn conformal_examples() {
        let cantor = IfsSpec::rational_1d(&[("1/3", "0"), ("1/3", "2/3")]).unwrap();
        let r = dim_conformal(&cantor, &SymbolicMeasure::uniform(2), &DimOptions::default()).unwrap();
        assert!((r.value - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
        assert_eq!(r.method, "closed-form");

        let exact = DimOptions {
            closed_form: false,
            ..Default::default()
        };
        let r = dim_conformal(&cantor, &SymbolicMeasure::uniform(2), &exact).unwrap();
        assert!((r.value - 2f64.ln() / 3f64.ln()).abs() < 1e-9);

        let bin = IfsSpec::rational_1d(&[("1/2", "0"), ("1/2", "1/2")]).unwrap();
        let m = SymbolicMeasure::bernoulli(vec![q("3/4"), q("1/4")]).unwrap();
        let h = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        let r = dim_conformal(&bin, &m, &exact).unwrap();
        assert!((r.value - h / 2f64.ln()).abs() < 1e-9);

        let dup3 = IfsSpec::rational_1d(&[("1/2", "0"), ("1/2", "0"), ("1/2", "1/2")]).unwrap();
        let r = dim_conformal(&dup3, &SymbolicMeasure::uniform(3), &DimOptions::default()).unwrap();
        let target = (3f64.ln() - 2.0 / 3.0 * 2f64.ln()) / 2f64.ln();
        assert!((r.value - target).abs() < 0.02, "{}", r.value);
    }

    #[test]
    fn per_map_ratios() {
        let s = IfsSpec::rational_1d(&[("1/2", "0"), ("1/4", "3/4")]).unwrap();
        let m = SymbolicMeasure::bernoulli(vec![q("1/2"), q("1/2")]).unwrap();
        let r = dim_conformal(&s, &m, &DimOptions::default()).unwrap();
        let expect = 2f64.ln() / (0.5 * 2f64.ln() + 0.5 * 4f64.ln());
        assert!((r.value - expect).abs() < 1e-12);
    }

    #[test]
    fn diagonal_product() {
        let s = IfsSpec::rational_product(&["1/2", "1/3"], &[vec!["0", "0"], vec!["1/2", "2/3"]]).unwrap();
        let r = dim_product(&s, &SymbolicMeasure::uniform(2), &DimOptions::default()).unwrap();
        assert_eq!(r.tau, vec![0, 1]);
        assert!((r.prefix_entropies[0].value - 2f64.ln()).abs() < 1e-12);
        assert!((r.prefix_entropies[1].value - 2f64.ln()).abs() < 1e-12);
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn permutation_invariance() {
        let a = IfsSpec::rational_product(
            &["1/2", "1/3"],
            &[vec!["0", "0"], vec!["1/2", "1/3"], vec!["0", "2/3"]],
        )
        .unwrap();
        let b = IfsSpec::rational_product(
            &["1/3", "1/2"],
            &[vec!["0", "0"], vec!["1/3", "1/2"], vec!["2/3", "0"]],
        )
        .unwrap();
        let m = SymbolicMeasure::uniform(3);
        let ra = dim_product(&a, &m, &DimOptions::default()).unwrap();
        let rb = dim_product(&b, &m, &DimOptions::default()).unwrap();
        assert_eq!(rb.tau, vec![1, 0]);
        assert!((ra.value - rb.value).abs() < 1e-9);
        // McMullen measure dimension: h(cols)/log2 + (log3 - h(cols))/log3
        let hc = -(2.0 / 3.0 * (2.0f64 / 3.0).ln() + 1.0 / 3.0 * (1.0f64 / 3.0).ln());
        let expect = hc / 2f64.ln() + (3f64.ln() - hc) / 3f64.ln();
        assert!((ra.value - expect).abs() < 1e-12);
    }

    #[test]
    fn equal_ratios_merge() {
        let g = IfsSpec::rational_product(&["1/2", "1/2"], &[vec!["0", "0"], vec!["1/2", "0"], vec!["0", "1/2"]]).unwrap();
        let r = dim_product(&g, &SymbolicMeasure::uniform(3), &DimOptions::default()).unwrap();
        assert_eq!(r.blocks, vec![vec![0, 1]]);
        assert!((r.value - 3f64.ln() / 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn osc_checks() {
        let dup3 = IfsSpec::rational_1d(&[("1/2", "0"), ("1/2", "0"), ("1/2", "1/2")]).unwrap();
        assert!(osc_certified(&dup3).unwrap());
        let over = IfsSpec::rational_1d(&[("1/2", "0"), ("1/2", "1/4"), ("1/2", "1/2")]).unwrap();
        assert!(!osc_certified(&over).unwrap());
    }
}
