//! Nelder–Mead search for the Bernoulli measure of largest dimension.
//!
//! Weights live on the distinct maps of the length-`k` block system and are
//! parametrized by a softmax, so every trial point is a probability vector.

use std::cell::RefCell;
use std::io::Write;

use argmin::core::{CostFunction, Executor, State, TerminationReason, TerminationStatus};
use argmin::solver::neldermead::NelderMead;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{dim_product, osc_certified, DimOptions, DimensionReport};
use crate::coding::{SymbolicMeasure, Word};
use crate::error::{Error, Result};
use crate::ifs::{csv_err, IfsSpec};
use crate::numeric::Rational;

/// Denominator used when a trial weight vector needs exact arithmetic.
const WEIGHT_DENOMINATOR: i64 = 1 << 24;

#[derive(Debug, Clone, Copy)]
pub struct OptimizeOptions {
    /// Block length of the Bernoulli family.
    pub block: usize,
    pub starts: usize,
    /// Nelder–Mead iterations per start.
    pub max_iters: u64,
    pub seed: u64,
    pub dim: DimOptions,
}

impl OptimizeOptions {
    pub fn with_seed(seed: u64) -> Self {
        OptimizeOptions {
            block: 1,
            starts: 4,
            max_iters: 2000,
            seed,
            dim: DimOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub start: usize,
    pub eval: usize,
    pub value: f64,
    pub best: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeResult {
    /// One representative block word per distinct map.
    pub classes: Vec<String>,
    /// Optimal weight of each class.
    pub weights: Vec<f64>,
    pub value: f64,
    pub report: DimensionReport,
    /// Some start stopped on the iteration limit rather than converging.
    pub budget_exhausted: bool,
    pub trace: Vec<TraceRow>,
}

/// Closed-form evaluation when every prefix projection satisfies the OSC:
/// `h_j` is the entropy of the weights pushed to the distinct maps of prefix `j`.
struct ClosedForm {
    /// Symbol maps onto distinct prefix maps, and the block coefficients.
    prefixes: Vec<(Vec<u32>, usize, f64)>,
    /// Per-symbol exponents for a one-factor system with distinct ratios.
    lyapunov: Option<Vec<f64>>,
}

fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

impl ClosedForm {
    fn build(spec: &IfsSpec, dim: &DimOptions) -> Result<Option<ClosedForm>> {
        if !dim.closed_form {
            return Ok(None);
        }
        // the report for uniform weights carries tau, blocks and exponents
        let probe = dim_product(spec, &SymbolicMeasure::uniform(spec.alphabet()), dim)?;
        if probe.method != "closed-form" {
            return Ok(None);
        }
        let mut prefixes = Vec::new();
        let per_map = spec.shared_ratios().is_err();
        for (j, h) in probe.prefix_entropies.iter().enumerate() {
            let (reduced, g) = spec.project(&h.coords)?.collapse_duplicates();
            if !osc_certified(&reduced)? {
                return Ok(None);
            }
            let c = if per_map {
                1.0
            } else {
                let b = &probe.blocks;
                1.0 / probe.lambdas[b[j][0]] - b.get(j + 1).map(|n| 1.0 / probe.lambdas[n[0]]).unwrap_or(0.0)
            };
            prefixes.push((g, reduced.alphabet(), c));
        }
        let lyapunov = per_map.then(|| spec.factors()[0].ratios_f64().iter().map(|r| -r.ln()).collect());
        Ok(Some(ClosedForm { prefixes, lyapunov }))
    }

    fn eval(&self, p: &[f64]) -> f64 {
        let mut v = 0.0;
        for (g, n, c) in &self.prefixes {
            let mut q = vec![0.0; *n];
            for (i, w) in p.iter().enumerate() {
                q[g[i] as usize] += w;
            }
            v += c * entropy(&q);
        }
        match &self.lyapunov {
            Some(l) => v / p.iter().zip(l).map(|(a, b)| a * b).sum::<f64>(),
            None => v,
        }
    }
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(0.0, f64::max);
    let mut e: Vec<f64> = z.iter().map(|x| (x - m).exp()).collect();
    e.push((-m).exp());
    let s: f64 = e.iter().sum();
    e.iter().map(|x| x / s).collect()
}

pub(crate) fn rational_weights(p: &[f64]) -> Result<Vec<Rational>> {
    let d = WEIGHT_DENOMINATOR;
    let mut num: Vec<i64> = p.iter().map(|x| (x * d as f64).round() as i64).collect();
    let s: i64 = num.iter().sum();
    let top = (0..num.len()).max_by_key(|&i| num[i]).unwrap_or(0);
    num[top] += d - s;
    if num.iter().any(|&x| x < 0) {
        return Err(Error::InvalidMeasure("weights do not round to a distribution".into()));
    }
    Ok(num.into_iter().map(|x| Rational::new(BigInt::from(x), BigInt::from(d))).collect())
}

struct Objective<'a> {
    spec: &'a IfsSpec,
    closed: Option<&'a ClosedForm>,
    dim: DimOptions,
    evals: &'a RefCell<Vec<f64>>,
    error: &'a RefCell<Option<Error>>,
}

impl Objective<'_> {
    fn value(&self, p: &[f64]) -> Result<f64> {
        match self.closed {
            Some(c) => Ok(c.eval(p)),
            None => {
                let m = SymbolicMeasure::bernoulli(rational_weights(p)?)?;
                Ok(dim_product(self.spec, &m, &self.dim)?.value)
            }
        }
    }
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, z: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        match self.value(&softmax(z)) {
            Ok(v) => {
                self.evals.borrow_mut().push(v);
                Ok(-v)
            }
            Err(e) => {
                let msg = e.to_string();
                self.error.borrow_mut().get_or_insert(e);
                Err(argmin::core::Error::msg(msg))
            }
        }
    }
}

struct StartResult {
    z: Vec<f64>,
    value: f64,
    exhausted: bool,
    evals: Vec<f64>,
}

fn run_start(spec: &IfsSpec, closed: Option<&ClosedForm>, opts: &OptimizeOptions, z0: Vec<f64>) -> Result<StartResult> {
    let evals = RefCell::new(Vec::new());
    let error = RefCell::new(None);
    let obj = Objective {
        spec,
        closed,
        dim: opts.dim,
        evals: &evals,
        error: &error,
    };
    let mut simplex = vec![z0.clone()];
    for i in 0..z0.len() {
        let mut v = z0.clone();
        v[i] += 0.5;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(1e-14)
        .map_err(|e| Error::InvalidSpec(e.to_string()))?;
    let res = Executor::new(obj, solver).configure(|s| s.max_iters(opts.max_iters)).run();
    if let Some(e) = error.borrow_mut().take() {
        return Err(e);
    }
    let res = res.map_err(|e| Error::InvalidSpec(format!("optimizer: {e}")))?;
    let state = res.state();
    let z = state.get_best_param().cloned().unwrap_or(z0);
    let exhausted = matches!(
        state.get_termination_status(),
        TerminationStatus::Terminated(TerminationReason::MaxItersReached)
    );
    let value = -state.get_best_cost();
    Ok(StartResult {
        z,
        value,
        exhausted,
        evals: evals.into_inner(),
    })
}

/// Maximizes the dimension of Bernoulli measures on length-`k` blocks.
///
/// Blocks with identical maps are merged first, since only their total
/// weight affects the projected measure.
pub fn variational_optimize(spec: &IfsSpec, opts: &OptimizeOptions) -> Result<OptimizeResult> {
    if opts.starts == 0 {
        return Err(Error::InvalidSpec("at least one start is required".into()));
    }
    let blocks = spec.block_system(opts.block.max(1))?;
    let (reduced, g) = blocks.collapse_duplicates();
    let mut classes = vec![String::new(); reduced.alphabet()];
    for (i, &c) in g.iter().enumerate().rev() {
        classes[c as usize] = Word::from_symbols(vec![i as u32]).from_blocks(spec.alphabet(), opts.block.max(1)).to_string();
    }
    let c = reduced.alphabet();
    let closed = ClosedForm::build(&reduced, &opts.dim)?;

    let (weights, value, exhausted, trace) = if c == 1 {
        let m = SymbolicMeasure::uniform(1);
        let v = dim_product(&reduced, &m, &opts.dim)?.value;
        (vec![1.0], v, false, Vec::new())
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let starts: Vec<Vec<f64>> = (0..opts.starts)
            .map(|s| {
                (0..c - 1)
                    .map(|_| if s == 0 { 0.0 } else { rng.gen_range(-2.0..2.0) })
                    .collect()
            })
            .collect();
        let runs = starts
            .into_par_iter()
            .map(|z0| run_start(&reduced, closed.as_ref(), opts, z0))
            .collect::<Result<Vec<_>>>()?;
        let best = (0..runs.len())
            .max_by(|&a, &b| runs[a].value.total_cmp(&runs[b].value).then(b.cmp(&a)))
            .expect("nonempty");
        let mut trace = Vec::new();
        for (s, r) in runs.iter().enumerate() {
            let mut top = f64::NEG_INFINITY;
            for (e, v) in r.evals.iter().enumerate() {
                top = top.max(*v);
                trace.push(TraceRow {
                    start: s,
                    eval: e,
                    value: *v,
                    best: top,
                });
            }
        }
        (
            softmax(&runs[best].z),
            runs[best].value,
            runs.iter().any(|r| r.exhausted),
            trace,
        )
    };
    let m = SymbolicMeasure::bernoulli(rational_weights(&weights)?)?;
    let report = dim_product(&reduced, &m, &opts.dim)?;
    Ok(OptimizeResult {
        classes,
        weights,
        value,
        report,
        budget_exhausted: exhausted,
        trace,
    })
}

pub fn write_trace_csv<W: Write>(r: &OptimizeResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["start", "eval", "value", "best"]).map_err(csv_err)?;
    for t in &r.trace {
        w.write_record([
            t.start.to_string(),
            t.eval.to_string(),
            crate::fmt12(t.value),
            crate::fmt12(t.best),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_uniform() {
        let s = IfsSpec::rational_1d(&[("1/3", "0"), ("1/3", "2/3")]).unwrap();
        let r = variational_optimize(&s, &OptimizeOptions::with_seed(1)).unwrap();
        assert!((r.value - 2f64.ln() / 3f64.ln()).abs() < 1e-9);
        assert!((r.weights[0] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn duplicated_class() {
        let s = IfsSpec::rational_1d(&[("1/2", "0"), ("1/2", "0"), ("1/2", "1/2")]).unwrap();
        let r = variational_optimize(&s, &OptimizeOptions::with_seed(3)).unwrap();
        assert_eq!(r.classes, vec!["1", "3"]);
        assert!((r.value - 1.0).abs() < 1e-9);
        assert!((r.weights[0] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn mcmullen_weights() {
        // columns: {1,3} share x-digit 0; the optimum puts mass
        // 2^{log2/log3 - 1}/Z on the pair and 1/Z on the single column
        let s = IfsSpec::rational_product(&["1/2", "1/3"], &[vec!["0", "0"], vec!["1/2", "1/3"], vec!["0", "2/3"]]).unwrap();
        let r = variational_optimize(&s, &OptimizeOptions::with_seed(5)).unwrap();
        let a = 2f64.ln() / 3f64.ln();
        let expect = (2f64.powf(a) + 1.0).log2();
        assert!((r.value - expect).abs() < 1e-9, "{}", r.value);
        let z = 2f64.powf(a) + 1.0;
        assert!((r.weights[1] - 1.0 / z).abs() < 1e-4);
    }
}
