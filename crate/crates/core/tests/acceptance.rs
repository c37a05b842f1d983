//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::Instant;

use fractdim::boxdim::{box_dimension, write_counts_csv};
use fractdim::coding::{all_words, sample_coding, SymbolicMeasure};
use fractdim::dims::{
    dim_conformal, local_dimension_mc, osc_certified, variational_optimize, write_slopes_csv, write_trace_csv,
    DimOptions, McOptions, OptimizeOptions,
};
use fractdim::ifs::IfsSpec;
use fractdim::numeric::{classify_pisot_salem, AlgebraicNumber, IntPoly, NumberField, PisotSalemClass, Rational};
use fractdim::overlap::{distinct_maps, DEFAULT_CAP};
use fractdim::projent::{projection_entropy, write_levels_csv, ProjectionEntropy, ProjentOptions};
use fractdim::sponge::{build_theta_chain, sponge_dimensions, write_weights_csv, SpongeOptions, SpongeSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

fn golden() -> IfsSpec {
    let field = NumberField::largest_root(IntPoly::from_i64(&[-1, -1, 1])).unwrap();
    let rho = AlgebraicNumber::parse(&field, "(-1, 1)").unwrap();
    IfsSpec::product(field, &[rho], &[vec!["0"], vec!["(2, -1)"]]).unwrap()
}

fn cantor() -> IfsSpec {
    IfsSpec::rational_1d(&[("1/3", "0"), ("1/3", "2/3")]).unwrap()
}

fn binary() -> IfsSpec {
    IfsSpec::rational_1d(&[("1/2", "0"), ("1/2", "1/2")]).unwrap()
}

fn dup3() -> IfsSpec {
    IfsSpec::rational_1d(&[("1/2", "0"), ("1/2", "0"), ("1/2", "1/2")]).unwrap()
}

fn exact_mode() -> DimOptions {
    DimOptions {
        closed_form: false,
        levels: 16,
        ..Default::default()
    }
}

/// Random systems `x/b + k/(b q)` with `b` in 2..=5 and up to four maps.
struct Case {
    spec: IfsSpec,
    b: u32,
    measure: SymbolicMeasure,
    n_max: usize,
    label: String,
}

fn suite() -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..20)
        .map(|_| {
            let b: u32 = rng.gen_range(2..=5);
            let l: usize = rng.gen_range(2..=4);
            let qd: u32 = rng.gen_range(1..=3);
            let digits: Vec<u32> = (0..l).map(|_| rng.gen_range(0..=(b - 1) * qd)).collect();
            let ratio = format!("1/{b}");
            let ts: Vec<String> = digits.iter().map(|k| format!("{k}/{}", b * qd)).collect();
            let maps: Vec<(&str, &str)> = ts.iter().map(|t| (ratio.as_str(), t.as_str())).collect();
            let spec = IfsSpec::rational_1d(&maps).unwrap();
            let w: Vec<u32> = (0..l).map(|_| rng.gen_range(1..=4)).collect();
            let total: u32 = w.iter().sum();
            let measure = SymbolicMeasure::bernoulli(w.iter().map(|x| Rational::new((*x).into(), total.into())).collect())
                .unwrap();
            // keep b^n within about 2^16
            let n_max = ((16.0 * 2f64.ln() / (b as f64).ln()).floor() as usize).min(12);
            Case {
                spec,
                b,
                measure,
                n_max,
                label: format!("b={b} t={ts:?} w={w:?}"),
            }
        })
        .collect()
}

fn c1() -> Outcome {
    let t = Instant::now();
    let n = distinct_maps(&golden(), 3, None, DEFAULT_CAP).unwrap().len();
    let secs = t.elapsed().as_secs_f64();
    // oracle: every translation sum_k t_{u_k} rho^{k-1} in exact field arithmetic
    let spec = golden();
    let rho = spec.factors()[0].maps()[0].ratio.clone();
    let mut values: Vec<AlgebraicNumber> = all_words(2, 3)
        .map(|w| {
            let mut acc = AlgebraicNumber::zero(spec.field());
            let mut scale = AlgebraicNumber::one(spec.field());
            for &s in w.symbols() {
                acc = &acc + &(&spec.factors()[0].maps()[s as usize].translation * &scale);
                scale = &scale * &rho;
            }
            acc
        })
        .collect();
    values.sort();
    values.dedup();
    outcome(
        n == 7 && values.len() == 7 && secs < 1.0,
        format!("golden-ratio system N_3 = {n}, brute force {} of 8 words; {secs:.3} s", values.len()),
    )
}

fn c2() -> Outcome {
    let t = Instant::now();
    let pe = projection_entropy(&dup3(), &SymbolicMeasure::uniform(3), 16, &ProjentOptions::default()).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let target = 3f64.ln() - 2.0 / 3.0 * 2f64.ln();
    // oracle: dyadic cells carry the digit measure (2/3, 1/3); sum -m log m directly
    let mut oracle_ok = true;
    for est in &pe.levels {
        let n = est.level as i32;
        let mut hn = 0.0;
        for ones in 0..=n {
            let m = (2.0f64 / 3.0).powi(n - ones) * (1.0f64 / 3.0).powi(ones);
            let count = binom(n as u64, ones as u64);
            hn -= count * m * m.ln();
        }
        oracle_ok &= (hn - est.total).abs() < 1e-9;
    }
    let e = &pe.estimate;
    let pass = e.lower <= target && target <= e.upper && e.width() <= 0.02 && oracle_ok && secs < 30.0;
    outcome(
        pass,
        format!(
            "dup3 h_pi in [{:.9}, {:.9}] (width {:.2e}), target {target:.9}, level totals match oracle: {oracle_ok}; {secs:.2} s",
            e.lower,
            e.upper,
            e.width()
        ),
    )
}

fn binom(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn c3(cases: &[Case], results: &[ProjectionEntropy]) -> Outcome {
    let mut violations = 0;
    let mut exact = 0;
    for (c, pe) in cases.iter().zip(results) {
        let hh = c.measure.shift_entropy();
        let e = &pe.estimate;
        if e.lower > hh + 1e-9 || e.upper < -1e-9 {
            violations += 1;
            println!("    violation: {} h_pi [{}, {}] h {}", c.label, e.lower, e.upper, hh);
        }
        if e.method.to_string() == "exact-pushforward" {
            exact += 1;
        }
    }
    outcome(
        violations == 0,
        format!("0 <= h_pi <= h on {} random systems, {violations} violations ({exact} exact, rest anchored)", cases.len()),
    )
}

/// Distance between two intervals (0 when they meet).
fn gap(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.1).max(b.0 - a.1).max(0.0)
}

fn c4(cases: &[Case], results: &[ProjectionEntropy]) -> Outcome {
    let opts = ProjentOptions::default();
    let debug = std::env::var("ACC_DEBUG").is_ok();
    let mut worst_aff: f64 = 0.0;
    let mut worst_pow: f64 = 0.0;
    let mut affinity_fails = 0;
    let mut sandwich_ok = true;
    for (c, pe2) in cases.iter().zip(results).take(10) {
        let uni = SymbolicMeasure::uniform(c.spec.alphabet());
        let pe1 = projection_entropy(&c.spec, &uni, c.n_max, &opts).unwrap();
        let (a, b) = (&pe1.estimate, &pe2.estimate);
        for p in ["1/4", "1/2", "3/4"] {
            let pq = q(p);
            let pf = lo_f(&pq);
            let mix = SymbolicMeasure::mixture(vec![(pq.clone(), uni.clone()), (q("1") - pq, c.measure.clone())]).unwrap();
            let pm = projection_entropy(&c.spec, &mix, c.n_max, &opts).unwrap();
            // per level: p H_n(m1) + (1-p) H_n(m2) <= H_n(mix) <= same + H(p)
            let hp = -pf * pf.ln() - (1.0 - pf) * (1.0 - pf).ln();
            for ((lm, l1), l2) in pm.levels.iter().zip(&pe1.levels).zip(&pe2.levels) {
                let affine = pf * l1.total + (1.0 - pf) * l2.total;
                sandwich_ok &= lm.total >= affine - 1e-9 && lm.total <= affine + hp + 1e-9;
            }
            let combo = (pf * a.lower + (1.0 - pf) * b.lower, pf * a.upper + (1.0 - pf) * b.upper);
            let g = gap((pm.estimate.lower, pm.estimate.upper), combo);
            if g > 0.01 {
                affinity_fails += 1;
            }
            if debug {
                println!(
                    "    {} p={p} n={} mix [{:.5}, {:.5}] combination [{:.5}, {:.5}] gap {g:.2e}",
                    c.label, c.n_max, pm.estimate.lower, pm.estimate.upper, combo.0, combo.1
                );
            }
            worst_aff = worst_aff.max(g);
        }

        let blocks = c.spec.block_system(2).unwrap();
        let m2 = c.measure.block_recode(2).unwrap();
        let pb = projection_entropy(&blocks, &m2, (c.n_max / 2).max(2), &opts).unwrap();
        worst_pow = worst_pow.max(gap((pb.estimate.lower, pb.estimate.upper), (2.0 * b.lower, 2.0 * b.upper)));
    }
    outcome(
        affinity_fails == 0 && worst_pow <= 0.01 && sandwich_ok,
        format!(
            "10 systems x p in {{1/4,1/2,3/4}}: {affinity_fails} affinity gaps over 0.01 (worst {worst_aff:.2e}); \
             worst power-rule gap {worst_pow:.2e}; per-level mixing sandwich holds: {sandwich_ok}"
        ),
    )
}

fn c5() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    let cases: Vec<(&str, IfsSpec, SymbolicMeasure, f64, f64, DimOptions)> = vec![
        ("Cantor", cantor(), SymbolicMeasure::uniform(2), 0.630930, 1e-6, exact_mode()),
        (
            "Besicovitch (3/4,1/4)",
            binary(),
            SymbolicMeasure::bernoulli(vec![q("3/4"), q("1/4")]).unwrap(),
            0.811278,
            1e-6,
            exact_mode(),
        ),
        ("dup3", dup3(), SymbolicMeasure::uniform(3), 0.91830, 0.02, exact_mode()),
    ];
    for (name, spec, m, target, tol, opts) in cases {
        let t = Instant::now();
        let r = dim_conformal(&spec, &m, &opts).unwrap();
        let secs = t.elapsed().as_secs_f64();
        let ok = (r.value - target).abs() <= tol && secs < 10.0;
        pass &= ok;
        parts.push(format!("{name} {:.7} ({}, {secs:.2} s)", r.value, r.method));
    }
    outcome(pass, parts.join("; "))
}

fn c6(cases: &[Case], results: &[ProjectionEntropy]) -> Outcome {
    let mut below = 0;
    let mut min_margin = f64::INFINITY;
    let mut osc_members = 0;
    let mut worst_eq: f64 = 0.0;
    let mut sup_excess: f64 = 0.0;
    for (c, pe) in cases.iter().zip(results) {
        let bd = box_dimension(&c.spec, c.n_max).unwrap();
        let lambda = (c.b as f64).ln();
        let dim_lo = pe.estimate.lower / lambda;
        let margin = bd.upper - dim_lo;
        min_margin = min_margin.min(margin);
        if margin < -1e-9 {
            below += 1;
            println!("    box rate {} below h_pi/lambda {} for {}", bd.upper, dim_lo, c.label);
        }
        if osc_certified(&c.spec).unwrap() {
            osc_members += 1;
            let opt = variational_optimize(&c.spec, &OptimizeOptions::with_seed(1)).unwrap();
            // the optimizer's sup is held to the equality tolerance; its
            // excess over the regression slope is reported
            sup_excess = sup_excess.max(opt.value - bd.upper);
            let d = (opt.value - bd.value).abs();
            worst_eq = worst_eq.max(d);
        }
    }
    outcome(
        below == 0 && worst_eq <= 0.03,
        format!(
            "box rate >= h_pi/lambda on {} systems (min margin {min_margin:.3e}, {below} violations); {osc_members} OSC members, worst |box - sup| {worst_eq:.3e}, largest sup - box rate {sup_excess:.3e}",
            cases.len()
        ),
    )
}

fn c7() -> Outcome {
    let t = Instant::now();
    let sp = SpongeSpec::parse(&["1/2", "1/3"], &[vec!["0", "0"], vec!["1/2", "1/3"], vec!["0", "2/3"]]).unwrap();
    let sd = sponge_dimensions(&sp, 6, &SpongeOptions::default()).unwrap();
    let opt = variational_optimize(&sp.to_ifs(), &OptimizeOptions::with_seed(7)).unwrap();
    let bd = box_dimension(&sp.to_ifs(), 6).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let agree = (sd.dim_h - opt.value).abs();
    let inside = sd.dim_h >= bd.lower - 0.03 && sd.dim_h <= bd.upper + 0.03;
    outcome(
        agree <= 1e-4 && inside && sd.dim_h <= sd.dim_b && secs < 120.0,
        format!(
            "carpet dim_H {:.8} vs optimizer {:.8} (diff {agree:.1e}); box bracket [{:.5}, {:.5}]; dim_B {:.5}; {secs:.1} s",
            sd.dim_h, opt.value, bd.lower, bd.upper, sd.dim_b
        ),
    )
}

fn c8() -> Outcome {
    let t = Instant::now();
    let g = classify_pisot_salem(&IntPoly::from_i64(&[-1, -1, 1])).unwrap();
    let s = classify_pisot_salem(&IntPoly::from_i64(&[1, -1, -1, -1, 1])).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let lo: Rational = s.dominant_lo.parse().unwrap();
    let hi: Rational = s.dominant_hi.parse().unwrap();
    // reference value to five decimals
    let contains = lo <= q("172209/100000") && hi >= q("172207/100000") && {
        let a = 1.72208;
        (s.dominant_approx - a).abs() < 5e-6
    };
    outcome(
        g.class == PisotSalemClass::Pisot
            && s.class == PisotSalemClass::Salem
            && s.trace_counts == Some([0, 1, 1])
            && contains
            && secs < 1.0,
        format!(
            "x^2-x-1: {}; x^4-x^3-x^2-x+1: {} with root in [{:.8}, {:.8}], trace-polynomial counts {:?}; {secs:.3} s",
            g.class,
            s.class,
            lo_f(&lo),
            lo_f(&hi),
            s.trace_counts
        ),
    )
}

fn lo_f(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap()
}

fn c9() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    let cases = vec![
        ("Cantor", cantor(), SymbolicMeasure::uniform(2)),
        ("Besicovitch", binary(), SymbolicMeasure::bernoulli(vec![q("3/4"), q("1/4")]).unwrap()),
        ("dup3", dup3(), SymbolicMeasure::uniform(3)),
    ];
    for (i, (name, spec, m)) in cases.into_iter().enumerate() {
        let t = Instant::now();
        let r = dim_conformal(&spec, &m, &exact_mode()).unwrap();
        let ld = local_dimension_mc(&spec, &m, &McOptions::with_seed(100 + i as u64)).unwrap();
        let secs = t.elapsed().as_secs_f64();
        let tol = 3.0 * (ld.std + (r.upper - r.lower));
        let ok = (ld.mean - r.value).abs() <= tol && secs < 120.0;
        pass &= ok;
        parts.push(format!(
            "{name} MC {:.4} +- {:.4} vs {:.4} ({secs:.1} s)",
            ld.mean, ld.std, r.value
        ));
    }
    outcome(pass, parts.join("; "))
}

/// Every artifact of the regression pipeline, serialized.
fn artifacts(cases: &[Case]) -> Vec<u8> {
    let mut out = Vec::new();
    for c in cases.iter().take(6) {
        let pe = projection_entropy(&c.spec, &c.measure, c.n_max.min(8), &ProjentOptions::default()).unwrap();
        write_levels_csv(&pe, &mut out).unwrap();
        let bd = box_dimension(&c.spec, c.n_max.min(6)).unwrap();
        write_counts_csv(&bd, &mut out).unwrap();
    }
    let small = McOptions {
        samples: 20_000,
        points: 64,
        k_min: 3,
        k_max: 8,
        seed: 9,
    };
    let ld = local_dimension_mc(&dup3(), &SymbolicMeasure::uniform(3), &small).unwrap();
    write_slopes_csv(&ld, &mut out).unwrap();
    let sp = SpongeSpec::parse(&["1/2", "1/3"], &[vec!["0", "0"], vec!["1/2", "1/3"], vec!["0", "2/3"]]).unwrap();
    let opt = variational_optimize(&sp.to_ifs(), &OptimizeOptions::with_seed(3)).unwrap();
    write_trace_csv(&opt, &mut out).unwrap();
    let sd = sponge_dimensions(&sp, 4, &SpongeOptions::default()).unwrap();
    let chain = build_theta_chain(&sp, 1, DEFAULT_CAP).unwrap();
    write_weights_csv(&chain, &sd.weights, &mut out).unwrap();
    out.extend(serde_json::to_vec(&sd).unwrap());
    out.extend(serde_json::to_vec(&opt.report).unwrap());
    out.extend(sample_coding(&SymbolicMeasure::uniform(3), 64, 42).to_string().bytes());
    out
}

fn c10(cases: &[Case]) -> Outcome {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| artifacts(cases))
    };
    let a = run(1);
    let b = run(4);
    let c = run(4);
    outcome(
        a == b && b == c,
        format!("{} artifact bytes identical across 3 runs (1, 4, 4 threads)", a.len()),
    )
}

fn main() {
    // `cargo test` passes harness flags such as `--nocapture`; a name filter
    // selects criteria by number
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |i: usize| filter.is_empty() || filter.contains(&i);

    let cases = suite();
    let needs_suite = [3, 4, 6].iter().any(|&i| wanted(i));
    let results: Vec<ProjectionEntropy> = if needs_suite {
        cases
            .iter()
            .map(|c| projection_entropy(&c.spec, &c.measure, c.n_max, &ProjentOptions::default()).unwrap())
            .collect()
    } else {
        Vec::new()
    };

    let criteria: Vec<(usize, &str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, "exact-overlap counting", Box::new(c1)),
        (2, "projection entropy with exact overlaps", Box::new(c2)),
        (3, "sandwich 0 <= h_pi <= h", Box::new(|| c3(&cases, &results))),
        (4, "affinity and power rule", Box::new(|| c4(&cases, &results))),
        (5, "dimension formulas", Box::new(c5)),
        (6, "box-dimension duality", Box::new(|| c6(&cases, &results))),
        (7, "sponge pipeline", Box::new(c7)),
        (8, "Pisot/Salem classifier", Box::new(c8)),
        (9, "Monte Carlo local dimension", Box::new(c9)),
        (10, "determinism", Box::new(|| c10(&cases))),
    ];
    let mut failed = 0;
    for (i, name, f) in criteria {
        if !wanted(i) {
            continue;
        }
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {i:>2} [{}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
