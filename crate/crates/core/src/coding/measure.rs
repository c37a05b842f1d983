use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::word::{all_words, Word};
use crate::error::{Error, Result};
use crate::numeric::linalg::{solve, Solution};
use crate::numeric::Rational;

/// Largest block alphabet produced by [`SymbolicMeasure::block_recode`].
pub const MAX_BLOCK_ALPHABET: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureKind {
    Bernoulli(Vec<Rational>),
    /// Stationary initial vector and row-stochastic transition matrix.
    Markov {
        init: Vec<Rational>,
        matrix: Vec<Vec<Rational>>,
    },
    /// Convex combination of invariant measures on a common alphabet.
    Mixture(Vec<(Rational, SymbolicMeasure)>),
}

/// Shift-invariant measure with exact probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicMeasure {
    alphabet: usize,
    kind: MeasureKind,
}

/// One nonzero entry of the linear representation: reading `symbol` moves
/// weight `weight` from state `from` to state `to`.
#[derive(Debug, Clone, PartialEq)]
pub struct RepTerm {
    pub symbol: u32,
    pub from: usize,
    pub to: usize,
    pub weight: Rational,
}

/// `m([u]) = alpha M_{u_1} ... M_{u_n} 1`, with `M_j[s][t]` given sparsely by `terms`.
/// Each state's outgoing weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRep {
    pub states: usize,
    pub alpha: Vec<Rational>,
    pub terms: Vec<RepTerm>,
}

fn check_probability_vector(p: &[Rational], what: &str) -> Result<()> {
    if p.iter().any(|x| x.is_negative()) {
        return Err(Error::InvalidMeasure(format!("{what} has a negative entry")));
    }
    let s: Rational = p.iter().sum();
    if !s.is_one() {
        return Err(Error::InvalidMeasure(format!("{what} sums to {s}, not 1")));
    }
    Ok(())
}

fn plogp(p: &Rational) -> f64 {
    if p.is_zero() {
        return 0.0;
    }
    let x = p.to_f64().unwrap_or(0.0);
    -x * x.ln()
}

fn is_irreducible(matrix: &[Vec<Rational>]) -> bool {
    let n = matrix.len();
    let reach = |rev: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(s) = stack.pop() {
            for t in 0..n {
                let edge = if rev { &matrix[t][s] } else { &matrix[s][t] };
                if !seen[t] && !edge.is_zero() {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen.into_iter().all(|b| b)
    };
    n > 0 && reach(false) && reach(true)
}

/// Stationary vector of an irreducible stochastic matrix; reducible chains are rejected.
pub fn stationary_vector(matrix: &[Vec<Rational>]) -> Result<Vec<Rational>> {
    let n = matrix.len();
    if n == 0 || matrix.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidMeasure("transition matrix must be square".into()));
    }
    for (i, row) in matrix.iter().enumerate() {
        check_probability_vector(row, &format!("row {}", i + 1))?;
    }
    if !is_irreducible(matrix) {
        return Err(Error::InvalidMeasure("transition matrix is reducible".into()));
    }
    // pi (P - I) = 0, sum pi = 1
    let mut a = vec![vec![Rational::zero(); n]; n + 1];
    for (j, row) in a.iter_mut().take(n).enumerate() {
        for (i, v) in row.iter_mut().enumerate() {
            *v = matrix[i][j].clone();
            if i == j {
                *v -= Rational::one();
            }
        }
    }
    a[n] = vec![Rational::one(); n];
    let mut b = vec![Rational::zero(); n + 1];
    b[n] = Rational::one();
    match solve(&a, &b) {
        Solution::Unique(x) => Ok(x),
        _ => Err(Error::InvalidMeasure("stationary vector is not unique".into())),
    }
}

impl SymbolicMeasure {
    pub fn bernoulli(p: Vec<Rational>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidMeasure("empty probability vector".into()));
        }
        check_probability_vector(&p, "probability vector")?;
        Ok(SymbolicMeasure {
            alphabet: p.len(),
            kind: MeasureKind::Bernoulli(p),
        })
    }

    pub fn uniform(alphabet: usize) -> Self {
        let p = Rational::new(BigInt::one(), BigInt::from(alphabet));
        SymbolicMeasure {
            alphabet,
            kind: MeasureKind::Bernoulli(vec![p; alphabet]),
        }
    }

    /// Markov measure; `init` must be exactly stationary for `matrix`.
    pub fn markov(init: Vec<Rational>, matrix: Vec<Vec<Rational>>) -> Result<Self> {
        let n = init.len();
        if n == 0 || matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMeasure("initial vector and matrix sizes disagree".into()));
        }
        check_probability_vector(&init, "initial vector")?;
        for (i, row) in matrix.iter().enumerate() {
            check_probability_vector(row, &format!("row {}", i + 1))?;
        }
        for j in 0..n {
            let s: Rational = (0..n).map(|i| &init[i] * &matrix[i][j]).sum();
            if s != init[j] {
                return Err(Error::InvalidMeasure(format!(
                    "initial vector is not stationary (component {})",
                    j + 1
                )));
            }
        }
        Ok(SymbolicMeasure {
            alphabet: n,
            kind: MeasureKind::Markov { init, matrix },
        })
    }

    /// Markov measure started from its stationary vector.
    pub fn markov_stationary(matrix: Vec<Vec<Rational>>) -> Result<Self> {
        let init = stationary_vector(&matrix)?;
        Self::markov(init, matrix)
    }

    pub fn mixture(components: Vec<(Rational, SymbolicMeasure)>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::InvalidMeasure("empty mixture".into()));
        };
        let alphabet = first.1.alphabet;
        if components.iter().any(|(_, m)| m.alphabet != alphabet) {
            return Err(Error::InvalidMeasure("mixture components use different alphabets".into()));
        }
        let w: Vec<Rational> = components.iter().map(|(c, _)| c.clone()).collect();
        check_probability_vector(&w, "mixture weights")?;
        Ok(SymbolicMeasure {
            alphabet,
            kind: MeasureKind::Mixture(components),
        })
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    pub fn as_bernoulli(&self) -> Option<&[Rational]> {
        match &self.kind {
            MeasureKind::Bernoulli(p) => Some(p),
            _ => None,
        }
    }

    pub fn cylinder_mass(&self, u: &Word) -> Rational {
        let s = u.symbols();
        match &self.kind {
            MeasureKind::Bernoulli(p) => s.iter().map(|&j| p[j as usize].clone()).product(),
            MeasureKind::Markov { init, matrix } => {
                let Some(&first) = s.first() else {
                    return Rational::one();
                };
                let mut m = init[first as usize].clone();
                for w in s.windows(2) {
                    if m.is_zero() {
                        break;
                    }
                    m *= &matrix[w[0] as usize][w[1] as usize];
                }
                m
            }
            MeasureKind::Mixture(c) => c.iter().map(|(w, m)| w * m.cylinder_mass(u)).sum(),
        }
    }

    /// `m([j])` for every symbol.
    pub fn marginals(&self) -> Vec<Rational> {
        match &self.kind {
            MeasureKind::Bernoulli(p) => p.clone(),
            MeasureKind::Markov { init, .. } => init.clone(),
            MeasureKind::Mixture(c) => {
                let mut out = vec![Rational::zero(); self.alphabet];
                for (w, m) in c {
                    for (o, v) in out.iter_mut().zip(m.marginals()) {
                        *o += w * v;
                    }
                }
                out
            }
        }
    }

    /// Kolmogorov–Sinai entropy in nats. Mixtures use affinity of entropy.
    pub fn shift_entropy(&self) -> f64 {
        match &self.kind {
            MeasureKind::Bernoulli(p) => p.iter().map(plogp).sum(),
            MeasureKind::Markov { init, matrix } => init
                .iter()
                .zip(matrix)
                .map(|(pi, row)| pi.to_f64().unwrap_or(0.0) * row.iter().map(plogp).sum::<f64>())
                .sum(),
            MeasureKind::Mixture(c) => c
                .iter()
                .map(|(w, m)| w.to_f64().unwrap_or(0.0) * m.shift_entropy())
                .sum(),
        }
    }

    /// `-sum_j m([j]) log rho_j` for per-symbol similarity ratios.
    pub fn lyapunov_exponent(&self, ratios: &[f64]) -> Result<f64> {
        if ratios.len() != self.alphabet {
            return Err(Error::InvalidMeasure(format!(
                "{} ratios for an alphabet of {}",
                ratios.len(),
                self.alphabet
            )));
        }
        if let Some(r) = ratios.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(Error::NotContractive(format!("ratio {r} outside (0,1)")));
        }
        Ok(self
            .marginals()
            .iter()
            .zip(ratios)
            .map(|(p, r)| -p.to_f64().unwrap_or(0.0) * r.ln())
            .sum())
    }

    /// Linear (hidden-state) representation used by exact pushforward computations.
    pub fn linear_rep(&self) -> LinearRep {
        match &self.kind {
            MeasureKind::Bernoulli(p) => LinearRep {
                states: 1,
                alpha: vec![Rational::one()],
                terms: p
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| !w.is_zero())
                    .map(|(j, w)| RepTerm {
                        symbol: j as u32,
                        from: 0,
                        to: 0,
                        weight: w.clone(),
                    })
                    .collect(),
            },
            MeasureKind::Markov { init, matrix } => {
                // state = previous symbol; stationarity makes alpha = init work for the first step
                let mut terms = Vec::new();
                for (s, row) in matrix.iter().enumerate() {
                    for (j, w) in row.iter().enumerate() {
                        if !w.is_zero() {
                            terms.push(RepTerm {
                                symbol: j as u32,
                                from: s,
                                to: j,
                                weight: w.clone(),
                            });
                        }
                    }
                }
                LinearRep {
                    states: init.len(),
                    alpha: init.clone(),
                    terms,
                }
            }
            MeasureKind::Mixture(c) => {
                let mut rep = LinearRep {
                    states: 0,
                    alpha: Vec::new(),
                    terms: Vec::new(),
                };
                for (w, m) in c {
                    let sub = m.linear_rep();
                    let off = rep.states;
                    rep.alpha.extend(sub.alpha.iter().map(|a| a * w));
                    rep.terms.extend(sub.terms.into_iter().map(|t| RepTerm {
                        from: t.from + off,
                        to: t.to + off,
                        ..t
                    }));
                    rep.states += sub.states;
                }
                rep
            }
        }
    }

    /// The measure of `k`-blocks viewed as a measure for the `k`-th power of the shift.
    pub fn block_recode(&self, k: usize) -> Result<SymbolicMeasure> {
        let big = (self.alphabet as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
        if k == 0 || big > MAX_BLOCK_ALPHABET as u128 {
            return Err(Error::CapExceeded {
                needed: big,
                cap: MAX_BLOCK_ALPHABET as u128,
            });
        }
        let l = self.alphabet;
        match &self.kind {
            MeasureKind::Bernoulli(_) => {
                SymbolicMeasure::bernoulli(all_words(l, k).map(|w| self.cylinder_mass(&w)).collect())
            }
            MeasureKind::Markov { matrix, .. } => {
                let words: Vec<Word> = all_words(l, k).collect();
                let init: Vec<Rational> = words.iter().map(|w| self.cylinder_mass(w)).collect();
                let inner: Vec<Rational> = words
                    .iter()
                    .map(|w| {
                        w.symbols()
                            .windows(2)
                            .map(|p| matrix[p[0] as usize][p[1] as usize].clone())
                            .product()
                    })
                    .collect();
                let m: Vec<Vec<Rational>> = words
                    .iter()
                    .map(|a| {
                        let last = *a.symbols().last().unwrap() as usize;
                        words
                            .iter()
                            .zip(&inner)
                            .map(|(b, ib)| &matrix[last][b.symbols()[0] as usize] * ib)
                            .collect()
                    })
                    .collect();
                SymbolicMeasure::markov(init, m)
            }
            MeasureKind::Mixture(c) => SymbolicMeasure::mixture(
                c.iter()
                    .map(|(w, m)| Ok((w.clone(), m.block_recode(k)?)))
                    .collect::<Result<Vec<_>>>()?,
            ),
        }
    }

    /// Image under the symbol map `j -> g[j]` onto an alphabet of size `target`.
    /// Markov measures are not closed under this operation and are rejected.
    pub fn push_forward(&self, g: &[u32], target: usize) -> Result<SymbolicMeasure> {
        if g.len() != self.alphabet || g.iter().any(|&t| t as usize >= target) {
            return Err(Error::InvalidMeasure("symbol map does not fit the alphabets".into()));
        }
        match &self.kind {
            MeasureKind::Bernoulli(p) => {
                let mut q = vec![Rational::zero(); target];
                for (j, w) in p.iter().enumerate() {
                    q[g[j] as usize] += w;
                }
                SymbolicMeasure::bernoulli(q)
            }
            MeasureKind::Markov { .. } => Err(Error::Unsupported(
                "symbol collapse of a Markov measure is not Markov".into(),
            )),
            MeasureKind::Mixture(c) => SymbolicMeasure::mixture(
                c.iter()
                    .map(|(w, m)| Ok((w.clone(), m.push_forward(g, target)?)))
                    .collect::<Result<Vec<_>>>()?,
            ),
        }
    }

    pub fn sampler(&self) -> CodingSampler {
        let dist = |w: &[Rational]| {
            let f: Vec<f64> = w.iter().map(|x| x.to_f64().unwrap_or(0.0)).collect();
            WeightedIndex::new(f).expect("validated probability vector")
        };
        match &self.kind {
            MeasureKind::Bernoulli(p) => CodingSampler::Bernoulli(dist(p)),
            MeasureKind::Markov { init, matrix } => CodingSampler::Markov {
                init: dist(init),
                rows: matrix
                    .iter()
                    .map(|r| {
                        if r.iter().all(|x| x.is_zero()) {
                            None
                        } else {
                            Some(dist(r))
                        }
                    })
                    .collect(),
            },
            MeasureKind::Mixture(c) => CodingSampler::Mixture {
                pick: dist(&c.iter().map(|(w, _)| w.clone()).collect::<Vec<_>>()),
                parts: c.iter().map(|(_, m)| m.sampler()).collect(),
            },
        }
    }
}

/// Precomputed sampling tables for a [`SymbolicMeasure`].
#[derive(Debug, Clone)]
pub enum CodingSampler {
    Bernoulli(WeightedIndex<f64>),
    Markov {
        init: WeightedIndex<f64>,
        rows: Vec<Option<WeightedIndex<f64>>>,
    },
    Mixture {
        pick: WeightedIndex<f64>,
        parts: Vec<CodingSampler>,
    },
}

impl CodingSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Word {
        match self {
            CodingSampler::Bernoulli(d) => {
                Word::from_symbols((0..n).map(|_| d.sample(rng) as u32).collect())
            }
            CodingSampler::Markov { init, rows } => {
                let mut v = Vec::with_capacity(n);
                if n > 0 {
                    let mut s = init.sample(rng);
                    v.push(s as u32);
                    for _ in 1..n {
                        s = rows[s].as_ref().expect("reachable state").sample(rng);
                        v.push(s as u32);
                    }
                }
                Word::from_symbols(v)
            }
            CodingSampler::Mixture { pick, parts } => parts[pick.sample(rng)].sample(rng, n),
        }
    }
}

/// Draws one coding of length `n` from a generator seeded with `seed`.
pub fn sample_coding(m: &SymbolicMeasure, n: usize, seed: u64) -> Word {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    m.sampler().sample(&mut rng, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn w(s: &str, l: usize) -> Word {
        Word::parse(s, l).unwrap()
    }

    #[test]
    fn cylinder_masses() {
        let m = SymbolicMeasure::uniform(3);
        assert_eq!(m.cylinder_mass(&w("12", 3)), q(1, 9));
        assert_eq!(SymbolicMeasure::uniform(2).cylinder_mass(&Word::empty()), q(1, 1));
        let half = vec![q(1, 2), q(1, 2)];
        let mk = SymbolicMeasure::markov(half.clone(), vec![half.clone(), half]).unwrap();
        assert_eq!(mk.cylinder_mass(&w("121", 2)), q(1, 8));
    }

    #[test]
    fn entropies() {
        assert!((SymbolicMeasure::uniform(3).shift_entropy() - 3f64.ln()).abs() < 1e-14);
        let point = SymbolicMeasure::bernoulli(vec![q(1, 1), q(0, 1)]).unwrap();
        assert_eq!(point.shift_entropy(), 0.0);
        let b = SymbolicMeasure::bernoulli(vec![q(2, 3), q(1, 3)]).unwrap();
        assert!((b.shift_entropy() - 0.636_514_168_294_813_4).abs() < 1e-13);
    }

    #[test]
    fn lyapunov() {
        let l = SymbolicMeasure::uniform(2).lyapunov_exponent(&[0.5, 0.25]).unwrap();
        assert!((l - 1.5 * 2f64.ln()).abs() < 1e-14);
        assert!(SymbolicMeasure::uniform(2).lyapunov_exponent(&[0.5, 1.0]).is_err());
    }

    #[test]
    fn validation() {
        assert!(SymbolicMeasure::bernoulli(vec![q(1, 2), q(1, 3)]).is_err());
        assert!(SymbolicMeasure::bernoulli(vec![q(3, 2), q(-1, 2)]).is_err());
        let p = vec![vec![q(1, 2), q(1, 2)], vec![q(1, 1), q(0, 1)]];
        assert!(SymbolicMeasure::markov(vec![q(1, 2), q(1, 2)], p.clone()).is_err());
        let m = SymbolicMeasure::markov_stationary(p).unwrap();
        assert_eq!(m.marginals(), vec![q(2, 3), q(1, 3)]);
        let reducible = vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(1, 1)]];
        assert!(stationary_vector(&reducible).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let point = SymbolicMeasure::bernoulli(vec![q(1, 1), q(0, 1)]).unwrap();
        assert_eq!(sample_coding(&point, 5, 7).to_string(), "11111");
        let u = SymbolicMeasure::uniform(2);
        assert_eq!(sample_coding(&u, 8, 42), sample_coding(&u, 8, 42));
    }

    #[test]
    fn linear_rep_reproduces_cylinders() {
        let p = vec![vec![q(1, 3), q(2, 3)], vec![q(3, 4), q(1, 4)]];
        let mk = SymbolicMeasure::markov_stationary(p).unwrap();
        let mix = SymbolicMeasure::mixture(vec![
            (q(1, 4), mk),
            (q(3, 4), SymbolicMeasure::bernoulli(vec![q(1, 5), q(4, 5)]).unwrap()),
        ])
        .unwrap();
        let rep = mix.linear_rep();
        for u in all_words(2, 4) {
            let mut v = rep.alpha.clone();
            for &j in u.symbols() {
                let mut next = vec![Rational::zero(); rep.states];
                for t in rep.terms.iter().filter(|t| t.symbol == j) {
                    next[t.to] += &v[t.from] * &t.weight;
                }
                v = next;
            }
            let total: Rational = v.into_iter().sum();
            assert_eq!(total, mix.cylinder_mass(&u));
        }
    }

    #[test]
    fn block_recoding_multiplies_entropy() {
        let b = SymbolicMeasure::bernoulli(vec![q(2, 3), q(1, 3)]).unwrap();
        let b3 = b.block_recode(3).unwrap();
        assert!((b3.shift_entropy() - 3.0 * b.shift_entropy()).abs() < 1e-12);
        let mk = SymbolicMeasure::markov_stationary(vec![vec![q(1, 3), q(2, 3)], vec![q(3, 4), q(1, 4)]])
            .unwrap();
        let mk2 = mk.block_recode(2).unwrap();
        assert!((mk2.shift_entropy() - 2.0 * mk.shift_entropy()).abs() < 1e-12);
        let u = Word::parse("1221", 2).unwrap();
        assert_eq!(mk2.cylinder_mass(&u.to_blocks(2, 2).unwrap()), mk.cylinder_mass(&u));
    }
}
