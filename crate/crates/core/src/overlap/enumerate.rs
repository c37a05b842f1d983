use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::coding::SymbolicMeasure;
use crate::error::{Error, Result};
use crate::ifs::{AffineMap1D, BoundingBox, ComposedMap, IfsSpec};
use crate::numeric::{AlgebraicNumber, NumberField, Rational};

/// Default bound on candidate maps generated at one level.
pub const DEFAULT_CAP: u128 = 100_000_000;

#[derive(Debug, Clone)]
enum Keys {
    /// Shared-ratio systems: translation coordinate `(j, c)` of class `i` is
    /// `keys[i * stride + j * deg + c] / scale[j]` in the power basis.
    Lattice {
        deg: usize,
        scale: Vec<BigInt>,
        ratio_powers: Vec<AlgebraicNumber>,
        keys: Vec<i128>,
    },
    Generic(Vec<ComposedMap>),
}

/// Distinct composed maps `S_u`, `|u| = n`, with word counts and optional masses.
#[derive(Debug, Clone)]
pub struct ClassTable {
    field: Arc<NumberField>,
    dim: usize,
    level: usize,
    keys: Keys,
    counts: Vec<u128>,
    masses: Option<Vec<Rational>>,
    level_sizes: Vec<usize>,
}

struct Transfer {
    states: usize,
    alpha: Vec<Rational>,
    /// per symbol: (from, to, weight)
    by_symbol: Vec<Vec<(usize, usize, Rational)>>,
}

impl Transfer {
    fn new(m: &SymbolicMeasure) -> Self {
        let rep = m.linear_rep();
        let mut by_symbol = vec![Vec::new(); m.alphabet()];
        for t in rep.terms {
            by_symbol[t.symbol as usize].push((t.from, t.to, t.weight));
        }
        Transfer {
            states: rep.states,
            alpha: rep.alpha,
            by_symbol,
        }
    }

    fn step(&self, v: &[Rational], j: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.states];
        for (s, t, w) in &self.by_symbol[j] {
            if !v[*s].is_zero() {
                out[*t] += &v[*s] * w;
            }
        }
        out
    }
}

fn add_into(acc: &mut [Rational], v: &[Rational]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

fn lcm_denoms(acc: &BigInt, x: &AlgebraicNumber) -> BigInt {
    x.coords().iter().fold(acc.clone(), |m, c| m.lcm(c.denom()))
}

fn to_i128(x: &BigInt, level: usize) -> Result<i128> {
    x.to_i128().ok_or(Error::Overflow(level))
}

impl ClassTable {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    /// `N_k` for `k = 0..=level`.
    pub fn level_sizes(&self) -> &[usize] {
        &self.level_sizes
    }

    /// Number of words in each class.
    pub fn counts(&self) -> &[u128] {
        &self.counts
    }

    /// Aggregated cylinder masses, when a measure was supplied.
    pub fn masses(&self) -> Option<&[Rational]> {
        self.masses.as_deref()
    }

    /// Common ratio powers `rho_j^n` (shared-ratio systems only).
    pub fn ratio_powers(&self) -> Option<&[AlgebraicNumber]> {
        match &self.keys {
            Keys::Lattice { ratio_powers, .. } => Some(ratio_powers),
            Keys::Generic(_) => None,
        }
    }

    /// Integer lattice keys of class `i` and their per-factor scale (shared-ratio systems).
    pub fn lattice_key(&self, i: usize) -> Option<(&[i128], &[BigInt])> {
        match &self.keys {
            Keys::Lattice { deg, scale, keys, .. } => {
                let stride = deg * self.dim;
                Some((&keys[i * stride..(i + 1) * stride], scale))
            }
            Keys::Generic(_) => None,
        }
    }

    pub fn map(&self, i: usize) -> ComposedMap {
        match &self.keys {
            Keys::Generic(maps) => maps[i].clone(),
            Keys::Lattice {
                deg,
                scale,
                ratio_powers,
                keys,
            } => {
                let stride = deg * self.dim;
                let k = &keys[i * stride..(i + 1) * stride];
                let parts = (0..self.dim)
                    .map(|j| {
                        let coords = (0..*deg)
                            .map(|c| Rational::new(BigInt::from(k[j * deg + c]), scale[j].clone()))
                            .collect();
                        let t = AlgebraicNumber::from_coords(&self.field, coords).expect("field degree");
                        (ratio_powers[j].clone(), t)
                    })
                    .collect();
                ComposedMap {
                    parts,
                    word_length: self.level,
                }
            }
        }
    }

    pub fn image_box(&self, i: usize, b: &BoundingBox) -> BoundingBox {
        self.map(i).apply_box(b)
    }
}

/// Enumerates the distinct maps `S_u`, `|u| = n`, merging equal maps level by level.
///
/// Work per level is `N_{k-1} * l`; `cap` bounds that product.
pub fn distinct_maps(
    spec: &IfsSpec,
    n: usize,
    measure: Option<&SymbolicMeasure>,
    cap: u128,
) -> Result<ClassTable> {
    if let Some(m) = measure {
        if m.alphabet() != spec.alphabet() {
            return Err(Error::InvalidMeasure(format!(
                "measure alphabet {} differs from system alphabet {}",
                m.alphabet(),
                spec.alphabet()
            )));
        }
    }
    let transfer = measure.map(Transfer::new);
    if spec.flags().common_linear_part {
        enumerate_lattice(spec, n, transfer.as_ref(), cap)
    } else {
        enumerate_generic(spec, n, transfer.as_ref(), cap)
    }
}

fn check_cap(classes: usize, alphabet: usize, cap: u128) -> Result<()> {
    let needed = classes as u128 * alphabet as u128;
    if needed > cap {
        return Err(Error::CapExceeded { needed, cap });
    }
    Ok(())
}

type Child = (Vec<i128>, u128, Option<Vec<Rational>>);

fn enumerate_lattice(spec: &IfsSpec, n: usize, transfer: Option<&Transfer>, cap: u128) -> Result<ClassTable> {
    let field = spec.field().clone();
    let deg = field.degree();
    let dim = spec.dim();
    let stride = deg * dim;
    let l = spec.alphabet();
    let ratios = spec.shared_ratios()?;
    let digits: Vec<Vec<AlgebraicNumber>> = spec.factors().iter().map(|f| f.translations()).collect();

    let mut scale = vec![BigInt::one(); dim];
    let mut powers: Vec<AlgebraicNumber> = vec![AlgebraicNumber::one(&field); dim];
    let mut keys: Vec<i128> = vec![0; stride];
    let mut counts: Vec<u128> = vec![1];
    let mut state: Option<Vec<Vec<Rational>>> = transfer.map(|t| vec![t.alpha.clone()]);
    let mut level_sizes = vec![1usize];

    for level in 0..n {
        check_cap(counts.len(), l, cap)?;
        // contributions rho_j^level * a_{i,j}, rescaled to the new common denominator
        let shifts: Vec<Vec<AlgebraicNumber>> = (0..dim)
            .map(|j| digits[j].iter().map(|a| &powers[j] * a).collect())
            .collect();
        let mut new_scale = Vec::with_capacity(dim);
        let mut factor = Vec::with_capacity(dim);
        for j in 0..dim {
            let s = shifts[j].iter().fold(scale[j].clone(), |m, x| lcm_denoms(&m, x));
            factor.push(to_i128(&(&s / &scale[j]), level + 1)?);
            new_scale.push(s);
        }
        // add[i][(j, c)] = new_scale_j * coord_c(rho_j^level a_{i,j})
        let mut add = vec![vec![0i128; stride]; l];
        for (i, row) in add.iter_mut().enumerate() {
            for j in 0..dim {
                for (c, x) in shifts[j][i].coords().iter().enumerate() {
                    let v = x * Rational::from_integer(new_scale[j].clone());
                    row[j * deg + c] = to_i128(&v.to_integer(), level + 1)?;
                }
            }
        }

        let children: Result<Vec<Vec<Child>>> = (0..counts.len())
            .into_par_iter()
            .map(|u| {
                let base = &keys[u * stride..(u + 1) * stride];
                let mut scaled = vec![0i128; stride];
                for j in 0..dim {
                    for c in 0..deg {
                        let idx = j * deg + c;
                        scaled[idx] = base[idx].checked_mul(factor[j]).ok_or(Error::Overflow(level + 1))?;
                    }
                }
                let mut out = Vec::with_capacity(l);
                for (i, a) in add.iter().enumerate() {
                    let mut k = scaled.clone();
                    for (x, y) in k.iter_mut().zip(a) {
                        *x = x.checked_add(*y).ok_or(Error::Overflow(level + 1))?;
                    }
                    let mass = match (transfer, &state) {
                        (Some(t), Some(st)) => Some(t.step(&st[u], i)),
                        _ => None,
                    };
                    out.push((k, counts[u], mass));
                }
                Ok(out)
            })
            .collect();
        let mut flat: Vec<Child> = children?.into_iter().flatten().collect();
        flat.par_sort_unstable_by(|a, b| a.0.cmp(&b.0));

        let mut new_keys = Vec::with_capacity(flat.len() * stride / 2);
        let mut new_counts: Vec<u128> = Vec::new();
        let mut new_state: Vec<Vec<Rational>> = Vec::new();
        let mut prev: Option<Vec<i128>> = None;
        for (k, c, m) in flat {
            if prev.as_ref() == Some(&k) {
                let last = new_counts.len() - 1;
                new_counts[last] = new_counts[last].saturating_add(c);
                if let Some(m) = m {
                    add_into(&mut new_state[last], &m);
                }
            } else {
                new_keys.extend_from_slice(&k);
                new_counts.push(c);
                if let Some(m) = m {
                    new_state.push(m);
                }
                prev = Some(k);
            }
        }
        keys = new_keys;
        counts = new_counts;
        if state.is_some() {
            state = Some(new_state);
        }
        scale = new_scale;
        for j in 0..dim {
            powers[j] = &powers[j] * &ratios[j];
        }
        level_sizes.push(counts.len());
    }

    let masses = state.map(|st| st.into_iter().map(|v| v.into_iter().sum()).collect());
    Ok(ClassTable {
        field,
        dim,
        level: n,
        keys: Keys::Lattice {
            deg,
            scale,
            ratio_powers: powers,
            keys,
        },
        counts,
        masses,
        level_sizes,
    })
}

fn enumerate_generic(spec: &IfsSpec, n: usize, transfer: Option<&Transfer>, cap: u128) -> Result<ClassTable> {
    let field = spec.field().clone();
    let l = spec.alphabet();
    let symbol_maps: Vec<Vec<&AffineMap1D>> = (0..l).map(|i| spec.map(i)).collect();
    let mut maps = vec![ComposedMap::identity(spec)];
    let mut counts: Vec<u128> = vec![1];
    let mut state: Option<Vec<Vec<Rational>>> = transfer.map(|t| vec![t.alpha.clone()]);
    let mut level_sizes = vec![1usize];

    for _ in 0..n {
        check_cap(maps.len(), l, cap)?;
        let children: Vec<Vec<(ComposedMap, u128, Option<Vec<Rational>>)>> = maps
            .par_iter()
            .enumerate()
            .map(|(u, cm)| {
                symbol_maps
                    .iter()
                    .enumerate()
                    .map(|(i, sm)| {
                        let parts = cm
                            .parts
                            .iter()
                            .zip(sm)
                            .map(|((r, t), m)| (r * &m.ratio, t + &(r * &m.translation)))
                            .collect();
                        let mass = match (transfer, &state) {
                            (Some(t), Some(st)) => Some(t.step(&st[u], i)),
                            _ => None,
                        };
                        (
                            ComposedMap {
                                parts,
                                word_length: cm.word_length + 1,
                            },
                            counts[u],
                            mass,
                        )
                    })
                    .collect()
            })
            .collect();
        let mut merged: BTreeMap<Vec<(AlgebraicNumber, AlgebraicNumber)>, (u128, Option<Vec<Rational>>)> =
            BTreeMap::new();
        for (cm, c, m) in children.into_iter().flatten() {
            match merged.get_mut(&cm.parts) {
                Some(entry) => {
                    entry.0 = entry.0.saturating_add(c);
                    if let (Some(acc), Some(m)) = (entry.1.as_mut(), m) {
                        add_into(acc, &m);
                    }
                }
                None => {
                    merged.insert(cm.parts, (c, m));
                }
            }
        }
        let level = maps[0].word_length + 1;
        maps = Vec::with_capacity(merged.len());
        counts = Vec::with_capacity(merged.len());
        let mut new_state = Vec::new();
        for (parts, (c, m)) in merged {
            maps.push(ComposedMap {
                parts,
                word_length: level,
            });
            counts.push(c);
            if let Some(m) = m {
                new_state.push(m);
            }
        }
        if state.is_some() {
            state = Some(new_state);
        }
        level_sizes.push(maps.len());
    }

    let masses = state.map(|st| st.into_iter().map(|v| v.into_iter().sum()).collect());
    Ok(ClassTable {
        field,
        dim: spec.dim(),
        level: n,
        keys: Keys::Generic(maps),
        counts,
        masses,
        level_sizes,
    })
}
