//! Affine iterated function systems with exact coefficients.
//!
//! Two shapes are supported: a single 1-D factor whose similarities may carry
//! different ratios, and direct products of 1-D factors in which all maps of
//! a factor share one ratio. Every coefficient lives in one number field (the
//! rationals by default), so map equality is decidable.

use std::io::Write;
use std::sync::Arc;

use crate::coding::{all_words, Word};
use crate::error::{Error, Result};
use crate::numeric::{AlgebraicNumber, NumberField, RatInterval, Rational};

/// `x -> ratio * x + translation`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffineMap1D {
    pub ratio: AlgebraicNumber,
    pub translation: AlgebraicNumber,
}

impl AffineMap1D {
    pub fn new(ratio: AlgebraicNumber, translation: AlgebraicNumber) -> Result<Self> {
        let one = AlgebraicNumber::one(ratio.field());
        if ratio.sign() <= 0 || (&one - &ratio).sign() <= 0 {
            return Err(Error::NotContractive(format!("ratio {ratio} outside (0,1)")));
        }
        Ok(AffineMap1D { ratio, translation })
    }

    pub fn apply(&self, x: &AlgebraicNumber) -> AlgebraicNumber {
        &(&self.ratio * x) + &self.translation
    }

    pub fn fixed_point(&self) -> AlgebraicNumber {
        let one = AlgebraicNumber::one(self.ratio.field());
        self.translation
            .div(&(&one - &self.ratio))
            .expect("ratio differs from 1")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub struct SpecFlags {
    /// Every factor shares one ratio across its maps.
    pub common_linear_part: bool,
    /// The user asserts the open set condition.
    pub osc_asserted: bool,
}

/// One coordinate of a direct product: `l` maps acting on the real line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    maps: Vec<AffineMap1D>,
}

impl Factor {
    pub fn maps(&self) -> &[AffineMap1D] {
        &self.maps
    }

    pub fn shared_ratio(&self) -> Option<&AlgebraicNumber> {
        let r = &self.maps[0].ratio;
        self.maps.iter().all(|m| &m.ratio == r).then_some(r)
    }

    pub fn ratios_f64(&self) -> Vec<f64> {
        self.maps.iter().map(|m| m.ratio.to_f64()).collect()
    }

    pub fn translations(&self) -> Vec<AlgebraicNumber> {
        self.maps.iter().map(|m| m.translation.clone()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct IfsSpec {
    field: Arc<NumberField>,
    alphabet: usize,
    factors: Vec<Factor>,
    flags: SpecFlags,
}

impl IfsSpec {
    /// `factors[j][i]` is the action of map `i` on coordinate `j`.
    pub fn new(field: Arc<NumberField>, factors: Vec<Vec<AffineMap1D>>, osc_asserted: bool) -> Result<Self> {
        let Some(first) = factors.first() else {
            return Err(Error::InvalidSpec("no factors".into()));
        };
        let alphabet = first.len();
        if alphabet == 0 {
            return Err(Error::InvalidSpec("no maps".into()));
        }
        if factors.iter().any(|f| f.len() != alphabet) {
            return Err(Error::InvalidSpec("factors have different numbers of maps".into()));
        }
        for m in factors.iter().flatten() {
            if !m.ratio.field().same_as(&field) || !m.translation.field().same_as(&field) {
                return Err(Error::InvalidSpec("coefficients from a different number field".into()));
            }
        }
        let factors: Vec<Factor> = factors.into_iter().map(|maps| Factor { maps }).collect();
        let common = factors.iter().all(|f| f.shared_ratio().is_some());
        if factors.len() > 1 && !common {
            return Err(Error::ShapeRequired(
                "a direct product needs one ratio per factor".into(),
            ));
        }
        Ok(IfsSpec {
            field,
            alphabet,
            factors,
            flags: SpecFlags {
                common_linear_part: common,
                osc_asserted,
            },
        })
    }

    /// Rational direct product: `ratios[j]` for factor `j`, `digits[i][j]` the translation of map `i`.
    pub fn rational_product(ratios: &[&str], digits: &[Vec<&str>]) -> Result<Self> {
        let field = NumberField::rationals();
        let rho = ratios
            .iter()
            .map(|r| AlgebraicNumber::parse(&field, r))
            .collect::<Result<Vec<_>>>()?;
        Self::product(field, &rho, digits)
    }

    /// Direct product with per-factor shared ratio, digits given as field-element strings.
    pub fn product(field: Arc<NumberField>, ratios: &[AlgebraicNumber], digits: &[Vec<&str>]) -> Result<Self> {
        let mut factors = vec![Vec::with_capacity(digits.len()); ratios.len()];
        for d in digits {
            if d.len() != ratios.len() {
                return Err(Error::InvalidSpec("digit tuple length differs from factor count".into()));
            }
            for (j, s) in d.iter().enumerate() {
                factors[j].push(AffineMap1D::new(ratios[j].clone(), AlgebraicNumber::parse(&field, s)?)?);
            }
        }
        Self::new(field, factors, false)
    }

    /// 1-D rational similarities `x -> r_i x + a_i`.
    pub fn rational_1d(maps: &[(&str, &str)]) -> Result<Self> {
        let field = NumberField::rationals();
        let maps = maps
            .iter()
            .map(|(r, a)| {
                AffineMap1D::new(AlgebraicNumber::parse(&field, r)?, AlgebraicNumber::parse(&field, a)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(field, vec![maps], false)
    }

    pub fn with_osc(mut self, osc: bool) -> Self {
        self.flags.osc_asserted = osc;
        self
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn flags(&self) -> SpecFlags {
        self.flags
    }

    pub fn map(&self, i: usize) -> Vec<&AffineMap1D> {
        self.factors.iter().map(|f| &f.maps[i]).collect()
    }

    /// Shared ratio of each factor, or `ShapeRequired`.
    pub fn shared_ratios(&self) -> Result<Vec<AlgebraicNumber>> {
        self.factors
            .iter()
            .map(|f| {
                f.shared_ratio()
                    .cloned()
                    .ok_or_else(|| Error::ShapeRequired("maps of a factor have different ratios".into()))
            })
            .collect()
    }

    /// Restriction to the given coordinates, in the given order.
    pub fn project(&self, coords: &[usize]) -> Result<IfsSpec> {
        if coords.is_empty() || coords.iter().any(|&c| c >= self.dim()) {
            return Err(Error::InvalidSpec("bad coordinate projection".into()));
        }
        let factors = coords.iter().map(|&c| self.factors[c].maps.clone()).collect();
        IfsSpec::new(self.field.clone(), factors, false)
    }

    /// Merges symbols whose maps coincide. Returns the reduced system and the
    /// symbol map `g` (old symbol to new), first occurrences kept in order.
    pub fn collapse_duplicates(&self) -> (IfsSpec, Vec<u32>) {
        let mut reps: Vec<usize> = Vec::new();
        let mut g = Vec::with_capacity(self.alphabet);
        for i in 0..self.alphabet {
            let found = reps.iter().position(|&r| self.map(r) == self.map(i));
            match found {
                Some(k) => g.push(k as u32),
                None => {
                    g.push(reps.len() as u32);
                    reps.push(i);
                }
            }
        }
        let factors = self
            .factors
            .iter()
            .map(|f| Factor {
                maps: reps.iter().map(|&r| f.maps[r].clone()).collect(),
            })
            .collect();
        let spec = IfsSpec {
            field: self.field.clone(),
            alphabet: reps.len(),
            factors,
            flags: self.flags,
        };
        (spec, g)
    }

    /// The system of all compositions of length `k`, indexed like [`Word::to_blocks`].
    pub fn block_system(&self, k: usize) -> Result<IfsSpec> {
        let size = (self.alphabet as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
        let cap = crate::coding::MAX_BLOCK_ALPHABET as u128;
        if k == 0 || size > cap {
            return Err(Error::CapExceeded { needed: size, cap });
        }
        let mut factors = vec![Vec::new(); self.dim()];
        for w in all_words(self.alphabet, k) {
            let c = compose(self, &w);
            for (j, (r, t)) in c.parts.into_iter().enumerate() {
                factors[j].push(AffineMap1D { ratio: r, translation: t });
            }
        }
        let mut s = IfsSpec::new(self.field.clone(), factors, self.flags.osc_asserted)?;
        s.flags.common_linear_part = self.flags.common_linear_part;
        Ok(s)
    }
}

/// `S_u = S_{u_1} o ... o S_{u_n}`, one `(ratio, translation)` pair per factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ComposedMap {
    pub parts: Vec<(AlgebraicNumber, AlgebraicNumber)>,
    pub word_length: usize,
}

impl ComposedMap {
    pub fn identity(spec: &IfsSpec) -> Self {
        let one = AlgebraicNumber::one(&spec.field);
        let zero = AlgebraicNumber::zero(&spec.field);
        ComposedMap {
            parts: vec![(one, zero); spec.dim()],
            word_length: 0,
        }
    }

    /// `self o other`.
    pub fn then(&self, other: &ComposedMap) -> ComposedMap {
        ComposedMap {
            parts: self
                .parts
                .iter()
                .zip(&other.parts)
                .map(|((r1, t1), (r2, t2))| (r1 * r2, t1 + &(r1 * t2)))
                .collect(),
            word_length: self.word_length + other.word_length,
        }
    }

    pub fn apply(&self, x: &[AlgebraicNumber]) -> Vec<AlgebraicNumber> {
        self.parts
            .iter()
            .zip(x)
            .map(|((r, t), x)| &(r * x) + t)
            .collect()
    }

    /// Image of a box (ratios are positive, so endpoints map to endpoints).
    pub fn apply_box(&self, b: &BoundingBox) -> BoundingBox {
        BoundingBox {
            coords: self
                .parts
                .iter()
                .zip(&b.coords)
                .map(|((r, t), (lo, hi))| (&(r * lo) + t, &(r * hi) + t))
                .collect(),
        }
    }

    /// Same affine map, ignoring word length.
    pub fn same_map(&self, other: &ComposedMap) -> bool {
        self.parts == other.parts
    }
}

pub fn compose(spec: &IfsSpec, u: &Word) -> ComposedMap {
    let mut parts = Vec::with_capacity(spec.dim());
    for f in &spec.factors {
        let mut r = AlgebraicNumber::one(&spec.field);
        let mut t = AlgebraicNumber::zero(&spec.field);
        for &s in u.symbols() {
            let m = &f.maps[s as usize];
            t = &t + &(&r * &m.translation);
            r = &r * &m.ratio;
        }
        parts.push((r, t));
    }
    ComposedMap {
        parts,
        word_length: u.len(),
    }
}

/// Per-coordinate closed interval `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoundingBox {
    pub coords: Vec<(AlgebraicNumber, AlgebraicNumber)>,
}

impl BoundingBox {
    pub fn widths(&self) -> Vec<AlgebraicNumber> {
        self.coords.iter().map(|(lo, hi)| hi - lo).collect()
    }

    pub fn midpoint(&self) -> Vec<AlgebraicNumber> {
        let half = AlgebraicNumber::from_rational(
            self.coords[0].0.field(),
            Rational::new(1.into(), 2.into()),
        );
        self.coords.iter().map(|(lo, hi)| &(lo + hi) * &half).collect()
    }

    pub fn contains_box(&self, other: &BoundingBox) -> bool {
        self.coords
            .iter()
            .zip(&other.coords)
            .all(|((lo, hi), (a, b))| a >= lo && b <= hi)
    }

    pub fn to_f64(&self) -> Vec<(f64, f64)> {
        self.coords.iter().map(|(a, b)| (a.to_f64(), b.to_f64())).collect()
    }
}

/// Smallest box spanned by the fixed points; it is invariant under every map.
pub fn invariant_box(spec: &IfsSpec) -> BoundingBox {
    let coords = spec
        .factors
        .iter()
        .map(|f| {
            let fps: Vec<AlgebraicNumber> = f.maps.iter().map(|m| m.fixed_point()).collect();
            let lo = fps.iter().min().cloned().expect("nonempty");
            let hi = fps.iter().max().cloned().expect("nonempty");
            (lo, hi)
        })
        .collect();
    let b = BoundingBox { coords };
    debug_assert!((0..spec.alphabet).all(|i| {
        let w = Word::from_symbols(vec![i as u32]);
        b.contains_box(&compose(spec, &w).apply_box(&b))
    }));
    b
}

/// Truncated coding map: `S_u` applied to the box midpoint, with per-coordinate
/// bound `|S_u| * width` on the distance to `pi(x)` for any extension `x` of `u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Truncation {
    pub point: Vec<AlgebraicNumber>,
    pub diameter_bound: Vec<AlgebraicNumber>,
}

pub fn pi_truncate(spec: &IfsSpec, u: &Word) -> Truncation {
    let b = invariant_box(spec);
    pi_truncate_in(spec, &b, u)
}

pub fn pi_truncate_in(spec: &IfsSpec, b: &BoundingBox, u: &Word) -> Truncation {
    let c = compose(spec, u);
    let point = c.apply(&b.midpoint());
    let diameter_bound = c
        .parts
        .iter()
        .zip(b.widths())
        .map(|((r, _), w)| r * &w)
        .collect();
    Truncation { point, diameter_bound }
}

/// Enclosure of `pi_truncate` points as rational intervals, for float-free comparisons.
pub fn enclose_point(p: &[AlgebraicNumber]) -> Vec<RatInterval> {
    p.iter()
        .map(|x| x.enclose(&x.field().enclosure().clone()))
        .collect()
}

/// Writes `word, ratio_power_j, translation_j` rows (exact strings).
pub fn write_composed_csv<W: Write>(spec: &IfsSpec, words: &[Word], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["word".to_string()];
    for j in 1..=spec.dim() {
        header.push(format!("ratio_power_{j}"));
        header.push(format!("translation_{j}"));
    }
    w.write_record(&header).map_err(csv_err)?;
    for u in words {
        let c = compose(spec, u);
        let mut row = vec![u.to_string()];
        for (r, t) in &c.parts {
            row.push(r.to_string());
            row.push(t.to_string());
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::IntPoly;

    fn binary() -> IfsSpec {
        IfsSpec::rational_product(&["1/2"], &[vec!["0"], vec!["1/2"]]).unwrap()
    }

    pub(crate) fn golden() -> IfsSpec {
        let field = NumberField::largest_root(IntPoly::from_i64(&[-1, -1, 1])).unwrap();
        let rho = AlgebraicNumber::parse(&field, "(-1, 1)").unwrap();
        IfsSpec::product(field, &[rho], &[vec!["0"], vec!["(2, -1)"]]).unwrap()
    }

    fn q(s: &str) -> AlgebraicNumber {
        AlgebraicNumber::parse(&NumberField::rationals(), s).unwrap()
    }

    #[test]
    fn composition_examples() {
        let s = binary();
        let c = compose(&s, &Word::parse("2", 2).unwrap());
        assert_eq!(c.parts[0], (q("1/2"), q("1/2")));
        let c = compose(&s, &Word::parse("21", 2).unwrap());
        assert_eq!(c.parts[0], (q("1/4"), q("1/2")));
        let g = golden();
        let a = compose(&g, &Word::parse("122", 2).unwrap());
        let b = compose(&g, &Word::parse("211", 2).unwrap());
        assert!(a.same_map(&b));
        assert_eq!(compose(&s, &Word::empty()), ComposedMap::identity(&s));
    }

    #[test]
    fn boxes() {
        let b = invariant_box(&binary());
        assert_eq!(b.coords[0], (q("0"), q("1")));
        let cantor = IfsSpec::rational_1d(&[("1/3", "0"), ("1/3", "2/3")]).unwrap();
        assert_eq!(invariant_box(&cantor).coords[0], (q("0"), q("1")));
        let g = golden();
        let gb = invariant_box(&g);
        assert_eq!(gb.coords[0].1, AlgebraicNumber::one(g.field()));
    }

    #[test]
    fn truncation() {
        let s = binary();
        let t = pi_truncate(&s, &Word::parse("111", 2).unwrap());
        assert_eq!(t.point[0], q("1/16"));
        assert_eq!(t.diameter_bound[0], q("1/8"));
        let t = pi_truncate(&s, &Word::parse("2222", 2).unwrap());
        assert_eq!(t.point[0], q("31/32"));
        assert_eq!(t.diameter_bound[0], q("1/16"));
    }

    #[test]
    fn validation_and_collapse() {
        assert!(IfsSpec::rational_1d(&[("1", "0")]).is_err());
        assert!(IfsSpec::rational_1d(&[("-1/2", "0")]).is_err());
        let dup = IfsSpec::rational_1d(&[("1/2", "0"), ("1/2", "0"), ("1/2", "1/2")]).unwrap();
        let (c, g) = dup.collapse_duplicates();
        assert_eq!(c.alphabet(), 2);
        assert_eq!(g, vec![0, 0, 1]);
        let per_map = IfsSpec::rational_1d(&[("1/2", "0"), ("1/4", "3/4")]).unwrap();
        assert!(!per_map.flags().common_linear_part);
        assert!(IfsSpec::new(
            per_map.field().clone(),
            vec![per_map.factors()[0].maps().to_vec(), per_map.factors()[0].maps().to_vec()],
            false
        )
        .is_err());
    }

    #[test]
    fn csv_export() {
        let mut buf = Vec::new();
        write_composed_csv(&binary(), &[Word::parse("21", 2).unwrap()], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "word,ratio_power_1,translation_1\n21,1/4,1/2\n"
        );
    }
}
