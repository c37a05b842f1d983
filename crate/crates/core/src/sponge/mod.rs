//! Self-affine sponges: products of 1-D families with strictly ordered ratios
//! `rho_1 > ... > rho_d`, the `Z_j` recursion over prefix classes, the
//! associated Bernoulli weights, and the Hausdorff and box dimensions.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::coding::SymbolicMeasure;
use crate::dims::{dim_product, DimOptions, DimensionReport};
use crate::error::{Error, Result};
use crate::ifs::{csv_err, AffineMap1D, ComposedMap, IfsSpec};
use crate::numeric::{parse_rational, AlgebraicNumber, NumberField, Rational};
use crate::overlap::{awsc_diagnostic, distinct_maps, AwscVerdict, DEFAULT_AWSC_EPS, DEFAULT_CAP};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpongeSpec {
    ratios: Vec<Rational>,
    digits: Vec<Vec<Rational>>,
}

impl SpongeSpec {
    pub fn new(ratios: Vec<Rational>, digits: Vec<Vec<Rational>>) -> Result<Self> {
        let zero = Rational::from_integer(0.into());
        let one = Rational::from_integer(1.into());
        if ratios.is_empty() || digits.is_empty() {
            return Err(Error::DegenerateInput("a sponge needs a factor and a map".into()));
        }
        if ratios.iter().any(|r| *r <= zero || *r >= one) {
            return Err(Error::NotContractive("ratios must lie in (0, 1)".into()));
        }
        if ratios.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::ShapeRequired("ratios must be strictly decreasing".into()));
        }
        if digits.iter().any(|d| d.len() != ratios.len()) {
            return Err(Error::InvalidSpec("each digit tuple needs one entry per factor".into()));
        }
        Ok(SpongeSpec { ratios, digits })
    }

    pub fn parse(ratios: &[&str], digits: &[Vec<&str>]) -> Result<Self> {
        let r = ratios.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?;
        let d = digits
            .iter()
            .map(|t| t.iter().map(|s| parse_rational(s)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        SpongeSpec::new(r, d)
    }

    /// A rational product system with one shared ratio per factor, with
    /// factors reordered by decreasing ratio. Returns the order used.
    pub fn from_ifs(spec: &IfsSpec) -> Result<(Self, Vec<usize>)> {
        if !spec.field().is_rational() {
            return Err(Error::ShapeRequired("sponges need rational ratios and digits".into()));
        }
        let ratios = spec.shared_ratios()?;
        let mut order: Vec<usize> = (0..spec.dim()).collect();
        order.sort_by(|&a, &b| ratios[b].cmp(&ratios[a]));
        let rat = |x: &AlgebraicNumber| x.as_rational().cloned().expect("rational field");
        let r = order.iter().map(|&j| rat(&ratios[j])).collect();
        let d = (0..spec.alphabet())
            .map(|i| {
                let m = spec.map(i);
                order.iter().map(|&j| rat(&m[j].translation)).collect()
            })
            .collect();
        Ok((SpongeSpec::new(r, d)?, order))
    }

    pub fn dim(&self) -> usize {
        self.ratios.len()
    }

    pub fn alphabet(&self) -> usize {
        self.digits.len()
    }

    pub fn ratios(&self) -> &[Rational] {
        &self.ratios
    }

    pub fn digits(&self) -> &[Vec<Rational>] {
        &self.digits
    }

    /// `lambda_j = log(1/rho_j)`.
    pub fn lambdas(&self) -> Vec<f64> {
        self.ratios.iter().map(|r| -ln_rational(r)).collect()
    }

    pub fn to_ifs(&self) -> IfsSpec {
        let field = NumberField::rationals();
        let factors = (0..self.dim())
            .map(|j| {
                self.digits
                    .iter()
                    .map(|d| {
                        AffineMap1D::new(
                            AlgebraicNumber::from_rational(&field, self.ratios[j].clone()),
                            AlgebraicNumber::from_rational(&field, d[j].clone()),
                        )
                        .expect("validated ratio")
                    })
                    .collect()
            })
            .collect();
        IfsSpec::new(field, factors, false).expect("validated sponge")
    }
}

fn ln_rational(r: &Rational) -> f64 {
    crate::projent::ln_big(r.numer()) - crate::projent::ln_big(r.denom())
}

/// Prefix classes `Omega_1, ..., Omega_d` of length-`n` words and the maps
/// `theta_j: Omega_{j+1} -> Omega_j`.
#[derive(Debug, Clone)]
pub struct ThetaChain {
    pub n: usize,
    /// `sizes[j - 1] = |Omega_j|`.
    pub sizes: Vec<usize>,
    /// `theta[j - 1][u]` is the class in `Omega_j` of `u` in `Omega_{j+1}`.
    pub theta: Vec<Vec<usize>>,
    /// Composed maps of the classes in `Omega_d`.
    pub maps: Vec<ComposedMap>,
}

impl ThetaChain {
    /// Image of `u` in `Omega_d` under `theta_j o ... o theta_{d-1}`.
    pub fn image(&self, u: usize, j: usize) -> usize {
        let mut c = u;
        for k in (j..self.sizes.len()).rev() {
            c = self.theta[k - 1][c];
        }
        c
    }
}

pub fn build_theta_chain(spec: &SpongeSpec, n: usize, cap: u128) -> Result<ThetaChain> {
    if n == 0 {
        return Err(Error::InvalidSpec("level must be at least 1".into()));
    }
    let d = spec.dim();
    let table = distinct_maps(&spec.to_ifs(), n, None, cap)?;
    let maps: Vec<ComposedMap> = (0..table.len()).map(|i| table.map(i)).collect();
    let mut sizes = vec![0; d];
    sizes[d - 1] = maps.len();
    let mut theta = vec![Vec::new(); d - 1];
    // classes of Omega_{j+1}, as translation prefixes of length j + 1
    let mut upper: Vec<Vec<AlgebraicNumber>> =
        maps.iter().map(|m| m.parts.iter().map(|(_, t)| t.clone()).collect()).collect();
    for j in (1..d).rev() {
        let mut ids: BTreeMap<Vec<AlgebraicNumber>, usize> = BTreeMap::new();
        for key in &upper {
            ids.entry(key[..j].to_vec()).or_insert(0);
        }
        for (i, v) in ids.values_mut().enumerate() {
            *v = i;
        }
        theta[j - 1] = upper.iter().map(|key| ids[&key[..j]]).collect();
        sizes[j - 1] = ids.len();
        upper = ids.into_keys().collect();
    }
    Ok(ThetaChain { n, sizes, theta, maps })
}

#[derive(Debug, Clone, Serialize)]
pub struct ZTable {
    /// `z[j - 1]` holds `Z_j` on `Omega_j`.
    pub z: Vec<Vec<f64>>,
    pub z0: f64,
    /// `log Z_0 / (-n log rho_1)`.
    pub bound: f64,
}

pub fn z_recursion(chain: &ThetaChain, spec: &SpongeSpec) -> ZTable {
    let d = spec.dim();
    let logs: Vec<f64> = spec.ratios.iter().map(ln_rational).collect();
    let mut z: Vec<Vec<f64>> = vec![Vec::new(); d];
    z[d - 1] = vec![1.0; chain.sizes[d - 1]];
    for j in (1..d).rev() {
        // Z_{d-1} is a plain sum; below it the summands carry log rho_{j+1} / log rho_{j+2}
        let e = if j == d - 1 { 1.0 } else { logs[j] / logs[j + 1] };
        let mut acc = vec![0.0; chain.sizes[j - 1]];
        for (u, &w) in chain.theta[j - 1].iter().enumerate() {
            acc[w] += z[j][u].powf(e);
        }
        z[j - 1] = acc;
    }
    let e0 = if d >= 2 { logs[0] / logs[1] } else { 0.0 };
    let z0: f64 = z[0].iter().map(|v| v.powf(e0)).sum();
    ZTable {
        bound: z0.ln() / (-(chain.n as f64) * logs[0]),
        z,
        z0,
    }
}

/// The weights `p(u)` on `Omega_d` built from the `Z_j`.
pub fn optimal_weights(chain: &ThetaChain, spec: &SpongeSpec, zt: &ZTable) -> Vec<f64> {
    let d = spec.dim();
    let logs: Vec<f64> = spec.ratios.iter().map(ln_rational).collect();
    let zval = |j: usize, u: usize| if j == 0 { zt.z0 } else { zt.z[j - 1][chain.image(u, j)] };
    (0..chain.sizes[d - 1])
        .map(|u| {
            let mut p = zval(d, u) / zval(d - 1, u);
            for j in 1..d {
                p *= zval(j, u).powf(logs[j - 1] / logs[j]) / zval(j - 1, u);
            }
            p
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct SpongeOptions {
    pub cap: u128,
    /// Word length of the classes carrying the weights and the `Z` bound.
    pub z_level: usize,
    /// Levels used by the AWSC diagnostic of each prefix product.
    pub awsc_levels: usize,
    pub dim: DimOptions,
}

impl Default for SpongeOptions {
    fn default() -> Self {
        SpongeOptions {
            cap: DEFAULT_CAP,
            z_level: 1,
            awsc_levels: 8,
            dim: DimOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpongeDimensions {
    /// `|Omega_j|` at each level `n = 1..=n_max`.
    pub class_counts: Vec<Vec<usize>>,
    /// Growth rates of `|Omega_j|`.
    pub h_hat: Vec<f64>,
    pub dim_b: f64,
    /// Dimension of the projected weight measure (a lower bound for `dim_H`).
    pub dim_h: f64,
    pub dim_h_lower: f64,
    pub dim_h_upper_bracket: f64,
    /// `log Z_0 / (-n log rho_1)` (an upper bound for `dim_H`).
    pub z_bound: f64,
    /// Lower and upper bounds agree within the brackets.
    pub collapsed: bool,
    pub z_level: usize,
    pub weights: Vec<f64>,
    pub awsc: Vec<AwscVerdict>,
    pub report: DimensionReport,
}

/// Symbols of the `Omega_d` system at level `chain.n`, as an IFS.
fn class_system(spec: &SpongeSpec, chain: &ThetaChain) -> Result<IfsSpec> {
    let field = NumberField::rationals();
    let factors = (0..spec.dim())
        .map(|j| {
            chain
                .maps
                .iter()
                .map(|m| AffineMap1D::new(m.parts[j].0.clone(), m.parts[j].1.clone()))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    IfsSpec::new(field, factors, false)
}

pub fn sponge_dimensions(spec: &SpongeSpec, n_max: usize, opts: &SpongeOptions) -> Result<SpongeDimensions> {
    if n_max == 0 || opts.z_level == 0 {
        return Err(Error::InvalidSpec("levels must be at least 1".into()));
    }
    let d = spec.dim();
    let mut class_counts = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        class_counts.push(build_theta_chain(spec, n, opts.cap)?.sizes);
    }
    let h_hat: Vec<f64> = (0..d)
        .map(|j| {
            let last = (class_counts[n_max - 1][j] as f64).ln();
            if n_max >= 2 {
                last - (class_counts[n_max - 2][j] as f64).ln()
            } else {
                last
            }
        })
        .collect();
    let lambdas = spec.lambdas();
    let dim_b = (0..d)
        .map(|j| (1.0 / lambdas[j] - lambdas.get(j + 1).map(|l| 1.0 / l).unwrap_or(0.0)) * h_hat[j])
        .sum();

    let chain = build_theta_chain(spec, opts.z_level, opts.cap)?;
    let zt = z_recursion(&chain, spec);
    let weights = optimal_weights(&chain, spec, &zt);
    let system = class_system(spec, &chain)?;
    let m = SymbolicMeasure::bernoulli(crate::dims::rational_weights(&weights)?)?;
    let report = dim_product(&system, &m, &opts.dim)?;

    let ifs = spec.to_ifs();
    let awsc = (1..=d)
        .map(|j| {
            let coords: Vec<usize> = (0..j).collect();
            Ok(awsc_diagnostic(&ifs.project(&coords)?, opts.awsc_levels, DEFAULT_AWSC_EPS, opts.cap)?.verdict)
        })
        .collect::<Result<Vec<_>>>()?;

    let collapsed = zt.bound <= report.upper + 1e-9;
    Ok(SpongeDimensions {
        class_counts,
        h_hat,
        dim_b,
        dim_h: report.value,
        dim_h_lower: report.lower,
        dim_h_upper_bracket: report.upper,
        z_bound: zt.bound,
        collapsed,
        z_level: opts.z_level,
        weights,
        awsc,
        report,
    })
}

/// `class, t_1..t_d, p` rows for the weights on `Omega_d`.
pub fn write_weights_csv<W: Write>(chain: &ThetaChain, weights: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["class".to_string()];
    header.extend((1..=chain.sizes.len()).map(|j| format!("t_{j}")));
    header.push("p".into());
    w.write_record(&header).map_err(csv_err)?;
    for (i, (m, p)) in chain.maps.iter().zip(weights).enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(m.parts.iter().map(|(_, t)| t.to_string()));
        row.push(crate::fmt12(*p));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}

/// `level, class, parent, Z` rows; the parent column is empty at level 1.
pub fn write_z_csv<W: Write>(chain: &ThetaChain, zt: &ZTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["level", "class", "parent", "Z"]).map_err(csv_err)?;
    w.write_record(["0", "0", "", &crate::fmt12(zt.z0)]).map_err(csv_err)?;
    for (j, zs) in zt.z.iter().enumerate() {
        for (u, z) in zs.iter().enumerate() {
            let parent = if j == 0 { String::new() } else { chain.theta[j - 1][u].to_string() };
            w.write_record([(j + 1).to_string(), u.to_string(), parent, crate::fmt12(*z)])
                .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}
