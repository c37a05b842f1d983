//! System files and measure flags.
//!
//! A system file is TOML:
//!
//! ```toml
//! # optional; field elements are then rationals or "(c0, c1, ...)"
//! [field]
//! min_poly = [-1, -1, 1]        # constant term first
//! enclosure = ["1", "2"]        # optional, defaults to the largest real root
//!
//! osc = false                   # optional assertion of the open set condition
//! ratios = ["1/3"]              # one shared ratio per factor
//! maps = [["0"], ["2/3"]]       # one translation per factor for each map
//! ```
//!
//! One-factor systems may give each map its own ratio instead:
//! `maps = [{ ratio = "1/2", translation = "0" }, ...]`.

use std::path::Path;
use std::sync::Arc;

use fractdim::coding::SymbolicMeasure;
use fractdim::ifs::{AffineMap1D, IfsSpec};
use fractdim::numeric::{parse_rational, AlgebraicNumber, IntPoly, NumberField, RatInterval, Rational};
use fractdim::Error;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    field: Option<FieldBlock>,
    #[serde(default)]
    osc: bool,
    ratios: Option<Vec<String>>,
    maps: Vec<MapEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldBlock {
    min_poly: Vec<i64>,
    enclosure: Option<[String; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum MapEntry {
    Digits(Vec<String>),
    Map { ratio: String, translation: String },
}

pub fn load_system(path: &Path) -> Result<IfsSpec, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_system(&text)
}

pub fn parse_system(text: &str) -> Result<IfsSpec, Error> {
    let file: SystemFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let field = match &file.field {
        None => NumberField::rationals(),
        Some(f) => {
            let poly = IntPoly::from_i64(&f.min_poly);
            match &f.enclosure {
                Some([lo, hi]) => NumberField::new(poly, RatInterval::new(parse_rational(lo)?, parse_rational(hi)?))?,
                None => NumberField::largest_root(poly)?,
            }
        }
    };
    let el = |s: &str| AlgebraicNumber::parse(&field, s);
    let factors = if file.maps.iter().all(|m| matches!(m, MapEntry::Digits(_))) {
        let ratios = file
            .ratios
            .as_ref()
            .ok_or_else(|| Error::InvalidSpec("`ratios` is required when maps list translations only".into()))?;
        let mut factors = vec![Vec::new(); ratios.len()];
        for m in &file.maps {
            let MapEntry::Digits(t) = m else { unreachable!() };
            if t.len() != ratios.len() {
                return Err(Error::InvalidSpec(format!(
                    "map has {} translations for {} factors",
                    t.len(),
                    ratios.len()
                )));
            }
            for (j, (r, x)) in ratios.iter().zip(t).enumerate() {
                factors[j].push(AffineMap1D::new(el(r)?, el(x)?)?);
            }
        }
        factors
    } else {
        if file.ratios.is_some() {
            return Err(Error::InvalidSpec("give either `ratios` or per-map ratios, not both".into()));
        }
        let maps = file
            .maps
            .iter()
            .map(|m| match m {
                MapEntry::Map { ratio, translation } => AffineMap1D::new(el(ratio)?, el(translation)?),
                MapEntry::Digits(_) => Err(Error::InvalidSpec("mixed map formats".into())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        vec![maps]
    };
    IfsSpec::new(Arc::clone(&field), factors, file.osc)
}

fn parse_weights(s: &str) -> Result<Vec<Rational>, Error> {
    s.split(',').map(parse_rational).collect()
}

/// `uniform`, `bernoulli:p1,p2,...`, `markov:row;row;...` (stationary start),
/// or `mixture:w1@M1+w2@M2` with Bernoulli, uniform or Markov components.
pub fn parse_measure(s: &str, alphabet: usize) -> Result<SymbolicMeasure, Error> {
    let s = s.trim();
    if s == "uniform" {
        return Ok(SymbolicMeasure::uniform(alphabet));
    }
    let (kind, body) = s
        .split_once(':')
        .ok_or_else(|| Error::InvalidMeasure(format!("unknown measure `{s}`")))?;
    let m = match kind {
        "bernoulli" => SymbolicMeasure::bernoulli(parse_weights(body)?)?,
        "markov" => SymbolicMeasure::markov_stationary(body.split(';').map(parse_weights).collect::<Result<_, _>>()?)?,
        "mixture" => SymbolicMeasure::mixture(
            body.split('+')
                .map(|part| {
                    let (w, m) = part
                        .split_once('@')
                        .ok_or_else(|| Error::InvalidMeasure(format!("mixture part `{part}` needs `weight@measure`")))?;
                    Ok((parse_rational(w)?, parse_measure(m, alphabet)?))
                })
                .collect::<Result<_, Error>>()?,
        )?,
        _ => return Err(Error::InvalidMeasure(format!("unknown measure kind `{kind}`"))),
    };
    if m.alphabet() != alphabet {
        return Err(Error::InvalidMeasure(format!(
            "measure has {} symbols, system has {alphabet}",
            m.alphabet()
        )));
    }
    Ok(m)
}
