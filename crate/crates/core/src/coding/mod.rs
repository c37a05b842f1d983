//! The one-sided full shift: words, invariant measures, entropy, sampling.

mod measure;
mod word;

pub use measure::{
    sample_coding, stationary_vector, CodingSampler, LinearRep, MeasureKind, RepTerm, SymbolicMeasure,
    MAX_BLOCK_ALPHABET,
};
pub use word::{all_words, Word};

use crate::error::Result;
use crate::numeric::Rational;

pub fn cylinder_mass(m: &SymbolicMeasure, u: &Word) -> Rational {
    m.cylinder_mass(u)
}

pub fn shift_entropy(m: &SymbolicMeasure) -> f64 {
    m.shift_entropy()
}

pub fn lyapunov_exponent(m: &SymbolicMeasure, ratios: &[f64]) -> Result<f64> {
    m.lyapunov_exponent(ratios)
}
