//! Exact arithmetic: polynomials, root isolation, number fields, classification.

pub mod classify;
pub mod field;
pub mod interval;
pub mod linalg;
pub mod poly;

pub use classify::{classify_pisot_salem, Classification, ConjugateEnclosure, PisotSalemClass};
pub use field::{parse_rational, AlgebraicNumber, NumberField};
pub use interval::RatInterval;
pub use poly::{isolate_real_roots, IntPoly, RatPoly, Rational, RootInterval, SturmChain};
