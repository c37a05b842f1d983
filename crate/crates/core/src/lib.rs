//! Dimension theory of iterated function systems with exact overlaps.
//!
//! Exact arithmetic lives in [`numeric`]; the shift space and its measures in
//! [`coding`]; affine systems in [`ifs`]. The analyses build on those:
//! [`overlap`] counts distinct composed maps, [`projent`] computes projection
//! entropy, [`boxdim`] counts grid boxes, [`dims`] assembles dimension
//! formulas and [`sponge`] handles self-affine sponges.

pub mod boxdim;
pub mod coding;
pub mod dims;
pub mod error;
pub mod ifs;
pub mod numeric;
pub mod overlap;
pub mod projent;
pub mod sponge;

pub use error::{Error, Result};

/// Formats a float with 12 significant digits, trailing zeros removed.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let e = x.abs().log10().floor() as i32;
    let s = if (-5..15).contains(&e) {
        let decimals = (11 - e).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        return format!("{x:.11e}");
    };
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn twelve_digits() {
        assert_eq!(super::fmt12(std::f64::consts::LN_2), "0.69314718056");
        assert_eq!(super::fmt12(1.0), "1");
        assert_eq!(super::fmt12(-1234.5), "-1234.5");
        assert_eq!(super::fmt12(0.0), "0");
    }
}
