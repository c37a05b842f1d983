use num_traits::{One, Zero};

use super::poly::Rational;

/// Outcome of exact Gaussian elimination on a (possibly non-square) system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solution {
    Unique(Vec<Rational>),
    Infinite,
    Inconsistent,
}

/// Solves `a x = b` over the rationals. `a` is row-major with `rows` equations.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Solution {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(r, v)| {
            let mut r = r.clone();
            r.push(v.clone());
            r
        })
        .collect();
    let mut pivots = Vec::with_capacity(cols);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Rational::one() / &m[r][c];
        for v in m[r].iter_mut().skip(c) {
            *v = &*v * &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (k, pv) in pivot_row.iter().enumerate().skip(c) {
                if !pv.is_zero() {
                    row[k] = &row[k] - &f * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if m[r..].iter().any(|row| !row[cols].is_zero()) {
        return Solution::Inconsistent;
    }
    if pivots.len() < cols {
        return Solution::Infinite;
    }
    let mut x = vec![Rational::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = m[i][cols].clone();
    }
    Solution::Unique(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn square_and_overdetermined() {
        let a = vec![vec![q(2, 1), q(1, 1)], vec![q(1, 1), q(3, 1)]];
        assert_eq!(solve(&a, &[q(3, 1), q(5, 1)]), Solution::Unique(vec![q(4, 5), q(7, 5)]));
        let a3 = vec![a[0].clone(), a[1].clone(), vec![q(3, 1), q(4, 1)]];
        assert_eq!(solve(&a3, &[q(3, 1), q(5, 1), q(8, 1)]), Solution::Unique(vec![q(4, 5), q(7, 5)]));
        assert_eq!(solve(&a3, &[q(3, 1), q(5, 1), q(9, 1)]), Solution::Inconsistent);
    }

    #[test]
    fn singular() {
        let a = vec![vec![q(1, 1), q(1, 1)], vec![q(2, 1), q(2, 1)]];
        assert_eq!(solve(&a, &[q(1, 1), q(2, 1)]), Solution::Infinite);
    }
}
