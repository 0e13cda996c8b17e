//! Exact Gaussian elimination over the rationals.

use num_traits::{One, Zero};

use crate::symcore::Rational;

#[derive(Clone, Debug, PartialEq)]
pub enum Solution {
    Unique(Vec<Rational>),
    /// Particular solution plus a basis of the null space.
    Family {
        particular: Vec<Rational>,
        null_space: Vec<Vec<Rational>>,
    },
    Inconsistent,
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut [Vec<Rational>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for c in 0..cols {
        if row == m.len() {
            break;
        }
        let Some(p) = (row..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(row, p);
        let inv = m[row][c].recip();
        for v in m[row].iter_mut() {
            *v *= &inv;
        }
        for i in 0..m.len() {
            if i == row || m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone();
            for k in 0..m[i].len() {
                let d = &f * &m[row][k];
                m[i][k] -= d;
            }
        }
        pivots.push(c);
        row += 1;
    }
    pivots
}

/// Solves `A x = b` for `A` given by rows of length `n`.
pub fn solve(a: &[Vec<Rational>], b: &[Rational], n: usize) -> Solution {
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.resize(n, Rational::zero());
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut m, n);
    if m.iter().skip(pivots.len()).any(|r| !r[n].is_zero()) {
        return Solution::Inconsistent;
    }
    let mut particular = vec![Rational::zero(); n];
    for (row, &c) in pivots.iter().enumerate() {
        particular[c] = m[row][n].clone();
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    if free.is_empty() {
        return Solution::Unique(particular);
    }
    let null_space = free
        .iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); n];
            v[f] = Rational::one();
            for (row, &c) in pivots.iter().enumerate() {
                v[c] = -m[row][f].clone();
            }
            v
        })
        .collect();
    Solution::Family { particular, null_space }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::int;

    fn row(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn unique_and_inconsistent() {
        let a = vec![row(&[1, 1]), row(&[1, -1])];
        assert_eq!(solve(&a, &row(&[3, 1]), 2), Solution::Unique(row(&[2, 1])));
        let a = vec![row(&[1, 1]), row(&[2, 2])];
        assert_eq!(solve(&a, &row(&[1, 3]), 2), Solution::Inconsistent);
    }

    #[test]
    fn null_space_is_annihilated() {
        let a = vec![row(&[1, 2, 3]), row(&[2, 4, 6])];
        let Solution::Family { null_space, .. } = solve(&a, &row(&[0, 0]), 3) else { panic!() };
        assert_eq!(null_space.len(), 2);
        for v in null_space {
            for r in &a {
                let dot: Rational = r.iter().zip(&v).map(|(x, y)| x * y).sum();
                assert!(dot.is_zero());
            }
        }
    }
}
