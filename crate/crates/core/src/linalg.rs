//! Dense Gaussian elimination over the rationals.

use num_traits::Zero;

use crate::rational::Rational;

/// Solves `a · X = b` for a square `a` and a right-hand side with one or
/// more columns (`b[i]` is row `i`). Pivots are the first nonzero entry in
/// row order. Returns `None` when `a` is singular.
pub fn solve_columns(mut a: Vec<Vec<Rational>>, mut b: Vec<Vec<Rational>>) -> Option<Vec<Vec<Rational>>> {
    let n = a.len();
    debug_assert!(a.iter().all(|r| r.len() == n));
    debug_assert_eq!(b.len(), n);
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for x in a[col][col..].iter_mut() {
            *x *= &inv;
        }
        for x in b[col].iter_mut() {
            *x *= &inv;
        }
        let (pivot_a, pivot_b) = (a[col].clone(), b[col].clone());
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for (x, p) in a[r][col..].iter_mut().zip(&pivot_a[col..]) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
            for (x, p) in b[r].iter_mut().zip(&pivot_b) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
    }
    Some(b)
}

/// Solves `a · x = b` for a single right-hand side.
pub fn solve(a: Vec<Vec<Rational>>, b: Vec<Rational>) -> Option<Vec<Rational>> {
    let cols = b.into_iter().map(|x| vec![x]).collect();
    solve_columns(a, cols).map(|x| x.into_iter().map(|mut r| r.swap_remove(0)).collect())
}
