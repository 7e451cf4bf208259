//! Exact linear algebra by fraction-free (Bareiss) elimination.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::rational::Rational;

/// Multiplies a rational row by the lcm of its denominators.
pub fn integer_row(row: &[Rational]) -> Vec<BigInt> {
    let l = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    row.iter().map(|q| q.numer() * (&l / q.denom())).collect()
}

/// Row-echelon form in place, choosing pivots only among the first
/// `pivot_limit` columns. Returns the pivot column of each nonzero row.
pub fn bareiss(mat: &mut [Vec<BigInt>], pivot_limit: usize) -> Vec<usize> {
    let rows = mat.len();
    let cols = mat.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..pivot_limit.min(cols) {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !mat[i][c].is_zero()) else {
            continue;
        };
        mat.swap(r, p);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = &mat[r][c] * &mat[i][j] - &mat[i][c] * &mat[r][j];
                debug_assert!((&v % &prev).is_zero(), "inexact Bareiss step");
                mat[i][j] = v / &prev;
            }
            mat[i][c] = BigInt::zero();
        }
        prev = mat[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Exact rank of a set of integer rows.
pub fn rank_int(rows: &[Vec<BigInt>]) -> usize {
    let mut mat = rows.to_vec();
    let cols = mat.first().map_or(0, Vec::len);
    bareiss(&mut mat, cols).len()
}

pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let ints: Vec<Vec<BigInt>> = rows.iter().map(|r| integer_row(r)).collect();
    rank_int(&ints)
}

/// Solves `a x = b` exactly; `None` when `a` is singular or not square.
pub fn solve_square_system(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    if b.len() != n || a.iter().any(|r| r.len() != n) {
        return None;
    }
    let mut mat: Vec<Vec<BigInt>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut full = row.clone();
            full.push(rhs.clone());
            integer_row(&full)
        })
        .collect();
    if bareiss(&mut mat, n).len() < n {
        return None;
    }
    let mut x = vec![Rational::zero(); n];
    for i in (0..n).rev() {
        let mut acc = Rational::integer(mat[i][n].clone());
        for j in i + 1..n {
            acc = acc - Rational::integer(mat[i][j].clone()) * &x[j];
        }
        x[i] = acc / Rational::integer(mat[i][i].clone());
    }
    Some(x)
}

/// Spanning vector of the null space of `rows` when that space is a line.
pub fn null_vector(rows: &[Vec<BigInt>], cols: usize) -> Option<Vec<Rational>> {
    let mut mat = rows.to_vec();
    let pivots = bareiss(&mut mat, cols);
    if pivots.len() + 1 != cols {
        return None;
    }
    let free = (0..cols).find(|c| !pivots.contains(c))?;
    let mut x = vec![Rational::zero(); cols];
    x[free] = Rational::one();
    for (r, &pc) in pivots.iter().enumerate().rev() {
        let mut acc = Rational::zero();
        for j in pc + 1..cols {
            if !mat[r][j].is_zero() {
                acc = acc - Rational::integer(mat[r][j].clone()) * &x[j];
            }
        }
        x[pc] = acc / Rational::integer(mat[r][pc].clone());
    }
    Some(x)
}
