//! Exact linear algebra over the rationals.
//!
//! Matrices are plain row vectors (`&[Vec<Rational>]`). Everything here is
//! Gauss–Jordan elimination; sizes are tiny (the dimension of a Lie algebra),
//! so there is no attempt at fraction-free tricks.

use num_traits::{One, Zero};

use crate::Rational;

/// Reduced row echelon form. Returns the nonzero rows and their pivot columns.
pub fn rref(rows: &[Vec<Rational>]) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank(rows: &[Vec<Rational>]) -> usize {
    rref(rows).1.len()
}

/// A basis (in reduced echelon form) of the span of `vectors`.
pub fn span_basis(vectors: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    rref(vectors).0
}

/// Basis of `{v : A v = 0}` for the matrix with the given rows and `ncols` columns.
pub fn nullspace(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    let (r, pivots) = rref(rows);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); ncols];
            v[f] = Rational::one();
            for (row, &p) in r.iter().zip(&pivots) {
                v[p] = -row[f].clone();
            }
            v
        })
        .collect()
}

pub fn in_span(basis: &[Vec<Rational>], v: &[Rational]) -> bool {
    let mut rows = basis.to_vec();
    let before = rank(&rows);
    rows.push(v.to_vec());
    rank(&rows) == before
}

/// Dimension of the intersection of two subspaces given by spanning sets.
pub fn intersection_dim(u: &[Vec<Rational>], w: &[Vec<Rational>]) -> usize {
    let mut all = u.to_vec();
    all.extend_from_slice(w);
    rank(u) + rank(w) - rank(&all)
}

pub fn mat_vec(a: &[Vec<Rational>], v: &[Rational]) -> Vec<Rational> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

/// Orthogonal complement of `w` inside `V = Q^n` for the bilinear form with
/// Gram matrix `form`: all `v` with `form(x, v) = 0` for every `x` in `w`.
pub fn form_complement(form: &[Vec<Rational>], w: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = form.len();
    // row x^T B for each spanning vector x
    let rows: Vec<Vec<Rational>> = w
        .iter()
        .map(|x| {
            (0..n)
                .map(|j| (0..n).map(|i| &x[i] * &form[i][j]).sum())
                .collect()
        })
        .collect();
    if rows.is_empty() {
        return identity(n);
    }
    nullspace(&rows, n)
}

pub fn identity(n: usize) -> Vec<Vec<Rational>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect()
}
