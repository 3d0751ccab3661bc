//! Group law in exponential coordinates, inverse, adjoint action.
//!
//! The product `m(x, y)` lives in the polynomial ring on `2n` variables:
//! `x_1..x_n` are variables `0..n`, `y_1..y_n` are `n..2n`.

use std::collections::HashMap;

use num_traits::One;
use serde::Serialize;

use crate::poly::{self, CompiledPolyVec, MultiPoly, PolyMatrix, PolyVec};
use crate::{GradedLieAlgebra, LieError, Rational};

/// Polynomial vectors in a fixed ring, bracketed with the algebra's constants.
fn bracket_poly(alg: &GradedLieAlgebra, u: &[MultiPoly], v: &[MultiPoly]) -> Vec<MultiPoly> {
    let nv = u[0].nvars();
    let mut out = vec![MultiPoly::zero(nv); alg.dim()];
    for (i, j, k, c) in alg.structure_constants() {
        let coef = &(&u[i] * &v[j]) - &(&u[j] * &v[i]);
        if coef.is_zero() {
            continue;
        }
        out[k] = &out[k] + &coef.scale(c);
    }
    out
}

fn factorial(k: u32) -> Rational {
    (1..=k).fold(Rational::one(), |a, i| a * Rational::from_integer(i.into()))
}

/// Compositions of pairs `(r_i, s_i)` with `r_i + s_i >= 1` and total `total`.
fn pair_sequences(total: u32) -> Vec<Vec<(u32, u32)>> {
    if total == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 1..=total {
        for r in 0..=first {
            for mut rest in pair_sequences(total - first) {
                rest.insert(0, (r, first - r));
                out.push(rest);
            }
        }
    }
    out
}

/// BCH product `m(x, y)` from Dynkin's formula, truncated at the nilpotency step.
pub fn bch_product(alg: &GradedLieAlgebra) -> Result<PolyVec, LieError> {
    let n = alg.dim();
    let step = alg.nilpotency_step()? as u32;
    let nv = 2 * n;
    let xs: Vec<MultiPoly> = (0..n).map(|i| MultiPoly::var(nv, i)).collect();
    let ys: Vec<MultiPoly> = (0..n).map(|i| MultiPoly::var(nv, n + i)).collect();

    // right-nested bracket [w_1, [w_2, ..., w_m]] memoized by word (false = X, true = Y)
    let mut memo: HashMap<Vec<bool>, Vec<MultiPoly>> = HashMap::new();
    fn nested(
        word: &[bool],
        alg: &GradedLieAlgebra,
        xs: &[MultiPoly],
        ys: &[MultiPoly],
        memo: &mut HashMap<Vec<bool>, Vec<MultiPoly>>,
    ) -> Vec<MultiPoly> {
        if let Some(v) = memo.get(word) {
            return v.clone();
        }
        let letter = |b: bool| if b { ys.to_vec() } else { xs.to_vec() };
        let v = if word.len() == 1 {
            letter(word[0])
        } else if word.len() >= 2 && word[word.len() - 1] == word[word.len() - 2] {
            vec![MultiPoly::zero(xs[0].nvars()); xs.len()]
        } else {
            let inner = nested(&word[1..], alg, xs, ys, memo);
            if inner.iter().all(MultiPoly::is_zero) {
                inner
            } else {
                bracket_poly(alg, &letter(word[0]), &inner)
            }
        };
        memo.insert(word.to_vec(), v.clone());
        v
    }

    let mut m = vec![MultiPoly::zero(nv); n];
    for total in 1..=step {
        for seq in pair_sequences(total) {
            let k = seq.len() as i64;
            let mut denom = Rational::from_integer((k * total as i64).into());
            let mut word = Vec::with_capacity(total as usize);
            for &(r, s) in &seq {
                denom *= factorial(r) * factorial(s);
                word.extend(std::iter::repeat_n(false, r as usize));
                word.extend(std::iter::repeat_n(true, s as usize));
            }
            let sign = if k % 2 == 1 { Rational::one() } else { -Rational::one() };
            let coef = sign / denom;
            let b = nested(&word, alg, &xs, &ys, &mut memo);
            for (mk, bk) in m.iter_mut().zip(&b) {
                if !bk.is_zero() {
                    *mk = &*mk + &bk.scale(&coef);
                }
            }
        }
    }
    Ok(PolyVec(m))
}

/// One monomial that breaks the triangular shape of the group law.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TriangularViolation {
    /// 1-based output coordinate.
    pub component: usize,
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    pub coeff: String,
    pub reason: String,
}

/// Checks `m_j = x_j + y_j + Σ c x^α y^β` with `α, β != 0` and `[α] + [β] = q_j`.
pub fn verify_triangular_form(alg: &GradedLieAlgebra, m: &PolyVec) -> Vec<TriangularViolation> {
    let n = alg.dim();
    let w = alg.weights();
    let mut report = Vec::new();
    for (j, mj) in m.0.iter().enumerate() {
        let rest = mj - &(&MultiPoly::var(2 * n, j) + &MultiPoly::var(2 * n, n + j));
        for (e, c) in rest.terms() {
            let (alpha, beta) = e.split_at(n);
            let deg = MultiPoly::weighted_degree(alpha, w) + MultiPoly::weighted_degree(beta, w);
            let mut reasons = Vec::new();
            if alpha.iter().all(|&a| a == 0) {
                reasons.push("alpha = 0".to_string());
            }
            if beta.iter().all(|&b| b == 0) {
                reasons.push("beta = 0".to_string());
            }
            if deg != w[j] {
                reasons.push(format!("[alpha] + [beta] = {deg} != q_{} = {}", j + 1, w[j]));
            }
            if !reasons.is_empty() {
                report.push(TriangularViolation {
                    component: j + 1,
                    alpha: alpha.to_vec(),
                    beta: beta.to_vec(),
                    coeff: c.to_string(),
                    reason: reasons.join("; "),
                });
            }
        }
    }
    report
}

/// Restricts `m` to the `n`-variable ring by `y = -x`.
fn product_with_negation(m: &PolyVec, n: usize) -> PolyVec {
    let mut subs: Vec<MultiPoly> = (0..n).map(|i| MultiPoly::var(n, i)).collect();
    subs.extend((0..n).map(|i| -MultiPoly::var(n, i)));
    m.compose(&subs)
}

/// Inverse in exponential coordinates, `x ↦ -x`; checked against `m(x, -x) = 0`.
pub fn group_inverse(alg: &GradedLieAlgebra, m: &PolyVec) -> PolyVec {
    let n = alg.dim();
    assert!(
        product_with_negation(m, n).is_zero(),
        "internal error: m(x, -x) does not vanish identically"
    );
    PolyVec((0..n).map(|i| -MultiPoly::var(n, i)).collect())
}

/// `ad_x` as an `n×n` matrix over the `n`-variable ring: column `j` is `[x, X_j]`.
pub fn ad_matrix(alg: &GradedLieAlgebra) -> PolyMatrix {
    let n = alg.dim();
    let mut a = vec![vec![MultiPoly::zero(n); n]; n];
    for (i, j, k, c) in alg.structure_constants() {
        // [x_i X_i, X_j] contributes x_i c_ij^k to (k, j); [x_j X_j, X_i] gives -x_j c to (k, i)
        a[k][j] = &a[k][j] + &MultiPoly::var(n, i).scale(c);
        a[k][i] = &a[k][i] - &MultiPoly::var(n, j).scale(c);
    }
    a
}

/// `Ad(x) = exp(ad_x)`, a finite sum since `ad_x` is nilpotent.
pub fn adjoint_action(alg: &GradedLieAlgebra) -> Result<PolyMatrix, LieError> {
    let n = alg.dim();
    let step = alg.nilpotency_step()?;
    let ad = ad_matrix(alg);
    let mut term = poly::matrix_identity(n, n);
    let mut sum = term.clone();
    for k in 1..=step {
        term = poly::matrix_mul(&ad, &term);
        let inv_k = Rational::new(1.into(), (k as i64).into());
        for row in term.iter_mut() {
            for p in row.iter_mut() {
                *p = p.scale(&inv_k);
            }
        }
        for (srow, trow) in sum.iter_mut().zip(&term) {
            for (s, t) in srow.iter_mut().zip(trow) {
                *s = &*s + t;
            }
        }
    }
    Ok(sum)
}

/// Substitutes `x ↦ -x` in every entry.
pub fn negate_argument(a: &PolyMatrix) -> PolyMatrix {
    let n = a[0][0].nvars();
    let subs: Vec<MultiPoly> = (0..n).map(|i| -MultiPoly::var(n, i)).collect();
    a.iter().map(|r| r.iter().map(|p| p.compose(&subs)).collect()).collect()
}

/// `Ad(x) Ad(-x) = I` as a polynomial identity.
pub fn check_adjoint_inverse(ad: &PolyMatrix) -> bool {
    let n = ad.len();
    poly::matrix_mul(ad, &negate_argument(ad)) == poly::matrix_identity(n, n)
}

/// Jacobian `∂m_k/∂y_j` as a matrix over the `2n`-variable ring.
pub fn right_jacobian(m: &PolyVec) -> PolyMatrix {
    let n = m.len();
    m.0.iter().map(|mk| (0..n).map(|j| mk.derivative(n + j)).collect()).collect()
}

/// Whether `det ∂m/∂y` is the constant polynomial 1.
pub fn jacobian_is_unimodular(m: &PolyVec) -> bool {
    let n = m.len();
    poly::determinant(&right_jacobian(m)) == MultiPoly::one(2 * n)
}

/// Every `m_j` is homogeneous of degree `q_j` when `x` and `y` both carry the weights.
pub fn dilation_is_automorphism(alg: &GradedLieAlgebra, m: &PolyVec) -> bool {
    let mut w = alg.weights().to_vec();
    w.extend_from_slice(alg.weights());
    m.0.iter()
        .zip(alg.weights())
        .all(|(mj, q)| mj.is_zero() || mj.homogeneous_degree(&w).as_ref() == Some(q))
}

/// `m(m(x,y),z) = m(x,m(y,z))` as a polynomial identity in `3n` variables.
pub fn associativity_symbolic(m: &PolyVec) -> bool {
    let n = m.len();
    let nv = 3 * n;
    let var = |i| MultiPoly::var(nv, i);
    let x: Vec<MultiPoly> = (0..n).map(var).collect();
    let y: Vec<MultiPoly> = (n..2 * n).map(var).collect();
    let z: Vec<MultiPoly> = (2 * n..3 * n).map(var).collect();
    let cat = |a: &[MultiPoly], b: &[MultiPoly]| -> Vec<MultiPoly> { a.iter().chain(b).cloned().collect() };
    let xy = m.compose(&cat(&x, &y));
    let left = m.compose(&cat(&xy.0, &z));
    let yz = m.compose(&cat(&y, &z));
    let right = m.compose(&cat(&x, &yz.0));
    left == right
}

/// Associativity at exact rational sample triples.
pub fn associativity_sampled(m: &PolyVec, points: &[(Vec<Rational>, Vec<Rational>, Vec<Rational>)]) -> bool {
    let cat = |a: &[Rational], b: &[Rational]| -> Vec<Rational> { a.iter().chain(b).cloned().collect() };
    points.iter().all(|(x, y, z)| {
        let xy = m.eval(&cat(x, y));
        let yz = m.eval(&cat(y, z));
        m.eval(&cat(&xy, z)) == m.eval(&cat(x, &yz))
    })
}

/// JSON form `{ "j": [{alpha, beta, coeff}] }` with 1-based `j`.
pub fn law_json(m: &PolyVec) -> serde_json::Value {
    let n = m.len();
    let mut obj = serde_json::Map::new();
    for (j, mj) in m.0.iter().enumerate() {
        let terms: Vec<serde_json::Value> = mj
            .terms()
            .map(|(e, c)| {
                serde_json::json!({
                    "alpha": &e[..n],
                    "beta": &e[n..],
                    "coeff": c.to_string(),
                })
            })
            .collect();
        obj.insert((j + 1).to_string(), serde_json::Value::Array(terms));
    }
    serde_json::Value::Object(obj)
}

/// Human-readable `m_j = ...` lines using the basis labels.
pub fn law_text(alg: &GradedLieAlgebra, m: &PolyVec) -> String {
    let mut names: Vec<String> = alg.labels().iter().map(|l| format!("x_{l}")).collect();
    names.extend(alg.labels().iter().map(|l| format!("y_{l}")));
    m.0.iter()
        .zip(alg.labels())
        .map(|(mj, l)| format!("(x*y)_{l} = {}", mj.fmt_with(&names)))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Group law plus a compiled floating-point product, shared by the numerics.
#[derive(Clone, Debug)]
pub struct GroupLaw {
    alg: GradedLieAlgebra,
    product: PolyVec,
    compiled: CompiledPolyVec,
    abelian: bool,
}

impl GroupLaw {
    pub fn new(alg: &GradedLieAlgebra) -> Result<Self, LieError> {
        let product = bch_product(alg)?;
        let compiled = product.compile();
        Ok(GroupLaw { alg: alg.clone(), product, compiled, abelian: alg.is_abelian() })
    }

    pub fn algebra(&self) -> &GradedLieAlgebra {
        &self.alg
    }

    pub fn product(&self) -> &PolyVec {
        &self.product
    }

    pub fn dim(&self) -> usize {
        self.alg.dim()
    }

    pub fn multiply_exact(&self, x: &[Rational], y: &[Rational]) -> Vec<Rational> {
        let p: Vec<Rational> = x.iter().chain(y).cloned().collect();
        self.product.eval(&p)
    }

    /// `x · y` in floating point; `buf` must hold `2n` entries.
    #[inline]
    pub fn multiply_into(&self, x: &[f64], y: &[f64], buf: &mut [f64], out: &mut [f64]) {
        if self.abelian {
            for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
                *o = a + b;
            }
            return;
        }
        let n = x.len();
        buf[..n].copy_from_slice(x);
        buf[n..2 * n].copy_from_slice(y);
        self.compiled.eval_into(buf, out);
    }

    pub fn multiply(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mut buf = vec![0.0; 2 * n];
        let mut out = vec![0.0; n];
        self.multiply_into(x, y, &mut buf, &mut out);
        out
    }

    /// `x⁻¹ · y`.
    pub fn left_divide(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let nx: Vec<f64> = x.iter().map(|v| -v).collect();
        self.multiply(&nx, y)
    }
}

impl GradedLieAlgebra {
    /// Shorthand for [`bch_product`].
    pub fn group_law(&self) -> Result<PolyVec, LieError> {
        bch_product(self)
    }
}
