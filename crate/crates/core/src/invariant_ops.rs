//! Polynomial-coefficient differential operators; left/right invariant vector
//! fields and the Rockland candidate.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;
use serde::Serialize;

use crate::poly::{MultiPoly, PolyVec};
use crate::{GradedLieAlgebra, MultiIndex, Rational};

/// `Σ c_I(x) ∂^I` with coefficients on the left.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffOp {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, MultiPoly>,
}

/// Result of [`DiffOp::homogeneity_degree`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Homogeneity {
    Degree(Rational),
    Inhomogeneous,
    /// The zero operator is homogeneous of every degree.
    Zero,
}

impl fmt::Display for Homogeneity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Homogeneity::Degree(d) => write!(f, "{d}"),
            Homogeneity::Inhomogeneous => f.write_str("inhomogeneous"),
            Homogeneity::Zero => f.write_str("zero operator"),
        }
    }
}

fn binomial(n: u32, k: u32) -> Rational {
    let mut r = Rational::one();
    for i in 0..k {
        r = r * Rational::from_integer((n - i).into()) / Rational::from_integer((i + 1).into());
    }
    r
}

/// All multi-indices `K <= I` componentwise.
fn sub_indices(i: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &a in i {
        out = out
            .into_iter()
            .flat_map(|p: Vec<u32>| {
                (0..=a).map(move |k| {
                    let mut q = p.clone();
                    q.push(k);
                    q
                })
            })
            .collect();
    }
    out
}

impl DiffOp {
    pub fn zero(nvars: usize) -> Self {
        DiffOp { nvars, terms: BTreeMap::new() }
    }

    pub fn identity(nvars: usize) -> Self {
        let mut d = Self::zero(nvars);
        d.add_term(vec![0; nvars], MultiPoly::one(nvars));
        d
    }

    /// `∂/∂x_j`.
    pub fn partial(nvars: usize, j: usize) -> Self {
        let mut d = Self::zero(nvars);
        d.add_term(MultiIndex::unit(nvars, j).0, MultiPoly::one(nvars));
        d
    }

    /// Multiplication by a polynomial (order zero).
    pub fn multiplication(p: MultiPoly) -> Self {
        let n = p.nvars();
        let mut d = Self::zero(n);
        d.add_term(vec![0; n], p);
        d
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &MultiPoly)> {
        self.terms.iter()
    }

    /// Coefficient of `∂^I`.
    pub fn coefficient(&self, idx: &[u32]) -> MultiPoly {
        self.terms.get(idx).cloned().unwrap_or_else(|| MultiPoly::zero(self.nvars))
    }

    pub fn add_term(&mut self, idx: Vec<u32>, c: MultiPoly) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(idx).or_insert_with(|| MultiPoly::zero(c.nvars()));
        *e = &*e + &c;
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &DiffOp) -> DiffOp {
        let mut out = self.clone();
        for (i, c) in &other.terms {
            out.add_term(i.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> DiffOp {
        let mut out = DiffOp::zero(self.nvars);
        for (i, p) in &self.terms {
            out.add_term(i.clone(), p.scale(c));
        }
        out
    }

    pub fn sub(&self, other: &DiffOp) -> DiffOp {
        self.add(&other.scale(&-Rational::one()))
    }

    /// `self ∘ other` via the generalized Leibniz rule.
    pub fn compose(&self, other: &DiffOp) -> DiffOp {
        let mut out = DiffOp::zero(self.nvars);
        for (i, a) in &self.terms {
            for (j, b) in &other.terms {
                for k in sub_indices(i) {
                    let mut c = Rational::one();
                    for (&ii, &kk) in i.iter().zip(&k) {
                        c *= binomial(ii, kk);
                    }
                    let db = b.partial(&k);
                    if db.is_zero() {
                        continue;
                    }
                    let idx: Vec<u32> = i.iter().zip(&k).zip(j).map(|((ii, kk), jj)| ii - kk + jj).collect();
                    out.add_term(idx, (a * &db).scale(&c));
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &DiffOp) -> DiffOp {
        self.compose(other).sub(&other.compose(self))
    }

    pub fn pow(&self, k: u32) -> DiffOp {
        let mut acc = DiffOp::identity(self.nvars);
        for _ in 0..k {
            acc = acc.compose(self);
        }
        acc
    }

    pub fn apply(&self, f: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::zero(self.nvars);
        for (i, c) in &self.terms {
            let d = f.partial(i);
            if !d.is_zero() {
                out = out + c * &d;
            }
        }
        out
    }

    /// `ν` with `P(f∘α_λ) = λ^ν (P f)∘α_λ`: each monomial `x^β ∂^I` scales by `[I] - [β]`.
    pub fn homogeneity_degree(&self, weights: &[Rational]) -> Homogeneity {
        let mut deg: Option<Rational> = None;
        for (i, c) in &self.terms {
            let di = MultiPoly::weighted_degree(i, weights);
            for (e, _) in c.terms() {
                let d = &di - MultiPoly::weighted_degree(e, weights);
                match &deg {
                    None => deg = Some(d),
                    Some(d0) if *d0 != d => return Homogeneity::Inhomogeneous,
                    _ => {}
                }
            }
        }
        deg.map_or(Homogeneity::Zero, Homogeneity::Degree)
    }

    pub fn fmt_with(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (i, c) in &self.terms {
            let d: Vec<String> = i
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(v, &k)| if k == 1 { format!("d{}", v + 1) } else { format!("d{}^{k}", v + 1) })
                .collect();
            let coef = c.fmt_with(names);
            let single = c.len() == 1;
            let s = match (d.is_empty(), coef.as_str()) {
                (true, _) => coef.clone(),
                (false, "1") => d.join(" "),
                (false, "-1") => format!("-{}", d.join(" ")),
                (false, _) if single => format!("{coef} {}", d.join(" ")),
                (false, _) => format!("({coef}) {}", d.join(" ")),
            };
            parts.push(s);
        }
        let mut out = parts[0].clone();
        for p in &parts[1..] {
            match p.strip_prefix('-') {
                Some(rest) => {
                    out.push_str(" - ");
                    out.push_str(rest);
                }
                None => {
                    out.push_str(" + ");
                    out.push_str(p);
                }
            }
        }
        out
    }

    /// Term list for JSON output.
    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(i, c)| {
                let coeff: Vec<serde_json::Value> = c
                    .terms()
                    .map(|(e, r)| serde_json::json!({"exponents": e, "coeff": r.to_string()}))
                    .collect();
                serde_json::json!({"partial": i, "coefficient": coeff})
            })
            .collect();
        serde_json::Value::Array(terms)
    }
}

impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (1..=self.nvars).map(|i| format!("x{i}")).collect();
        f.write_str(&self.fmt_with(&names))
    }
}

/// `X_j = Σ_k (∂m_k/∂y_j)(x, 0) ∂_k`.
pub fn left_invariant_fields(m: &PolyVec) -> Vec<DiffOp> {
    let n = m.len();
    let keep: Vec<usize> = (0..n).collect();
    (0..n)
        .map(|j| {
            let mut d = DiffOp::zero(n);
            for (k, mk) in m.0.iter().enumerate() {
                d.add_term(MultiIndex::unit(n, k).0, mk.derivative(n + j).restrict_zero(&keep));
            }
            d
        })
        .collect()
}

/// `Y_j = Σ_k (∂m_k/∂x_j)(0, x) ∂_k`.
pub fn right_invariant_fields(m: &PolyVec) -> Vec<DiffOp> {
    let n = m.len();
    let keep: Vec<usize> = (n..2 * n).collect();
    (0..n)
        .map(|j| {
            let mut d = DiffOp::zero(n);
            for (k, mk) in m.0.iter().enumerate() {
                d.add_term(MultiIndex::unit(n, k).0, mk.derivative(j).restrict_zero(&keep));
            }
            d
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldViolation {
    /// Coefficient of `∂_j` in `X_j` is not 1.
    Diagonal { field: usize, coefficient: String },
    /// A term of order other than one.
    NotFirstOrder { field: usize, partial: Vec<u32> },
    /// `P_jk != 0` although `q_k <= q_j`.
    WeightOrder { field: usize, k: usize },
    /// `P_jk` is not homogeneous of degree `q_k - q_j`.
    Homogeneity { field: usize, k: usize, expected: String, coefficient: String },
    /// `P_jk` depends on one of `x_k, ..., x_n`.
    LaterVariable { field: usize, k: usize, variable: usize },
}

/// Checks `X_j = ∂_j + Σ_{q_k > q_j} P_jk ∂_k` with `P_jk` homogeneous of
/// degree `q_k - q_j` in `x_1..x_{k-1}` only. Indices in the report are 1-based.
pub fn verify_vectorfield_form(alg: &GradedLieAlgebra, fields: &[DiffOp]) -> Vec<FieldViolation> {
    let n = alg.dim();
    let w = alg.weights();
    let mut report = Vec::new();
    for (j, x) in fields.iter().enumerate() {
        for (idx, _) in x.terms() {
            if idx.iter().sum::<u32>() != 1 {
                report.push(FieldViolation::NotFirstOrder { field: j + 1, partial: idx.clone() });
            }
        }
        let diag = x.coefficient(&MultiIndex::unit(n, j).0);
        if diag != MultiPoly::one(n) {
            report.push(FieldViolation::Diagonal { field: j + 1, coefficient: diag.to_string() });
        }
        for k in 0..n {
            if k == j {
                continue;
            }
            let p = x.coefficient(&MultiIndex::unit(n, k).0);
            if p.is_zero() {
                continue;
            }
            if w[k] <= w[j] {
                report.push(FieldViolation::WeightOrder { field: j + 1, k: k + 1 });
            }
            let expected = &w[k] - &w[j];
            if p.homogeneous_degree(w).as_ref() != Some(&expected) {
                report.push(FieldViolation::Homogeneity {
                    field: j + 1,
                    k: k + 1,
                    expected: expected.to_string(),
                    coefficient: p.to_string(),
                });
            }
            if let Some(v) = (k..n).find(|&v| p.depends_on(v)) {
                report.push(FieldViolation::LaterVariable { field: j + 1, k: k + 1, variable: v + 1 });
            }
        }
    }
    report
}

/// `X^α = X_1^{α_1} ⋯ X_n^{α_n}`.
pub fn power_xalpha(fields: &[DiffOp], alpha: &MultiIndex) -> DiffOp {
    let n = fields.len();
    let mut acc = DiffOp::identity(n);
    for (x, &a) in fields.iter().zip(&alpha.0) {
        if a > 0 {
            acc = acc.compose(&x.pow(a));
        }
    }
    acc
}

/// `R = Σ_j (-1)^{q/q_j} X_j^{2q/q_j}` with `q` the least common multiple of
/// the weights; returns `R` and its degree `2q`.
pub fn rockland_candidate(alg: &GradedLieAlgebra, fields: &[DiffOp]) -> (DiffOp, Rational) {
    let q = alg.common_weight_multiple();
    let n = alg.dim();
    let mut r = DiffOp::zero(n);
    for (x, qj) in fields.iter().zip(alg.weights()) {
        let ratio = (&q / qj).to_integer();
        let e: u32 = num_traits::ToPrimitive::to_u32(&ratio).expect("small exponent");
        let sign = if e % 2 == 0 { Rational::one() } else { -Rational::one() };
        r = r.add(&x.pow(2 * e).scale(&sign));
    }
    let two = Rational::from_integer(2.into());
    (r, two * q)
}

/// `[X_i, X_j] - Σ_k c_ij^k X_k` for every pair; all zero for a Lie homomorphism.
pub fn bracket_defects(alg: &GradedLieAlgebra, fields: &[DiffOp]) -> Vec<(usize, usize, DiffOp)> {
    let n = alg.dim();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut rhs = DiffOp::zero(n);
            for (k, c) in alg.bracket_basis(i, j) {
                rhs = rhs.add(&fields[k].scale(&c));
            }
            let d = fields[i].commutator(&fields[j]).sub(&rhs);
            if !d.is_zero() {
                out.push((i + 1, j + 1, d));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_law::bch_product;
    use crate::lie::{abelian, anisotropic, heisenberg};

    fn q(a: i64, b: i64) -> Rational {
        Rational::new(a.into(), b.into())
    }

    fn var(n: usize, i: usize) -> MultiPoly {
        MultiPoly::var(n, i)
    }

    #[test]
    fn leibniz_basic() {
        let d1 = DiffOp::partial(1, 0);
        let x = DiffOp::multiplication(var(1, 0));
        let c = d1.compose(&x);
        let expected = x.compose(&d1).add(&DiffOp::identity(1));
        assert_eq!(c, expected);
        assert_eq!(d1.compose(&DiffOp::identity(1)), d1);
    }

    #[test]
    fn heisenberg_fields() {
        let g = heisenberg();
        let m = bch_product(&g).unwrap();
        let xs = left_invariant_fields(&m);
        let half = q(1, 2);
        let x1 = DiffOp::partial(3, 0).sub(&DiffOp::multiplication(var(3, 1).scale(&half)).compose(&DiffOp::partial(3, 2)));
        let x2 = DiffOp::partial(3, 1).add(&DiffOp::multiplication(var(3, 0).scale(&half)).compose(&DiffOp::partial(3, 2)));
        assert_eq!(xs[0], x1);
        assert_eq!(xs[1], x2);
        assert_eq!(xs[2], DiffOp::partial(3, 2));
        let ys = right_invariant_fields(&m);
        let y1 = DiffOp::partial(3, 0).add(&DiffOp::multiplication(var(3, 1).scale(&half)).compose(&DiffOp::partial(3, 2)));
        assert_eq!(ys[0], y1);
        assert_eq!(xs[0].commutator(&xs[1]), xs[2]);
        assert_eq!(xs[2].apply(&var(3, 2)), MultiPoly::one(3));
        assert_eq!(xs[0].apply(&var(3, 2)), var(3, 1).scale(&q(-1, 2)));
        assert!(verify_vectorfield_form(&g, &xs).is_empty());
    }

    #[test]
    fn corrupted_field_fails_both_conditions() {
        let g = heisenberg();
        let m = bch_product(&g).unwrap();
        let mut xs = left_invariant_fields(&m);
        xs[0] = DiffOp::partial(3, 0).add(&DiffOp::multiplication(var(3, 2)).compose(&DiffOp::partial(3, 2)));
        let r = verify_vectorfield_form(&g, &xs);
        assert!(r.iter().any(|v| matches!(v, FieldViolation::Homogeneity { field: 1, k: 3, .. })));
        assert!(r.iter().any(|v| matches!(v, FieldViolation::LaterVariable { field: 1, k: 3, variable: 3 })));
    }

    #[test]
    fn rockland_examples() {
        let g = heisenberg();
        let xs = left_invariant_fields(&bch_product(&g).unwrap());
        let (r, deg) = rockland_candidate(&g, &xs);
        let expected = xs[0].pow(4).add(&xs[1].pow(4)).sub(&xs[2].pow(2));
        assert_eq!(r, expected);
        assert_eq!(deg, q(4, 1));
        assert_eq!(r.homogeneity_degree(g.weights()), Homogeneity::Degree(q(4, 1)));

        let a = abelian(2);
        let xs = left_invariant_fields(&bch_product(&a).unwrap());
        let (r, _) = rockland_candidate(&a, &xs);
        let lap = DiffOp::partial(2, 0).pow(2).add(&DiffOp::partial(2, 1).pow(2));
        assert_eq!(r, lap.scale(&q(-1, 1)));

        let an = anisotropic(&[q(1, 1), q(2, 1)]).unwrap();
        let xs = left_invariant_fields(&bch_product(&an).unwrap());
        let (r, deg) = rockland_candidate(&an, &xs);
        assert_eq!(r, DiffOp::partial(2, 0).pow(4).sub(&DiffOp::partial(2, 1).pow(2)));
        assert_eq!(deg, q(4, 1));
    }

    #[test]
    fn degrees() {
        let g = heisenberg();
        let xs = left_invariant_fields(&bch_product(&g).unwrap());
        assert_eq!(xs[0].homogeneity_degree(g.weights()), Homogeneity::Degree(q(1, 1)));
        assert_eq!(xs[2].homogeneity_degree(g.weights()), Homogeneity::Degree(q(2, 1)));
        assert_eq!(DiffOp::zero(3).homogeneity_degree(g.weights()), Homogeneity::Zero);
        let mixed = xs[0].add(&xs[2]);
        assert_eq!(mixed.homogeneity_degree(g.weights()), Homogeneity::Inhomogeneous);
        let p = power_xalpha(&xs, &MultiIndex(vec![1, 1, 0]));
        assert_eq!(p, xs[0].compose(&xs[1]));
        assert_eq!(power_xalpha(&xs, &MultiIndex::zero(3)), DiffOp::identity(3));
    }

    #[test]
    fn display_is_readable() {
        let g = heisenberg();
        let xs = left_invariant_fields(&bch_product(&g).unwrap());
        let names: Vec<String> = vec!["x".into(), "y".into(), "z".into()];
        assert_eq!(xs[0].fmt_with(&names), "-1/2*y d3 + d1");
    }
}
