//! Graded nilpotent Lie algebras with rational dilation weights.
//!
//! Indices in the Rust API are 0-based. Indices inside [`Violation`] records
//! are 1-based so they line up with group files and printed reports.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::linalg;
use crate::{LieError, Rational};

/// Exponent vector α; its homogeneous degree is Σ α_j q_j.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, j: usize) -> Self {
        let mut a = vec![0; n];
        a[j] = 1;
        MultiIndex(a)
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }
}

/// One failed identity in a validation report.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Two entries for the same unordered pair disagree, or `[X_i, X_i] != 0`.
    Antisymmetry { i: usize, j: usize, k: usize, detail: String },
    /// Component `k` of the Jacobi sum on `(X_i, X_j, X_l)` is `value`.
    Jacobi { i: usize, j: usize, l: usize, k: usize, value: String },
    /// `c_ij^k != 0` but `q_i + q_j != q_k`.
    DilationCompatibility { i: usize, j: usize, k: usize, coefficient: String, weight_sum: String, weight: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Antisymmetry { i, j, k, detail } => {
                write!(f, "antisymmetry violated at c_{{{i}{j}}}^{k}: {detail}")
            }
            Violation::Jacobi { i, j, l, k, value } => {
                write!(f, "Jacobi identity fails on (X{i}, X{j}, X{l}): component {k} = {value}")
            }
            Violation::DilationCompatibility { i, j, k, coefficient, weight_sum, weight } => write!(
                f,
                "c_{{{i}{j}}}^{k} = {coefficient} but q_{i} + q_{j} = {weight_sum} != q_{k} = {weight}"
            ),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GradedLieAlgebra {
    name: String,
    weights: Vec<Rational>,
    weights_f64: Vec<f64>,
    labels: Vec<String>,
    // only i < j; values are sparse (k, c) lists sorted by k with c != 0
    brackets: BTreeMap<(usize, usize), Vec<(usize, Rational)>>,
    conflicts: Vec<Violation>,
    rescale: Rational,
}

impl GradedLieAlgebra {
    /// Weights must be positive and ascending; they are rescaled so that `q_1 = 1`.
    pub fn new(name: impl Into<String>, weights: Vec<Rational>, labels: Vec<String>) -> Result<Self, LieError> {
        let n = weights.len();
        if n == 0 {
            return Err(LieError::Empty);
        }
        if labels.len() != n {
            return Err(LieError::Arity { what: "basis labels", expected: n, got: labels.len() });
        }
        for (i, q) in weights.iter().enumerate() {
            if !q.is_positive() {
                return Err(LieError::NonPositiveWeight { index: i + 1, value: q.to_string() });
            }
            if i > 0 && q < &weights[i - 1] {
                return Err(LieError::UnsortedWeights { index: i + 1 });
            }
        }
        let rescale = weights[0].recip();
        let weights: Vec<Rational> = weights.iter().map(|q| q * &rescale).collect();
        let weights_f64 = weights.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect();
        Ok(GradedLieAlgebra {
            name: name.into(),
            weights,
            weights_f64,
            labels,
            brackets: BTreeMap::new(),
            conflicts: Vec::new(),
            rescale,
        })
    }

    /// Convenience constructor with labels `X1..Xn`.
    pub fn with_weights(name: impl Into<String>, weights: &[Rational]) -> Result<Self, LieError> {
        let labels = (1..=weights.len()).map(|i| format!("X{i}")).collect();
        Self::new(name, weights.to_vec(), labels)
    }

    /// Sets `[X_i, X_j] ∋ c X_k` (0-based). Entries with `i > j` are folded onto
    /// `(j, i)` with the sign flipped; disagreeing duplicates are kept as
    /// antisymmetry violations for [`validate_algebra`](Self::validate_algebra).
    pub fn set_bracket(&mut self, i: usize, j: usize, k: usize, c: Rational) -> Result<(), LieError> {
        let n = self.dim();
        for idx in [i, j, k] {
            if idx >= n {
                return Err(LieError::IndexOutOfRange { index: idx + 1, dim: n });
            }
        }
        if i == j {
            if !c.is_zero() {
                self.conflicts.push(Violation::Antisymmetry {
                    i: i + 1,
                    j: j + 1,
                    k: k + 1,
                    detail: format!("[X{0}, X{0}] has coefficient {c}", i + 1),
                });
            }
            return Ok(());
        }
        let (a, b, c) = if i < j { (i, j, c) } else { (j, i, -c) };
        let entry = self.brackets.entry((a, b)).or_default();
        match entry.iter().position(|(kk, _)| *kk == k) {
            Some(p) => {
                if entry[p].1 != c {
                    let prev = entry[p].1.clone();
                    self.conflicts.push(Violation::Antisymmetry {
                        i: a + 1,
                        j: b + 1,
                        k: k + 1,
                        detail: format!("conflicting entries {prev} and {c}"),
                    });
                }
            }
            None => {
                if !c.is_zero() {
                    entry.push((k, c));
                    entry.sort_by_key(|(kk, _)| *kk);
                }
            }
        }
        if entry.is_empty() {
            self.brackets.remove(&(a, b));
        }
        Ok(())
    }

    pub fn with_bracket(mut self, i: usize, j: usize, k: usize, c: Rational) -> Result<Self, LieError> {
        self.set_bracket(i, j, k, c)?;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weights_f64(&self) -> &[f64] {
        &self.weights_f64
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Factor applied to the input weights to normalize `q_1 = 1`.
    pub fn rescale_factor(&self) -> &Rational {
        &self.rescale
    }

    /// Stored structure constants `(i, j, k, c)` with `i < j`.
    pub fn structure_constants(&self) -> impl Iterator<Item = (usize, usize, usize, &Rational)> + '_ {
        self.brackets
            .iter()
            .flat_map(|(&(i, j), v)| v.iter().map(move |(k, c)| (i, j, *k, c)))
    }

    /// `c_ij^k` with antisymmetry applied.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> Rational {
        if i == j {
            return Rational::zero();
        }
        let (a, b, sign) = if i < j { (i, j, 1) } else { (j, i, -1) };
        self.brackets
            .get(&(a, b))
            .and_then(|v| v.iter().find(|(kk, _)| *kk == k))
            .map(|(_, c)| if sign > 0 { c.clone() } else { -c.clone() })
            .unwrap_or_else(Rational::zero)
    }

    /// Sparse `[X_i, X_j]`.
    pub fn bracket_basis(&self, i: usize, j: usize) -> Vec<(usize, Rational)> {
        if i == j {
            return Vec::new();
        }
        let (a, b, flip) = if i < j { (i, j, false) } else { (j, i, true) };
        match self.brackets.get(&(a, b)) {
            None => Vec::new(),
            Some(v) => v
                .iter()
                .map(|(k, c)| (*k, if flip { -c.clone() } else { c.clone() }))
                .collect(),
        }
    }

    pub fn is_abelian(&self) -> bool {
        self.brackets.is_empty()
    }

    pub fn bracket(&self, u: &[Rational], v: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.dim()];
        for (&(i, j), entries) in &self.brackets {
            let coef = &u[i] * &v[j] - &u[j] * &v[i];
            if coef.is_zero() {
                continue;
            }
            for (k, c) in entries {
                out[*k] += &coef * c;
            }
        }
        out
    }

    pub fn bracket_f64(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (&(i, j), entries) in &self.brackets {
            let coef = u[i] * v[j] - u[j] * v[i];
            for (k, c) in entries {
                out[*k] += coef * c.to_f64().unwrap_or(0.0);
            }
        }
        out
    }

    /// Antisymmetry conflicts from construction plus exact Jacobi failures.
    pub fn validate_algebra(&self) -> Vec<Violation> {
        let n = self.dim();
        let mut report = self.conflicts.clone();
        let e = |i: usize| {
            let mut v = vec![Rational::zero(); n];
            v[i] = Rational::one();
            v
        };
        for i in 0..n {
            for j in i + 1..n {
                for l in j + 1..n {
                    let (xi, xj, xl) = (e(i), e(j), e(l));
                    let a = self.bracket(&xi, &self.bracket(&xj, &xl));
                    let b = self.bracket(&xj, &self.bracket(&xl, &xi));
                    let c = self.bracket(&xl, &self.bracket(&xi, &xj));
                    for k in 0..n {
                        let s = &a[k] + &b[k] + &c[k];
                        if !s.is_zero() {
                            report.push(Violation::Jacobi {
                                i: i + 1,
                                j: j + 1,
                                l: l + 1,
                                k: k + 1,
                                value: s.to_string(),
                            });
                        }
                    }
                }
            }
        }
        report
    }

    pub fn validate_dilation_compatibility(&self) -> Vec<Violation> {
        self.structure_constants()
            .filter_map(|(i, j, k, c)| {
                let sum = &self.weights[i] + &self.weights[j];
                (sum != self.weights[k]).then(|| Violation::DilationCompatibility {
                    i: i + 1,
                    j: j + 1,
                    k: k + 1,
                    coefficient: c.to_string(),
                    weight_sum: sum.to_string(),
                    weight: self.weights[k].to_string(),
                })
            })
            .collect()
    }

    /// Both validations together.
    pub fn validate(&self) -> Vec<Violation> {
        let mut r = self.validate_algebra();
        r.extend(self.validate_dilation_compatibility());
        r
    }

    /// Q = Σ q_j.
    pub fn homogeneous_dimension(&self) -> Rational {
        self.weights.iter().sum()
    }

    pub fn homogeneous_dimension_f64(&self) -> f64 {
        self.weights_f64.iter().sum()
    }

    /// Length of the lower central series, from exact spans.
    pub fn nilpotency_step(&self) -> Result<usize, LieError> {
        let n = self.dim();
        let mut current = linalg::identity(n);
        for step in 1..=n {
            let mut next = Vec::new();
            for i in 0..n {
                let mut xi = vec![Rational::zero(); n];
                xi[i] = Rational::one();
                for c in &current {
                    let b = self.bracket(&xi, c);
                    if b.iter().any(|x| !x.is_zero()) {
                        next.push(b);
                    }
                }
            }
            let next = linalg::span_basis(&next);
            if next.is_empty() {
                return Ok(step);
            }
            if next.len() == current.len() {
                break;
            }
            current = next;
        }
        Err(LieError::NotNilpotent { dim: n })
    }

    /// `(α_λ x)_j = λ^{q_j} x_j`.
    pub fn dilate(&self, lambda: f64, x: &[f64]) -> Result<Vec<f64>, LieError> {
        if !(lambda > 0.0) {
            return Err(LieError::NonPositiveDilation(lambda.to_string()));
        }
        self.check_arity(x.len())?;
        Ok(self.dilate_unchecked(lambda, x))
    }

    /// Same as [`dilate`](Self::dilate) without checks, for inner loops.
    #[inline]
    pub fn dilate_unchecked(&self, lambda: f64, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.weights_f64)
            .map(|(xi, q)| xi * lambda.powf(*q))
            .collect()
    }

    /// Exact dilation; needs integer weights so that `λ^{q_j}` stays rational.
    pub fn dilate_exact(&self, lambda: &Rational, x: &[Rational]) -> Result<Vec<Rational>, LieError> {
        if !lambda.is_positive() {
            return Err(LieError::NonPositiveDilation(lambda.to_string()));
        }
        self.check_arity(x.len())?;
        x.iter()
            .zip(&self.weights)
            .enumerate()
            .map(|(j, (xi, q))| {
                if !q.is_integer() {
                    return Err(LieError::NonIntegerWeight { index: j + 1, value: q.to_string() });
                }
                let p = q.to_integer().to_i32().expect("weight fits in i32");
                Ok(xi * num_traits::pow::Pow::pow(lambda, p))
            })
            .collect()
    }

    pub fn homogeneous_degree(&self, alpha: &MultiIndex) -> Result<Rational, LieError> {
        self.check_arity(alpha.0.len())?;
        Ok(alpha
            .0
            .iter()
            .zip(&self.weights)
            .map(|(a, q)| q * Rational::from_integer((*a).into()))
            .sum())
    }

    pub(crate) fn check_arity(&self, got: usize) -> Result<(), LieError> {
        if got == self.dim() {
            Ok(())
        } else {
            Err(LieError::Arity { what: "coordinates", expected: self.dim(), got })
        }
    }

    /// Smallest positive rational `q` with every `q / q_j` a positive integer.
    pub fn common_weight_multiple(&self) -> Rational {
        use num_integer::Integer;
        let mut num = num_bigint::BigInt::one();
        let mut den = num_bigint::BigInt::zero();
        for q in &self.weights {
            num = num.lcm(q.numer());
            den = den.gcd(q.denom());
        }
        Rational::new(num, den)
    }
}

fn rat(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// ℝⁿ with all weights 1.
pub fn abelian(n: usize) -> GradedLieAlgebra {
    GradedLieAlgebra::with_weights(format!("abelian{n}"), &vec![rat(1); n]).expect("valid weights")
}

/// ℝⁿ with the given ascending weights.
pub fn anisotropic(weights: &[Rational]) -> Result<GradedLieAlgebra, LieError> {
    GradedLieAlgebra::with_weights(format!("anisotropic{}", weights.len()), weights)
}

/// Three-dimensional Heisenberg algebra, `[X, Y] = Z`, weights (1, 1, 2).
pub fn heisenberg() -> GradedLieAlgebra {
    GradedLieAlgebra::new(
        "heisenberg",
        vec![rat(1), rat(1), rat(2)],
        vec!["X".into(), "Y".into(), "Z".into()],
    )
    .and_then(|g| g.with_bracket(0, 1, 2, rat(1)))
    .expect("valid")
}

/// Standard filiform algebra of dimension `n >= 3`: `[X1, Xi] = X(i+1)` for
/// `2 <= i < n`, weights (1, 1, 2, ..., n-1).
pub fn filiform(n: usize) -> GradedLieAlgebra {
    assert!(n >= 3, "filiform algebras start in dimension 3");
    let mut w = vec![rat(1)];
    w.extend((1..n).map(|i| rat(i as i64)));
    let mut g = GradedLieAlgebra::with_weights(format!("filiform{n}"), &w).expect("valid");
    for i in 1..n - 1 {
        g.set_bracket(0, i, i + 1, rat(1)).expect("in range");
    }
    g
}

/// Free two-step nilpotent algebra on `r` generators: dimension `r + r(r-1)/2`.
pub fn free_two_step(r: usize) -> GradedLieAlgebra {
    let pairs: Vec<(usize, usize)> = (0..r).flat_map(|i| (i + 1..r).map(move |j| (i, j))).collect();
    let mut w = vec![rat(1); r];
    w.extend(std::iter::repeat_n(rat(2), pairs.len()));
    let mut g = GradedLieAlgebra::with_weights(format!("free2step{r}"), &w).expect("valid");
    for (p, (i, j)) in pairs.iter().enumerate() {
        g.set_bracket(*i, *j, r + p, rat(1)).expect("in range");
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heisenberg_is_valid_and_graded() {
        let h = heisenberg();
        assert!(h.validate_algebra().is_empty());
        assert!(h.validate_dilation_compatibility().is_empty());
        assert_eq!(h.homogeneous_dimension(), rat(4));
        assert_eq!(h.nilpotency_step().unwrap(), 2);
    }

    #[test]
    fn extra_bracket_breaks_jacobi() {
        // [X, Z] = X on top of Heisenberg; the Jacobi sum on (X, Y, Z) is Z
        let g = heisenberg().with_bracket(0, 2, 0, rat(1)).unwrap();
        let r = g.validate_algebra();
        assert_eq!(r.len(), 1);
        assert!(matches!(&r[0], Violation::Jacobi { k: 3, value, .. } if value == "1"));
    }

    #[test]
    fn wrong_weights_flagged() {
        let g = GradedLieAlgebra::with_weights("h111", &[rat(1), rat(1), rat(1)])
            .unwrap()
            .with_bracket(0, 1, 2, rat(1))
            .unwrap();
        let r = g.validate_dilation_compatibility();
        assert_eq!(r.len(), 1);
        assert!(matches!(r[0], Violation::DilationCompatibility { i: 1, j: 2, k: 3, .. }));
    }

    #[test]
    fn conflicting_antisymmetric_entries() {
        let mut g = heisenberg();
        g.set_bracket(1, 0, 2, rat(1)).unwrap(); // would need -1
        assert!(matches!(g.validate_algebra()[0], Violation::Antisymmetry { .. }));
        let mut g = heisenberg();
        g.set_bracket(1, 0, 2, rat(-1)).unwrap();
        assert!(g.validate_algebra().is_empty());
    }

    #[test]
    fn abelian_anisotropic_dimension() {
        assert_eq!(abelian(3).homogeneous_dimension(), rat(3));
        assert_eq!(abelian(3).nilpotency_step().unwrap(), 1);
        let a = anisotropic(&[rat(1), rat(2)]).unwrap();
        assert_eq!(a.homogeneous_dimension(), rat(3));
        assert!(a.validate().is_empty());
    }

    #[test]
    fn filiform_step() {
        assert_eq!(filiform(4).nilpotency_step().unwrap(), 3);
        assert!(filiform(4).validate().is_empty());
        assert_eq!(filiform(5).nilpotency_step().unwrap(), 4);
        assert_eq!(free_two_step(3).dim(), 6);
        assert!(free_two_step(3).validate().is_empty());
    }

    #[test]
    fn non_nilpotent_detected() {
        // [X1, X2] = X2 is solvable, not nilpotent; weights are irrelevant here
        let g = GradedLieAlgebra::with_weights("aff", &[rat(1), rat(1)])
            .unwrap()
            .with_bracket(0, 1, 1, rat(1))
            .unwrap();
        assert!(matches!(g.nilpotency_step(), Err(LieError::NotNilpotent { .. })));
    }

    #[test]
    fn rescaling_to_unit_first_weight() {
        let g = GradedLieAlgebra::with_weights("a", &[rat(2), rat(4)]).unwrap();
        assert_eq!(g.weights(), &[rat(1), rat(2)]);
        assert_eq!(g.rescale_factor(), &Rational::new(1.into(), 2.into()));
        assert!(GradedLieAlgebra::with_weights("b", &[rat(2), rat(1)]).is_err());
        assert!(GradedLieAlgebra::with_weights("c", &[rat(0), rat(1)]).is_err());
    }

    #[test]
    fn dilation_examples() {
        let h = heisenberg();
        assert_eq!(h.dilate(2.0, &[1.0, 1.0, 1.0]).unwrap(), vec![2.0, 2.0, 4.0]);
        assert_eq!(h.dilate(0.5, &[2.0, 2.0, 4.0]).unwrap(), vec![1.0, 1.0, 1.0]);
        assert!(h.dilate(0.0, &[1.0, 1.0, 1.0]).is_err());
        assert!(h.dilate(-1.0, &[1.0, 1.0, 1.0]).is_err());
        let half = Rational::new(1.into(), 2.into());
        let x = vec![rat(2), rat(2), rat(4)];
        assert_eq!(h.dilate_exact(&half, &x).unwrap(), vec![rat(1), rat(1), rat(1)]);
        assert_eq!(h.dilate_exact(&rat(1), &x).unwrap(), x);
    }

    #[test]
    fn degrees_and_common_multiple() {
        let h = heisenberg();
        assert_eq!(h.homogeneous_degree(&MultiIndex(vec![1, 1, 0])).unwrap(), rat(2));
        assert_eq!(h.homogeneous_degree(&MultiIndex(vec![0, 0, 1])).unwrap(), rat(2));
        assert_eq!(h.homogeneous_degree(&MultiIndex::zero(3)).unwrap(), rat(0));
        assert_eq!(h.common_weight_multiple(), rat(2));
        assert_eq!(abelian(2).common_weight_multiple(), rat(1));
        let g = anisotropic(&[rat(1), Rational::new(3.into(), 2.into())]).unwrap();
        assert_eq!(g.common_weight_multiple(), rat(3));
    }
}
