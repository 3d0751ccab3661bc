//! Sparse multivariate polynomials with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::Rational;

/// Exponent vector → nonzero coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::monomial(nvars, unit(nvars, i), Rational::one())
    }

    pub fn monomial(nvars: usize, exps: Vec<u32>, c: Rational) -> Self {
        assert_eq!(exps.len(), nvars, "exponent arity");
        let mut p = Self::zero(nvars);
        p.add_term(exps, c);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exps: &[u32]) -> Rational {
        self.terms.get(exps).cloned().unwrap_or_else(Rational::zero)
    }

    /// Constant term.
    pub fn constant_term(&self) -> Rational {
        self.coefficient(&vec![0; self.nvars])
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            let k = e2[i];
            e2[i] -= 1;
            out.add_term(e2, c * Rational::from_integer(k.into()));
        }
        out
    }

    /// `∂^I` for a multi-index over all variables.
    pub fn partial(&self, idx: &[u32]) -> Self {
        let mut out = Self::zero(self.nvars);
        'terms: for (e, c) in &self.terms {
            let mut e2 = e.clone();
            let mut f = c.clone();
            for (v, &k) in idx.iter().enumerate() {
                if e2[v] < k {
                    continue 'terms;
                }
                for r in 0..k {
                    f *= Rational::from_integer((e2[v] - r).into());
                }
                e2[v] -= k;
            }
            out.add_term(e2, f);
        }
        out
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars, "evaluation arity");
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = c.clone();
                for (x, &k) in point.iter().zip(e) {
                    if k > 0 {
                        t *= num_traits::pow::Pow::pow(x, k);
                    }
                }
                t
            })
            .sum()
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.nvars, "evaluation arity");
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = c.to_f64().unwrap_or(f64::NAN);
                for (x, &k) in point.iter().zip(e) {
                    if k > 0 {
                        t *= x.powi(k as i32);
                    }
                }
                t
            })
            .sum()
    }

    /// Replace variable `i` by `subs[i]`; all substitutes share one ring.
    pub fn compose(&self, subs: &[MultiPoly]) -> MultiPoly {
        assert_eq!(subs.len(), self.nvars, "substitution arity");
        let target = subs.first().map_or(0, |p| p.nvars);
        let mut powers: Vec<Vec<MultiPoly>> = subs.iter().map(|s| vec![MultiPoly::one(s.nvars)]).collect();
        let mut out = MultiPoly::zero(target);
        for (e, c) in &self.terms {
            let mut t = MultiPoly::constant(target, c.clone());
            for (v, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while powers[v].len() <= k as usize {
                    let next = powers[v].last().expect("nonempty") * &subs[v];
                    powers[v].push(next);
                }
                t = &t * &powers[v][k as usize];
            }
            out = out + t;
        }
        out
    }

    /// Re-embed into a ring with `nvars` variables; variable `i` goes to `map[i]`.
    pub fn remap(&self, nvars: usize, map: &[usize]) -> MultiPoly {
        let mut out = MultiPoly::zero(nvars);
        for (e, c) in &self.terms {
            let mut e2 = vec![0; nvars];
            for (i, &k) in e.iter().enumerate() {
                e2[map[i]] += k;
            }
            out.add_term(e2, c.clone());
        }
        out
    }

    /// Set the listed variables to zero and drop them from the ring.
    pub fn restrict_zero(&self, keep: &[usize]) -> MultiPoly {
        let mut out = MultiPoly::zero(keep.len());
        for (e, c) in &self.terms {
            let dropped = (0..self.nvars).filter(|v| !keep.contains(v)).any(|v| e[v] > 0);
            if dropped {
                continue;
            }
            out.add_term(keep.iter().map(|&v| e[v]).collect(), c.clone());
        }
        out
    }

    /// Weighted degree Σ e_v w_v of one exponent vector.
    pub fn weighted_degree(exps: &[u32], weights: &[Rational]) -> Rational {
        exps.iter()
            .zip(weights)
            .map(|(&k, w)| w * Rational::from_integer(k.into()))
            .sum()
    }

    /// `Some(d)` when every monomial has weighted degree `d`; the zero
    /// polynomial reports `None`.
    pub fn homogeneous_degree(&self, weights: &[Rational]) -> Option<Rational> {
        let mut deg = None;
        for e in self.terms.keys() {
            let d = Self::weighted_degree(e, weights);
            match &deg {
                None => deg = Some(d),
                Some(d0) if *d0 != d => return None,
                _ => {}
            }
        }
        deg
    }

    pub fn depends_on(&self, v: usize) -> bool {
        self.terms.keys().any(|e| e[v] > 0)
    }

    pub fn fmt_with(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (n, (e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if n == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(v, &k)| if k == 1 { names[v].clone() } else { format!("{}^{k}", names[v]) })
                .collect();
            if mono.is_empty() {
                s.push_str(&a.to_string());
            } else {
                if !a.is_one() {
                    s.push_str(&a.to_string());
                    s.push('*');
                }
                s.push_str(&mono.join("*"));
            }
        }
        s
    }
}

fn unit(n: usize, i: usize) -> Vec<u32> {
    let mut e = vec![0; n];
    e[i] = 1;
    e
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (1..=self.nvars).map(|i| format!("x{i}")).collect();
        f.write_str(&self.fmt_with(&names))
    }
}

impl Add for MultiPoly {
    type Output = MultiPoly;
    fn add(mut self, rhs: MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars, "ring mismatch");
        for (e, c) in rhs.terms {
            self.add_term(e, c);
        }
        self
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.clone() + rhs.clone()
    }
}

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(mut self) -> MultiPoly {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        -self.clone()
    }
}

impl Sub for MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: MultiPoly) -> MultiPoly {
        self + (-rhs)
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self.clone() - rhs.clone()
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars, "ring mismatch");
        let mut out = MultiPoly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }
}

impl Mul for MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: MultiPoly) -> MultiPoly {
        &self * &rhs
    }
}

/// A vector of polynomials in a common ring: a polynomial map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyVec(pub Vec<MultiPoly>);

impl PolyVec {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.0.first().map_or(0, MultiPoly::nvars)
    }

    pub fn eval(&self, point: &[Rational]) -> Vec<Rational> {
        self.0.iter().map(|p| p.eval(point)).collect()
    }

    pub fn eval_f64(&self, point: &[f64]) -> Vec<f64> {
        self.0.iter().map(|p| p.eval_f64(point)).collect()
    }

    pub fn compose(&self, subs: &[MultiPoly]) -> PolyVec {
        PolyVec(self.0.iter().map(|p| p.compose(subs)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(MultiPoly::is_zero)
    }

    /// Precompiled floating-point evaluator.
    pub fn compile(&self) -> CompiledPolyVec {
        CompiledPolyVec::new(self)
    }
}

/// Square matrix of polynomials, row-major.
pub type PolyMatrix = Vec<Vec<MultiPoly>>;

pub fn matrix_mul(a: &PolyMatrix, b: &PolyMatrix) -> PolyMatrix {
    let n = a.len();
    let m = b.first().map_or(0, Vec::len);
    let nv = a[0][0].nvars();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut s = MultiPoly::zero(nv);
                    for (k, bk) in b.iter().enumerate() {
                        if a[i][k].is_zero() || bk[j].is_zero() {
                            continue;
                        }
                        s = s + &a[i][k] * &bk[j];
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub fn matrix_transpose(a: &PolyMatrix) -> PolyMatrix {
    let n = a.len();
    let m = a.first().map_or(0, Vec::len);
    (0..m).map(|j| (0..n).map(|i| a[i][j].clone()).collect()).collect()
}

pub fn matrix_eval(a: &PolyMatrix, point: &[Rational]) -> Vec<Vec<Rational>> {
    a.iter().map(|r| r.iter().map(|p| p.eval(point)).collect()).collect()
}

pub fn matrix_identity(n: usize, nvars: usize) -> PolyMatrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { MultiPoly::one(nvars) } else { MultiPoly::zero(nvars) })
                .collect()
        })
        .collect()
}

/// Determinant by cofactor expansion along the first row, memoized on the
/// remaining column subset. Fine for the small matrices used here.
pub fn determinant(a: &PolyMatrix) -> MultiPoly {
    let n = a.len();
    let nv = if n == 0 { 0 } else { a[0][0].nvars() };
    let mut memo: std::collections::HashMap<u64, MultiPoly> = std::collections::HashMap::new();
    fn rec(
        a: &PolyMatrix,
        row: usize,
        cols: u64,
        nv: usize,
        memo: &mut std::collections::HashMap<u64, MultiPoly>,
    ) -> MultiPoly {
        let n = a.len();
        if row == n {
            return MultiPoly::one(nv);
        }
        if let Some(p) = memo.get(&cols) {
            return p.clone();
        }
        let mut acc = MultiPoly::zero(nv);
        let mut sign_pos = 0usize;
        for c in 0..n {
            if cols & (1 << c) == 0 {
                continue;
            }
            let entry = &a[row][c];
            if !entry.is_zero() {
                let minor = rec(a, row + 1, cols & !(1 << c), nv, memo);
                let t = entry * &minor;
                acc = if sign_pos % 2 == 0 { acc + t } else { acc - t };
            }
            sign_pos += 1;
        }
        memo.insert(cols, acc.clone());
        acc
    }
    rec(a, 0, (1u64 << n) - 1, nv, &mut memo)
}

/// Flat f64 evaluator: for each output, a list of (coefficient, [(var, power)]).
#[derive(Clone, Debug)]
pub struct CompiledPolyVec {
    nvars: usize,
    outputs: Vec<Vec<(f64, Vec<(usize, i32)>)>>,
}

impl CompiledPolyVec {
    pub fn new(p: &PolyVec) -> Self {
        let outputs = p
            .0
            .iter()
            .map(|q| {
                q.terms()
                    .map(|(e, c)| {
                        let factors = e
                            .iter()
                            .enumerate()
                            .filter(|(_, &k)| k > 0)
                            .map(|(v, &k)| (v, k as i32))
                            .collect();
                        (c.to_f64().unwrap_or(f64::NAN), factors)
                    })
                    .collect()
            })
            .collect();
        CompiledPolyVec { nvars: p.nvars(), outputs }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn dim(&self) -> usize {
        self.outputs.len()
    }

    #[inline]
    pub fn eval_into(&self, point: &[f64], out: &mut [f64]) {
        debug_assert_eq!(point.len(), self.nvars);
        for (o, terms) in out.iter_mut().zip(&self.outputs) {
            let mut s = 0.0;
            for (c, factors) in terms {
                let mut t = *c;
                for &(v, k) in factors {
                    t *= if k == 1 { point[v] } else { point[v].powi(k) };
                }
                s += t;
            }
            *o = s;
        }
    }

    pub fn eval(&self, point: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.outputs.len()];
        self.eval_into(point, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> Rational {
        Rational::new(a.into(), b.into())
    }

    #[test]
    fn arithmetic_cancels() {
        let x = MultiPoly::var(2, 0);
        let y = MultiPoly::var(2, 1);
        let p = &(&x + &y) * &(&x - &y);
        let r = &(&x * &x) - &(&y * &y);
        assert_eq!(p, r);
        assert!((&p - &r).is_zero());
    }

    #[test]
    fn derivative_and_partial() {
        let x = MultiPoly::var(2, 0);
        let y = MultiPoly::var(2, 1);
        let p = &x.pow(3) * &y.pow(2);
        assert_eq!(p.derivative(0), (&x.pow(2) * &y.pow(2)).scale(&q(3, 1)));
        assert_eq!(p.partial(&[2, 1]), (&x * &y).scale(&q(12, 1)));
        assert!(p.partial(&[4, 0]).is_zero());
    }

    #[test]
    fn evaluation_paths_agree() {
        let x = MultiPoly::var(2, 0);
        let y = MultiPoly::var(2, 1);
        let p = &x.pow(2).scale(&q(1, 3)) - &(&x * &y).scale(&q(5, 7));
        let pt = [q(3, 2), q(-2, 5)];
        let exact = p.eval(&pt);
        assert_eq!(exact, q(3, 4) + q(3, 7));
        let f = p.eval_f64(&[1.5, -0.4]);
        assert!((f - exact.to_f64().unwrap()).abs() < 1e-12);
        let c = PolyVec(vec![p.clone()]).compile();
        assert!((c.eval(&[1.5, -0.4])[0] - f).abs() < 1e-14);
    }

    #[test]
    fn composition() {
        // p(u) = u^2 with u = x + 1
        let u = MultiPoly::var(1, 0);
        let p = u.pow(2);
        let x = MultiPoly::var(1, 0);
        let sub = &x + &MultiPoly::one(1);
        let c = p.compose(&[sub]);
        assert_eq!(c, &(&x.pow(2) + &x.scale(&q(2, 1))) + &MultiPoly::one(1));
    }

    #[test]
    fn homogeneity() {
        let w = [q(1, 1), q(2, 1)];
        let x = MultiPoly::var(2, 0);
        let y = MultiPoly::var(2, 1);
        assert_eq!((&x.pow(2) + &y).homogeneous_degree(&w), Some(q(2, 1)));
        assert_eq!((&x + &y).homogeneous_degree(&w), None);
    }

    #[test]
    fn determinant_small() {
        let x = MultiPoly::var(1, 0);
        let one = MultiPoly::one(1);
        let zero = MultiPoly::zero(1);
        // [[1, x, x^2], [0, 1, x], [0, 0, 1]] has det 1
        let m = vec![
            vec![one.clone(), x.clone(), x.pow(2)],
            vec![zero.clone(), one.clone(), x.clone()],
            vec![zero.clone(), zero.clone(), one.clone()],
        ];
        assert_eq!(determinant(&m), one);
        // [[x, 1], [1, x]] has det x^2 - 1
        let m2 = vec![vec![x.clone(), one.clone()], vec![one.clone(), x.clone()]];
        assert_eq!(determinant(&m2), &x.pow(2) - &one);
    }

    #[test]
    fn display() {
        let x = MultiPoly::var(2, 0);
        let y = MultiPoly::var(2, 1);
        let p = &(&x * &y).scale(&q(1, 2)) - &y;
        let names = vec!["a".to_string(), "b".to_string()];
        assert_eq!(p.fmt_with(&names), "-b + 1/2*a*b");
    }
}
