//! Coadjoint action, skew forms `b_l`, orbit-dimension sequences and the
//! coarse stratification of the dual, Vergne polarizations.
//!
//! Covectors are coordinate vectors in the dual basis `X_1*, ..., X_n*`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::group_law::{adjoint_action, negate_argument};
use crate::linalg;
use crate::poly::{self, PolyMatrix};
use crate::{GradedLieAlgebra, LieError, Rational};

pub type Covector = Vec<Rational>;

/// `(d_0(l), ..., d_{n-1}(l))`, non-increasing with steps of 0 or 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct DimSeq(pub Vec<usize>);

impl DimSeq {
    /// Rejects sequences that increase or drop by more than one (including the
    /// implicit final step to 0).
    pub fn new(d: Vec<usize>) -> Result<Self, String> {
        let mut padded = d.clone();
        padded.push(0);
        for w in padded.windows(2) {
            if w[0] < w[1] || w[0] - w[1] > 1 {
                return Err(format!("malformed dimension sequence {d:?}: step {} -> {}", w[0], w[1]));
            }
        }
        Ok(DimSeq(d))
    }

    pub fn top(&self) -> usize {
        self.0.first().copied().unwrap_or(0)
    }
}

impl fmt::Display for DimSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// `coAd(x) = Ad(x⁻¹)ᵀ` as a polynomial matrix acting on coordinate covectors.
pub fn coadjoint_action(alg: &GradedLieAlgebra) -> Result<PolyMatrix, LieError> {
    let ad = adjoint_action(alg)?;
    Ok(poly::matrix_transpose(&negate_argument(&ad)))
}

/// Exact `coAd(x) l`.
pub fn apply_coadjoint(coad: &PolyMatrix, x: &[Rational], l: &[Rational]) -> Covector {
    linalg::mat_vec(&poly::matrix_eval(coad, x), l)
}

/// `B_ij = ⟨l, [X_i, X_j]⟩`.
pub fn bilinear_form(alg: &GradedLieAlgebra, l: &[Rational]) -> Vec<Vec<Rational>> {
    let n = alg.dim();
    let mut b = vec![vec![Rational::zero(); n]; n];
    for (i, j, k, c) in alg.structure_constants() {
        let v = c * &l[k];
        b[i][j] += &v;
        b[j][i] -= &v;
    }
    b
}

fn columns(b: &[Vec<Rational>], from: usize) -> Vec<Vec<Rational>> {
    b.iter().map(|r| r[from..].to_vec()).collect()
}

/// `d_i(l)` = rank of the column block `B[·, i+1..n]` (1-based), i.e. the
/// orbit dimension of `l` restricted to `span{X_{i+1}, ..., X_n}`.
pub fn dimension_sequence(alg: &GradedLieAlgebra, l: &[Rational]) -> DimSeq {
    let b = bilinear_form(alg, l);
    let d = (0..alg.dim()).map(|i| linalg::rank(&columns(&b, i))).collect();
    DimSeq::new(d).expect("orbit dimensions drop by at most one")
}

/// `(S(d), T(d))` with 1-based positions: `i ∈ S` iff `d_i = d_{i+1} + 1`,
/// reading `d = (d_1, ..., d_n)` and `d_{n+1} = 0`.
pub fn jump_set(d: &DimSeq) -> (Vec<usize>, Vec<usize>) {
    let mut padded = d.0.clone();
    padded.push(0);
    let mut s = Vec::new();
    let mut t = Vec::new();
    for i in 0..d.0.len() {
        if padded[i] == padded[i + 1] + 1 {
            s.push(i + 1);
        } else {
            t.push(i + 1);
        }
    }
    (s, t)
}

/// Stabilizer `𝔤_l`, the radical of `b_l`.
pub fn stabilizer(alg: &GradedLieAlgebra, l: &[Rational]) -> Vec<Vec<Rational>> {
    let b = bilinear_form(alg, l);
    linalg::nullspace(&b, alg.dim())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JumpMismatch {
    /// 1-based position.
    pub index: usize,
    pub jump_from_sequence: bool,
    pub jump_from_membership: bool,
}

/// Compares jumps of `d(l)` with `X_i ∉ 𝔤_l + span{X_{i+1}, ..., X_n}`.
pub fn jump_criterion_check(alg: &GradedLieAlgebra, l: &[Rational]) -> Vec<JumpMismatch> {
    let n = alg.dim();
    let (s, _) = jump_set(&dimension_sequence(alg, l));
    let stab = stabilizer(alg, l);
    let e = |i: usize| {
        let mut v = vec![Rational::zero(); n];
        v[i] = Rational::one();
        v
    };
    (0..n)
        .filter_map(|i| {
            let mut span = stab.clone();
            span.extend((i + 1..n).map(e));
            let membership_jump = !linalg::in_span(&span, &e(i));
            let seq_jump = s.contains(&(i + 1));
            (membership_jump != seq_jump).then_some(JumpMismatch {
                index: i + 1,
                jump_from_sequence: seq_jump,
                jump_from_membership: membership_jump,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stratum {
    pub d: DimSeq,
    /// 1-based jump indices.
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    pub sample_count: usize,
    #[serde(serialize_with = "ser_covectors")]
    pub sample_points: Vec<Covector>,
    pub rank_order_position: usize,
}

fn ser_covectors<S: serde::Serializer>(v: &[Covector], s: S) -> Result<S::Ok, S::Error> {
    let strs: Vec<Vec<String>> = v.iter().map(|l| l.iter().map(|c| c.to_string()).collect()).collect();
    strs.serialize(s)
}

const ODD_PRIMES: [i64; 24] = [3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97];

/// Deterministic sample covector: sample `index` uses support pattern
/// `(index mod (2^n - 1)) + 1` and coordinates `±p/2^k` with distinct odd
/// primes `p` and distinct exponents `k` within the vector.
pub fn sample_covector(n: usize, seed: u64, index: usize) -> Covector {
    let patterns = (1usize << n.min(20)) - 1;
    let mask = index % patterns + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut primes = ODD_PRIMES.to_vec();
    let mut exps: Vec<u32> = (0..16).collect();
    (0..n)
        .map(|j| {
            if mask & (1 << j) == 0 {
                return Rational::zero();
            }
            let p = primes.swap_remove(rng.random_range(0..primes.len()));
            let k = exps.swap_remove(rng.random_range(0..exps.len()));
            let sign = if rng.random::<bool>() { 1 } else { -1 };
            Rational::new((sign * p).into(), (1i64 << k).into())
        })
        .collect()
}

/// Groups `num_samples` deterministic covectors by `d(l)`, ordered by
/// descending lexicographic `d`. Strata not hit by the sample are absent.
pub fn stratify(alg: &GradedLieAlgebra, num_samples: usize, seed: u64) -> Vec<Stratum> {
    const KEEP: usize = 4;
    let n = alg.dim();
    let dims: Vec<(Covector, DimSeq)> = (0..num_samples)
        .into_par_iter()
        .map(|i| {
            let l = sample_covector(n, seed, i);
            let d = dimension_sequence(alg, &l);
            (l, d)
        })
        .collect();
    let mut groups: BTreeMap<DimSeq, (usize, Vec<Covector>)> = BTreeMap::new();
    for (l, d) in dims {
        let e = groups.entry(d).or_default();
        e.0 += 1;
        if e.1.len() < KEEP {
            e.1.push(l);
        }
    }
    groups
        .into_iter()
        .rev()
        .enumerate()
        .map(|(pos, (d, (count, pts)))| {
            let (s, t) = jump_set(&d);
            Stratum { d, s, t, sample_count: count, sample_points: pts, rank_order_position: pos + 1 }
        })
        .collect()
}

/// `l ≠ 0` and `l_i = 0` for every jump index `i ∈ S(d(l))`.
pub fn cross_section_membership(alg: &GradedLieAlgebra, l: &[Rational]) -> bool {
    if l.iter().all(Zero::is_zero) {
        return false;
    }
    let (s, _) = jump_set(&dimension_sequence(alg, l));
    s.iter().all(|&i| l[i - 1].is_zero())
}

fn form_value(b: &[Vec<Rational>], u: &[Rational], v: &[Rational]) -> Rational {
    let bv = linalg::mat_vec(b, v);
    u.iter().zip(&bv).map(|(a, c)| a * c).sum()
}

/// `𝔥_l = Σ_m rad(b_l |_{V_m})` along the ideals `V_m = span{X_{n-m+1}, ..., X_n}`.
/// Panics if the result is not an isotropic subalgebra of codimension `rank(B)/2`.
pub fn vergne_polarization(alg: &GradedLieAlgebra, l: &[Rational]) -> Vec<Vec<Rational>> {
    let n = alg.dim();
    let b = bilinear_form(alg, l);
    let mut gens = Vec::new();
    for m in 1..=n {
        let start = n - m;
        let sub: Vec<Vec<Rational>> = b[start..].iter().map(|r| r[start..].to_vec()).collect();
        for v in linalg::nullspace(&sub, m) {
            let mut full = vec![Rational::zero(); start];
            full.extend(v);
            gens.push(full);
        }
    }
    let h = linalg::span_basis(&gens);
    assert!(character_check(alg, l, &h), "polarization is not isotropic");
    for u in &h {
        for v in &h {
            assert!(linalg::in_span(&h, &alg.bracket(u, v)), "polarization is not a subalgebra");
        }
    }
    assert_eq!(2 * (n - h.len()), linalg::rank(&b), "polarization has the wrong codimension");
    h
}

/// `⟨l, [u, v]⟩ = 0` for all pairs of basis vectors of `h`.
pub fn character_check(alg: &GradedLieAlgebra, l: &[Rational], h: &[Vec<Rational>]) -> bool {
    let b = bilinear_form(alg, l);
    h.iter().all(|u| h.iter().all(|v| form_value(&b, u, v).is_zero()))
}

/// `(λ·l)_j = λ^{q_j} l_j`, from `⟨λ·l, X⟩ = ⟨l, A_λ X⟩`. Exact; needs integer weights.
pub fn dilation_on_dual(alg: &GradedLieAlgebra, lambda: &Rational, l: &[Rational]) -> Result<Covector, LieError> {
    alg.dilate_exact(lambda, l)
}

/// Floating-point variant of [`dilation_on_dual`], valid for any weights.
pub fn dilation_on_dual_f64(alg: &GradedLieAlgebra, lambda: f64, l: &[f64]) -> Result<Vec<f64>, LieError> {
    alg.dilate(lambda, l)
}

/// Both sides of `dim W + dim W⊥ = dim V + dim(W ∩ V⊥)` for a subspace `W ⊂ V`,
/// with `⊥` taken inside `V` for the form `b`.
pub fn skew_form_identity(b: &[Vec<Rational>], v: &[Vec<Rational>], w: &[Vec<Rational>]) -> (usize, usize) {
    let v = linalg::span_basis(v);
    let w = linalg::span_basis(w);
    let perp_in_v = |x: &[Vec<Rational>]| -> Vec<Vec<Rational>> {
        if v.is_empty() {
            return Vec::new();
        }
        // coefficients c with b(x_r, Σ c_a v_a) = 0 for all r
        let rows: Vec<Vec<Rational>> = x.iter().map(|xr| v.iter().map(|va| form_value(b, xr, va)).collect()).collect();
        let coeffs = if rows.is_empty() { linalg::identity(v.len()) } else { linalg::nullspace(&rows, v.len()) };
        coeffs
            .iter()
            .map(|c| {
                let mut out = vec![Rational::zero(); b.len()];
                for (ca, va) in c.iter().zip(&v) {
                    for (o, x) in out.iter_mut().zip(va) {
                        *o += ca * x;
                    }
                }
                out
            })
            .collect()
    };
    let w_perp = perp_in_v(&w);
    let v_perp = perp_in_v(&v);
    let lhs = w.len() + linalg::rank(&w_perp);
    let rhs = v.len() + linalg::intersection_dim(&w, &v_perp);
    (lhs, rhs)
}

/// For step ≤ 2, `coAd(x) l = l - Bᵀx` is affine in `x`; solve for the points
/// of the orbit of `l` lying in `{l' : l'_i = 0, i ∈ S(d(l))}`. Returns the
/// unique intersection point, or an error if there is none or more than one.
pub fn orbit_section_intersection(alg: &GradedLieAlgebra, l: &[Rational]) -> Result<Covector, String> {
    let step = alg.nilpotency_step().map_err(|e| e.to_string())?;
    if step > 2 {
        return Err(format!("orbit parametrization is affine only for step <= 2 (step {step})"));
    }
    let n = alg.dim();
    let b = bilinear_form(alg, l);
    let (s, _) = jump_set(&dimension_sequence(alg, l));
    // equations over x: l_i - Σ_r B_ri x_r = 0 for i in S; augmented rows [B_{·i}^T | l_i]
    let rows: Vec<Vec<Rational>> = s
        .iter()
        .map(|&i| {
            let mut r: Vec<Rational> = (0..n).map(|row| b[row][i - 1].clone()).collect();
            r.push(l[i - 1].clone());
            r
        })
        .collect();
    let point = |x: &[Rational]| -> Covector {
        (0..n)
            .map(|j| &l[j] - (0..n).map(|r| &b[r][j] * &x[r]).sum::<Rational>())
            .collect()
    };
    let mut x = vec![Rational::zero(); n];
    if !rows.is_empty() {
        let (red, pivots) = linalg::rref(&rows);
        if pivots.last() == Some(&n) {
            return Err("orbit does not meet the cross-section".into());
        }
        for (r, &p) in red.iter().zip(&pivots) {
            x[p] = r[n].clone();
        }
        // directions left free by the equations must not move the point
        let hom: Vec<Vec<Rational>> = red.iter().map(|r| r[..n].to_vec()).collect();
        for dir in linalg::nullspace(&hom, n) {
            let moved: Covector = (0..n).map(|j| (0..n).map(|r| &b[r][j] * &dir[r]).sum()).collect();
            if moved.iter().any(|v: &Rational| !v.is_zero()) {
                return Err("orbit meets the cross-section in more than one point".into());
            }
        }
    }
    Ok(point(&x))
}

/// 1-based indices of the nonzero coordinates.
pub fn support(l: &[Rational]) -> Vec<usize> {
    l.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(i, _)| i + 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_law::GroupLaw;
    use crate::lie::{abelian, filiform, heisenberg};
    use crate::poly::MultiPoly;

    fn q(a: i64) -> Rational {
        Rational::from_integer(a.into())
    }

    #[test]
    fn heisenberg_coadjoint_formula() {
        let g = heisenberg();
        let c = coadjoint_action(&g).unwrap();
        // rows give (α + yγ, β − xγ, γ)
        let (x, y) = (MultiPoly::var(3, 0), MultiPoly::var(3, 1));
        let one = MultiPoly::one(3);
        let zero = MultiPoly::zero(3);
        assert_eq!(c[0], vec![one.clone(), zero.clone(), y]);
        assert_eq!(c[1], vec![zero.clone(), one.clone(), -x]);
        assert_eq!(c[2], vec![zero.clone(), zero, one]);
    }

    #[test]
    fn coadjoint_cocycle() {
        let g = filiform(4);
        let c = coadjoint_action(&g).unwrap();
        let law = GroupLaw::new(&g).unwrap();
        for i in 0..10 {
            let x = sample_covector(4, 1, 15 + i);
            let y = sample_covector(4, 2, 15 + i);
            let l = sample_covector(4, 3, 15 + i);
            let xy = law.multiply_exact(&x, &y);
            let lhs = apply_coadjoint(&c, &xy, &l);
            let rhs = apply_coadjoint(&c, &x, &apply_coadjoint(&c, &y, &l));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn heisenberg_sequences() {
        let g = heisenberg();
        assert_eq!(dimension_sequence(&g, &[q(1), q(2), q(3)]).0, vec![2, 1, 0]);
        assert_eq!(dimension_sequence(&g, &[q(1), q(2), q(0)]).0, vec![0, 0, 0]);
        assert_eq!(dimension_sequence(&g, &[q(0), q(0), q(0)]).0, vec![0, 0, 0]);
        assert_eq!(jump_set(&DimSeq(vec![2, 1, 0])), (vec![1, 2], vec![3]));
        assert_eq!(jump_set(&DimSeq(vec![0, 0, 0])), (vec![], vec![1, 2, 3]));
        assert!(DimSeq::new(vec![2, 0, 0]).is_err());
        assert!(DimSeq::new(vec![0, 1, 0]).is_err());
        assert!(DimSeq::new(vec![2, 2]).is_err());
        assert!(DimSeq::new(vec![1, 1]).is_ok());
    }

    #[test]
    fn bilinear_form_examples() {
        let g = heisenberg();
        let b = bilinear_form(&g, &[q(0), q(0), q(5)]);
        assert_eq!(b[0][1], q(5));
        assert_eq!(b[1][0], q(-5));
        assert!(bilinear_form(&g, &[q(0), q(0), q(0)]).iter().flatten().all(Zero::is_zero));
        assert!(bilinear_form(&abelian(3), &[q(1), q(2), q(3)]).iter().flatten().all(Zero::is_zero));
    }

    #[test]
    fn jump_lemma_agrees() {
        for g in [heisenberg(), filiform(4), filiform(5)] {
            for i in 0..40 {
                let l = sample_covector(g.dim(), 7, i);
                assert!(jump_criterion_check(&g, &l).is_empty(), "{} {:?}", g.name(), l);
            }
        }
    }

    #[test]
    fn heisenberg_strata() {
        let g = heisenberg();
        let st = stratify(&g, 100, 42);
        let ds: Vec<Vec<usize>> = st.iter().map(|s| s.d.0.clone()).collect();
        assert_eq!(ds, vec![vec![2, 1, 0], vec![0, 0, 0]]);
        assert_eq!(st[0].t, vec![3]);
        assert_eq!(st[1].t, vec![1, 2, 3]);
        assert_eq!(st.iter().map(|s| s.sample_count).sum::<usize>(), 100);
        let ab = stratify(&abelian(3), 20, 0);
        assert_eq!(ab.len(), 1);
        assert_eq!(ab[0].d.0, vec![0, 0, 0]);
    }

    #[test]
    fn filiform_strata_match_enumeration() {
        let g = filiform(4);
        let mut brute = std::collections::BTreeSet::new();
        let vals = [-1i64, 0, 2];
        for a in vals {
            for b in vals {
                for c in vals {
                    for d in vals {
                        let l = vec![q(a), q(b), q(c), q(d)];
                        if l.iter().any(|v| !v.is_zero()) {
                            brute.insert(dimension_sequence(&g, &l));
                        }
                    }
                }
            }
        }
        let found: std::collections::BTreeSet<DimSeq> = stratify(&g, 200, 3).into_iter().map(|s| s.d).collect();
        assert_eq!(found, brute);
    }

    #[test]
    fn cross_sections() {
        let g = heisenberg();
        assert!(cross_section_membership(&g, &[q(0), q(0), q(3)]));
        assert!(!cross_section_membership(&g, &[q(1), q(0), q(3)]));
        assert!(cross_section_membership(&g, &[q(1), q(2), q(0)]));
        assert!(!cross_section_membership(&g, &[q(0), q(0), q(0)]));
    }

    #[test]
    fn polarizations() {
        let g = heisenberg();
        let h = vergne_polarization(&g, &[q(0), q(0), q(1)]);
        assert_eq!(h, vec![vec![q(0), q(1), q(0)], vec![q(0), q(0), q(1)]]);
        assert_eq!(vergne_polarization(&g, &[q(1), q(0), q(0)]).len(), 3);
        assert_eq!(vergne_polarization(&abelian(2), &[q(1), q(1)]).len(), 2);
        let xy = vec![vec![q(1), q(0), q(0)], vec![q(0), q(1), q(0)]];
        assert!(!character_check(&g, &[q(0), q(0), q(1)], &xy));
        for i in 0..30 {
            let f = filiform(5);
            vergne_polarization(&f, &sample_covector(5, 9, i));
        }
    }

    #[test]
    fn dual_dilation() {
        let g = heisenberg();
        assert_eq!(dilation_on_dual(&g, &q(2), &[q(0), q(0), q(1)]).unwrap(), vec![q(0), q(0), q(4)]);
        let l = vec![q(3), q(-1), q(2)];
        assert_eq!(dilation_on_dual(&g, &q(1), &l).unwrap(), l);
        assert!(dilation_on_dual(&g, &q(0), &l).is_err());
    }

    #[test]
    fn orbit_meets_heisenberg_section_once() {
        let g = heisenberg();
        for i in 0..20 {
            let mut l = sample_covector(3, 11, i);
            if l[2].is_zero() {
                l[2] = q(5);
            }
            let p = orbit_section_intersection(&g, &l).unwrap();
            assert_eq!(p, vec![q(0), q(0), l[2].clone()]);
        }
    }
}
