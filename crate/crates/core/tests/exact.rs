use carnot_core::coadjoint::*;
use carnot_core::group_file::{bundled, bundled_all};
use carnot_core::group_law::group_inverse;
use carnot_core::invariant_ops::{left_invariant_fields, power_xalpha, right_invariant_fields, Homogeneity};
use carnot_core::lie::{free_two_step, heisenberg};
use carnot_core::{GradedLieAlgebra, GroupLaw, MultiIndex, Rational};
use num_traits::Zero;
use proptest::prelude::*;

fn rat() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=9).prop_map(|(n, d)| Rational::new(n.into(), d.into()))
}

fn pos_rat() -> impl Strategy<Value = Rational> {
    (1i64..=20, 1i64..=9).prop_map(|(n, d)| Rational::new(n.into(), d.into()))
}

fn vec_of(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(rat(), n)
}

fn corpus() -> Vec<GradedLieAlgebra> {
    let mut v = bundled_all();
    v.push(free_two_step(3));
    v
}

fn integer_weights(alg: &GradedLieAlgebra) -> bool {
    alg.weights().iter().all(|w| w.is_integer())
}

fn law(name: &str) -> GroupLaw {
    GroupLaw::new(&bundled(name).unwrap()).unwrap()
}

#[test]
fn corpus_validates_and_is_nilpotent() {
    for alg in corpus() {
        assert!(alg.validate().is_empty(), "{}", alg.name());
        assert!(alg.nilpotency_step().unwrap() <= alg.dim());
        // brackets are eigenvectors of the grading derivation
        for i in 0..alg.dim() {
            for j in 0..alg.dim() {
                let sum = &alg.weights()[i] + &alg.weights()[j];
                for (k, c) in alg.bracket_basis(i, j) {
                    assert!(c.is_zero() || alg.weights()[k] == sum);
                }
            }
        }
    }
}

#[test]
fn left_and_right_fields_commute() {
    for alg in corpus() {
        let l = GroupLaw::new(&alg).unwrap();
        let xs = left_invariant_fields(l.product());
        let ys = right_invariant_fields(l.product());
        for x in &xs {
            for y in &ys {
                assert!(x.commutator(y).is_zero(), "{}", alg.name());
            }
        }
    }
}

#[test]
fn powers_of_fields_have_weighted_degree() {
    for name in ["heisenberg", "filiform4", "anisotropic2"] {
        let alg = bundled(name).unwrap();
        let xs = left_invariant_fields(GroupLaw::new(&alg).unwrap().product());
        let n = alg.dim();
        let mut alpha = vec![0u32; n];
        // every multi-index with entries ≤ 2, kept when [α] ≤ 6
        loop {
            let a = MultiIndex(alpha.clone());
            let deg = alg.homogeneous_degree(&a).unwrap();
            if deg <= Rational::from_integer(6.into()) {
                let p = power_xalpha(&xs, &a);
                let want = if alpha.iter().all(|&e| e == 0) { Homogeneity::Degree(Rational::zero()) } else { Homogeneity::Degree(deg) };
                assert_eq!(p.homogeneity_degree(alg.weights()), want, "{name} {alpha:?}");
            }
            let mut k = 0;
            while k < n && alpha[k] == 2 {
                alpha[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
            alpha[k] += 1;
        }
    }
}

#[test]
fn inverse_is_negation() {
    for alg in corpus() {
        let l = GroupLaw::new(&alg).unwrap();
        let inv = group_inverse(&alg, l.product());
        let x: Vec<Rational> = (0..alg.dim()).map(|j| Rational::new((j as i64 * 3 - 2).into(), 5.into())).collect();
        let ix = inv.eval(&x);
        assert_eq!(ix, x.iter().map(|v| -v).collect::<Vec<_>>());
        assert!(l.multiply_exact(&x, &ix).iter().all(Zero::is_zero));
    }
}

#[test]
fn heisenberg_strata_are_the_two_expected() {
    let st = stratify(&heisenberg(), 200, 11);
    let ds: Vec<Vec<usize>> = st.into_iter().map(|s| s.d.0).collect();
    assert_eq!(ds, vec![vec![2, 1, 0], vec![0, 0, 0]]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn heisenberg_associativity(x in vec_of(3), y in vec_of(3), z in vec_of(3)) {
        let l = law("heisenberg");
        prop_assert_eq!(l.multiply_exact(&l.multiply_exact(&x, &y), &z), l.multiply_exact(&x, &l.multiply_exact(&y, &z)));
    }

    #[test]
    fn filiform_associativity(x in vec_of(4), y in vec_of(4), z in vec_of(4)) {
        let l = law("filiform4");
        prop_assert_eq!(l.multiply_exact(&l.multiply_exact(&x, &y), &z), l.multiply_exact(&x, &l.multiply_exact(&y, &z)));
    }

    #[test]
    fn dilations_compose(idx in 0usize..10, a in pos_rat(), b in pos_rat(), x in vec_of(6)) {
        let algs = corpus();
        let alg = &algs[idx % algs.len()];
        prop_assume!(integer_weights(alg));
        let x = &x[..alg.dim()];
        let two = alg.dilate_exact(&a, &alg.dilate_exact(&b, x).unwrap()).unwrap();
        prop_assert_eq!(two, alg.dilate_exact(&(&a * &b), x).unwrap());
    }

    #[test]
    fn dilations_are_automorphisms_pointwise(a in pos_rat(), x in vec_of(4), y in vec_of(4)) {
        let alg = bundled("filiform4").unwrap();
        let l = GroupLaw::new(&alg).unwrap();
        let lhs = l.multiply_exact(&alg.dilate_exact(&a, &x).unwrap(), &alg.dilate_exact(&a, &y).unwrap());
        prop_assert_eq!(lhs, alg.dilate_exact(&a, &l.multiply_exact(&x, &y)).unwrap());
    }

    #[test]
    fn orbit_dimensions_are_invariant(idx in 0usize..10, l in vec_of(6), x in vec_of(6), a in pos_rat()) {
        let algs = corpus();
        let alg = &algs[idx % algs.len()];
        let n = alg.dim();
        let (l, x) = (&l[..n], &x[..n]);
        let d = dimension_sequence(alg, l);
        // steps of 0 or 1, and rank-nullity for the full form
        prop_assert!(DimSeq::new(d.0.clone()).is_ok());
        prop_assert_eq!(stabilizer(alg, l).len() + d.top(), n);
        let coad = coadjoint_action(alg).unwrap();
        prop_assert_eq!(&dimension_sequence(alg, &apply_coadjoint(&coad, x, l)), &d);
        if integer_weights(alg) {
            prop_assert_eq!(&dimension_sequence(alg, &dilation_on_dual(alg, &a, l).unwrap()), &d);
        }
        prop_assert!(jump_criterion_check(alg, l).is_empty());
    }

    #[test]
    fn skew_form_rank_identity(idx in 0usize..10, l in vec_of(6), k in 0usize..6, w in prop::collection::vec(vec_of(6), 0..4)) {
        let algs = corpus();
        let alg = &algs[idx % algs.len()];
        let n = alg.dim();
        let k = k % n;
        let b = bilinear_form(alg, &l[..n]);
        let v: Vec<Vec<Rational>> = (k..n)
            .map(|j| (0..n).map(|r| if r == j { Rational::from_integer(1.into()) } else { Rational::zero() }).collect())
            .collect();
        let w: Vec<Vec<Rational>> = w.iter().map(|c| (0..n).map(|r| if r < k { Rational::zero() } else { c[r].clone() }).collect()).collect();
        let (lhs, rhs) = skew_form_identity(&b, &v, &w);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn heisenberg_orbits_meet_the_section_once(a in rat(), b in rat(), c in rat()) {
        prop_assume!(!c.is_zero());
        let g = heisenberg();
        let l = vec![a, b, c.clone()];
        prop_assert_eq!(orbit_section_intersection(&g, &l).unwrap(), vec![Rational::zero(), Rational::zero(), c]);
    }
}
