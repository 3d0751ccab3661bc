//! The nine acceptance criteria. Used by the `acceptance` test target and by
//! `carnot report-all`.
//!
//! Each criterion runs a list of named checks. A criterion passes when every
//! check passes and it finishes inside its runtime budget.

use std::time::Instant;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coadjoint::{
    apply_coadjoint, bilinear_form, coadjoint_action, cross_section_membership, dilation_on_dual, dimension_sequence,
    jump_criterion_check, orbit_section_intersection, sample_covector, skew_form_identity, stratify,
};
use crate::group_file::bundled_all;
use crate::group_law::{associativity_symbolic, dilation_is_automorphism, jacobian_is_unimodular, verify_triangular_form};
use crate::groupoid::{
    averaged_operators, cutoff_ladder, decay_estimate_probe, groupoid_convolve, groupoid_involution, i_norm, log_log_slope,
    zoom_covariance_check, GroupoidKernel, TimeGrid,
};
use crate::invariant_ops::{bracket_defects, left_invariant_fields, rockland_candidate, verify_vectorfield_form, Homogeneity};
use crate::lie::{abelian, heisenberg};
use crate::numeric::harmonic::{self, average_over_dilations, homogeneity_defect, product_bump, project_to_rel};
use crate::numeric::{CutoffFamily, GridSpec, LogQuadrature, SampledFunction, SupportClaim};
use crate::{GroupLaw, MultiPoly, NumericError, Rational};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub elapsed_s: f64,
    pub budget_s: f64,
    pub checks: Vec<Check>,
}

impl CriterionReport {
    /// One line: `[PASS] 5 type-0 kernel (3.21 s / 30 s)` followed by the
    /// failing checks, if any.
    pub fn line(&self) -> String {
        let mut s = format!(
            "[{}] {} {} ({:.2} s / {} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed_s,
            self.budget_s
        );
        for c in self.checks.iter().filter(|c| !c.passed) {
            s.push_str(&format!("\n    failed: {}: {}", c.name, c.detail));
        }
        if self.elapsed_s > self.budget_s {
            s.push_str("\n    failed: over runtime budget");
        }
        s
    }
}

impl CriterionReport {
    /// Every check, one per line.
    pub fn details(&self) -> String {
        self.checks
            .iter()
            .map(|c| format!("    {} {}{}{}", if c.passed { "ok  " } else { "FAIL" }, c.name, if c.detail.is_empty() { "" } else { ": " }, c.detail))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// `(id, name, runtime budget in seconds)`.
pub const CRITERIA: [(usize, &str, f64); 9] = [
    (1, "heisenberg coadjoint formula", 1.0),
    (2, "heisenberg strata", 1.0),
    (3, "group-law suite", 10.0),
    (4, "vector-field suite", 5.0),
    (5, "type-0 kernel closed form", 30.0),
    (6, "decay estimate", 120.0),
    (7, "zoom covariance", 60.0),
    (8, "fixed-point operator convergence", 180.0),
    (9, "invariant suites", 300.0),
];

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.0.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    fn numeric<T>(&mut self, name: &str, r: Result<T, NumericError>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.check(name, false, e.to_string());
                None
            }
        }
    }
}

pub fn run_criterion(id: usize) -> Option<CriterionReport> {
    let &(id, name, budget_s) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let mut c = Checks::default();
    match id {
        1 => coadjoint_formula(&mut c),
        2 => heisenberg_strata(&mut c),
        3 => group_law_suite(&mut c),
        4 => vector_field_suite(&mut c),
        5 => type_zero_kernel(&mut c),
        6 => decay_estimate(&mut c),
        7 => zoom_covariance(&mut c),
        8 => fixed_point_convergence(&mut c),
        _ => invariant_suites(&mut c),
    }
    let elapsed_s = start.elapsed().as_secs_f64();
    let passed = !c.0.is_empty() && c.0.iter().all(|k| k.passed) && elapsed_s <= budget_s;
    Some(CriterionReport { id, name, passed, elapsed_s, budget_s, checks: c.0 })
}

pub fn run_all() -> Vec<CriterionReport> {
    CRITERIA.iter().filter_map(|c| run_criterion(c.0)).collect()
}

fn q(a: i64) -> Rational {
    Rational::from_integer(a.into())
}

fn heisenberg_law() -> GroupLaw {
    GroupLaw::new(&heisenberg()).expect("heisenberg group law")
}

fn coadjoint_formula(c: &mut Checks) {
    let g = heisenberg();
    let coad = match coadjoint_action(&g) {
        Ok(m) => m,
        Err(e) => return c.check("coadjoint action", false, e.to_string()),
    };
    // coAd(x,y,z)(α,β,γ) = (α + yγ, β − xγ, γ)
    let (x, y) = (MultiPoly::var(3, 0), MultiPoly::var(3, 1));
    let (one, zero) = (MultiPoly::one(3), MultiPoly::zero(3));
    let expected = vec![
        vec![one.clone(), zero.clone(), y],
        vec![zero.clone(), one.clone(), -x],
        vec![zero.clone(), zero, one],
    ];
    c.check("matrix entries", coad == expected, format!("{:?}", coad.iter().map(|r| r.len()).collect::<Vec<_>>()));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = String::new();
    for _ in 0..20 {
        let p: Vec<Rational> = (0..3).map(|_| Rational::new(rng.random_range(-9i64..=9).into(), rng.random_range(1i64..=7).into())).collect();
        let l: Vec<Rational> = (0..3).map(|_| Rational::new(rng.random_range(-9i64..=9).into(), rng.random_range(1i64..=7).into())).collect();
        let got = apply_coadjoint(&coad, &p, &l);
        let want = vec![&l[0] + &p[1] * &l[2], &l[1] - &p[0] * &l[2], l[2].clone()];
        if got != want {
            worst = format!("x={p:?} l={l:?}");
        }
    }
    c.check("evaluated at rational points", worst.is_empty(), worst);
}

fn heisenberg_strata(c: &mut Checks) {
    let g = heisenberg();
    let samples = 200;
    let seed = 7;
    let mut wrong = 0;
    for i in 0..samples {
        let l = sample_covector(3, seed, i);
        let want = if !l[2].is_zero() { vec![2, 1, 0] } else { vec![0, 0, 0] };
        if dimension_sequence(&g, &l).0 != want {
            wrong += 1;
        }
    }
    c.check("d(l) by γ", wrong == 0, format!("{wrong} of {samples} sample covectors misclassified"));

    let st = stratify(&g, samples, seed);
    let ds: Vec<Vec<usize>> = st.iter().map(|s| s.d.0.clone()).collect();
    c.check("two strata", ds == vec![vec![2, 1, 0], vec![0, 0, 0]], format!("{ds:?}"));
    if st.len() != 2 {
        return;
    }
    c.check("T(2,1,0) = {3}", st[0].t == vec![3] && st[0].s == vec![1, 2], format!("S={:?} T={:?}", st[0].s, st[0].t));
    c.check("T(0,0,0) = {1,2,3}", st[1].t == vec![1, 2, 3] && st[1].s.is_empty(), format!("S={:?} T={:?}", st[1].s, st[1].t));
    c.check(
        "sample counts",
        st.iter().map(|s| s.sample_count).sum::<usize>() == samples,
        format!("{:?}", st.iter().map(|s| s.sample_count).collect::<Vec<_>>()),
    );

    // Λ for γ ≠ 0 is {(0,0,γ)}; for γ = 0 it is {(α,β,0) ≠ 0}
    let mut bad = Vec::new();
    for l in &st[0].sample_points {
        match orbit_section_intersection(&g, l) {
            Ok(p) if p == vec![q(0), q(0), l[2].clone()] => {}
            other => bad.push(format!("{l:?} -> {other:?}")),
        }
    }
    for l in &st[1].sample_points {
        match orbit_section_intersection(&g, l) {
            Ok(p) if &p == l => {}
            other => bad.push(format!("{l:?} -> {other:?}")),
        }
    }
    c.check("orbits meet Λ once", bad.is_empty(), bad.join("; "));
    let members = [
        (vec![q(0), q(0), q(5)], true),
        (vec![q(1), q(0), q(5)], false),
        (vec![q(0), q(-3), q(2)], false),
        (vec![q(1), q(2), q(0)], true),
        (vec![q(0), q(2), q(0)], true),
        (vec![q(0), q(0), q(0)], false),
    ];
    let wrong: Vec<String> =
        members.iter().filter(|(l, want)| cross_section_membership(&g, l) != *want).map(|(l, _)| format!("{l:?}")).collect();
    c.check("Λ membership", wrong.is_empty(), wrong.join("; "));
}

fn group_law_suite(c: &mut Checks) {
    for alg in bundled_all() {
        let name = alg.name().to_string();
        let law = match GroupLaw::new(&alg) {
            Ok(l) => l,
            Err(e) => {
                c.check(format!("{name}: group law"), false, e.to_string());
                continue;
            }
        };
        let m = law.product();
        if alg.dim() <= 6 {
            c.check(format!("{name}: associativity"), associativity_symbolic(m), "");
        }
        let tri = verify_triangular_form(&alg, m);
        c.check(format!("{name}: triangular form"), tri.is_empty(), format!("{} violations", tri.len()));
        c.check(format!("{name}: unimodular jacobian"), jacobian_is_unimodular(m), "");
        c.check(format!("{name}: dilations are automorphisms"), dilation_is_automorphism(&alg, m), "");
    }
}

fn vector_field_suite(c: &mut Checks) {
    for alg in bundled_all() {
        let name = alg.name().to_string();
        let law = match GroupLaw::new(&alg) {
            Ok(l) => l,
            Err(e) => {
                c.check(format!("{name}: group law"), false, e.to_string());
                continue;
            }
        };
        let fields = left_invariant_fields(law.product());
        let form = verify_vectorfield_form(&alg, &fields);
        c.check(format!("{name}: triangular field form"), form.is_empty(), format!("{} violations", form.len()));
        let br = bracket_defects(&alg, &fields);
        c.check(format!("{name}: brackets"), br.is_empty(), format!("{} defects", br.len()));
    }
    let g = heisenberg();
    let fields = left_invariant_fields(heisenberg_law().product());
    let (r, deg) = rockland_candidate(&g, &fields);
    let expected = fields[0].pow(4).add(&fields[1].pow(4)).sub(&fields[2].pow(2));
    c.check("heisenberg rockland = X⁴+Y⁴−Z²", r == expected, "");
    c.check("rockland degree 4", deg == q(4) && r.homogeneity_degree(g.weights()) == Homogeneity::Degree(q(4)), deg.to_string());
}

fn type_zero_kernel(c: &mut Checks) {
    let alg = abelian(1);
    let law = GroupLaw::new(&alg).expect("abelian group law");
    let grid = GridSpec::new(vec![5.0], vec![257]).expect("grid");
    let f = SampledFunction::from_real_fn(grid, SupportClaim::Schwartz, |v| v[0] * (-v[0] * v[0]).exp());
    let cutoff = CutoffFamily::new(1e-3, 1e3).expect("cutoff");
    let Some(u) = c.numeric("dilation average", average_over_dilations(&law, &f, &cutoff, 400)) else {
        return;
    };
    // ∫_0^∞ λ^{-1} (v/λ) e^{-v²/λ²} dλ/λ = 1/(2v)
    let mut err = 0.0f64;
    for i in 0..u.grid.len() {
        let v = u.grid.point(i)[0];
        if (0.5..=2.0).contains(&v.abs()) {
            err = err.max((u.values[i].re - 0.5 / v).abs() * 2.0 * v.abs());
        }
    }
    c.check("relative error to 1/(2v) on 0.5 ≤ |v| ≤ 2", err < 1e-3, format!("{err:.3e}"));
    if let Some(d) = c.numeric("homogeneity defect", homogeneity_defect(&law, &u, 2.0, (0.5, 2.0), 0.0)) {
        c.check("homogeneity defect at λ=2", d < 1e-2, format!("{d:.3e}"));
    }
}

/// `-∂₁` of a bump of radius `r`, up to a constant, pushed into the mean-zero
/// subspace.
fn rel_profile(law: &GroupLaw, grid: &GridSpec, r: f64) -> Result<SampledFunction, NumericError> {
    let phi = SampledFunction::from_real_fn(grid.clone(), SupportClaim::Compact, |v| {
        let s = v[0] / r;
        if s.abs() >= 1.0 {
            0.0
        } else {
            2.0 * s / (1.0 - s * s).powi(2) * harmonic::bump_1d(s) * product_bump(&v[1..], &[r, r])
        }
    });
    project_to_rel(law, &phi, None)
}

fn decay_estimate(c: &mut Checks) {
    let law = heisenberg_law();
    let vg = GridSpec::new(vec![2.0; 3], vec![33; 3]).expect("grid");
    let xg = GridSpec::new(vec![1.0; 3], vec![1; 3]).expect("grid");
    let tg = TimeGrid::new(vec![0.0, 0.5, 1.0]).expect("time grid");
    let prof = |t: f64| 1.0 - 0.5 * t;
    let Some(phi) = c.numeric("f profile", rel_profile(&law, &vg, 0.5)) else { return };
    let bump = SampledFunction::from_real_fn(vg.clone(), SupportClaim::Compact, |v| product_bump(v, &[1.0, 1.0, 1.0]));
    let Some(psi) = c.numeric("g profile", project_to_rel(&law, &bump, None)) else { return };
    let kernel = |p: &SampledFunction| GroupoidKernel::from_fn(xg.clone(), tg.clone(), vg.clone(), |_, t, v| p.eval(v) * prof(t));
    let Some(f) = c.numeric("f", kernel(&phi)) else { return };
    let Some(g) = c.numeric("g", kernel(&psi)) else { return };
    let ctrl_raw = SampledFunction::from_real_fn(vg.clone(), SupportClaim::Compact, |v| product_bump(v, &[0.5, 0.5, 0.5]));
    let Some(ctrl) = c.numeric("control", kernel(&ctrl_raw)) else { return };

    let lambdas = [4.0, 8.0, 16.0, 32.0, 64.0];
    let slope_of = |pts: &[crate::groupoid::DecayPoint]| log_log_slope(&pts.iter().map(|p| (p.lambda, p.i_norm)).collect::<Vec<_>>());
    if let Some(pts) = c.numeric("probe", decay_estimate_probe(&law, &f, &g, &lambdas)) {
        let s = slope_of(&pts);
        let norms: Vec<String> = pts.iter().map(|p| format!("{:.3e}", p.i_norm)).collect();
        c.check("slope for f, g with vanishing means", (-1.5..=-0.9).contains(&s), format!("slope {s:.3} norms [{}]", norms.join(", ")));
    }
    if let Some(pts) = c.numeric("control probe", decay_estimate_probe(&law, &ctrl, &g, &lambdas)) {
        let s = slope_of(&pts);
        c.check("control slope ≈ 0", s.abs() < 0.2, format!("slope {s:.3}"));
    }
}

fn zoom_covariance(c: &mut Checks) {
    let law = heisenberg_law();
    let xg = GridSpec::new(vec![1.0; 3], vec![1; 3]).expect("grid");
    let tg = TimeGrid::new(vec![0.0, 0.5, 1.0]).expect("time grid");
    let l2 = GridSpec::new(vec![1.0; 3], vec![9; 3]).expect("grid");
    // cos² has close to the least curvature a profile vanishing at the box
    // edge can have, which is what bounds the resampling error of σ_2
    let r = 4.0;
    let p = |s: f64| if s.abs() >= 1.0 { 0.0 } else { (std::f64::consts::FRAC_PI_2 * s).cos().powi(2) };
    let defect = |n: usize| -> Result<f64, NumericError> {
        let vg = GridSpec::new(vec![r; 3], vec![n; 3])?;
        let f = GroupoidKernel::from_real_fn(xg.clone(), tg.clone(), vg, |_, t, v| (1.0 + t) * p(v[0] / r) * p(v[1] / r) * p(v[2] / r))?;
        zoom_covariance_check(&law, &f, 1.0, 2.0, &l2)
    };
    let Some(d65) = c.numeric("N=65", defect(65)) else { return };
    let Some(d129) = c.numeric("N=129", defect(129)) else { return };
    c.check("defect < 1e-2 at N=65", d65 < 1e-2, format!("{d65:.3e}"));
    c.check("refinement gain ≥ 1.5", d65 >= 1.5 * d129, format!("{d65:.3e} -> {d129:.3e} (×{:.2})", d65 / d129));
}

fn fixed_point_convergence(c: &mut Checks) {
    let law = heisenberg_law();
    let vg = GridSpec::new(vec![2.0; 3], vec![17; 3]).expect("grid");
    let l2 = GridSpec::new(vec![1.0; 3], vec![7; 3]).expect("grid");
    let step = std::f64::consts::LN_10 / 40.0;
    // half-decade steps from [1e-1, 1e1] to [1e-4, 1e4]
    let cutoffs: Vec<CutoffFamily> =
        (2..=8).map(|k| CutoffFamily::new(10f64.powf(-(k as f64) / 2.0), 10f64.powf(k as f64 / 2.0)).expect("cutoff")).collect();
    let quads: Vec<LogQuadrature> = cutoffs.iter().map(|k| LogQuadrature::anchored(k, step).expect("quadrature")).collect();

    // h = t·f, compactly supported in t ≤ 4
    let xg = GridSpec::new(vec![1.0, 1.0, 1.0], vec![3, 3, 1]).expect("grid");
    let tg = TimeGrid::new((0..=16).map(|k| k as f64 * 0.25).collect()).expect("time grid");
    let plateau = |t: f64| if t <= 2.0 { 1.0 } else { harmonic::bump_1d((t - 2.0) / 2.0) / harmonic::bump_1d(0.0) };
    let h = GroupoidKernel::from_real_fn(xg, tg, vg.clone(), |x, t, v| {
        t * plateau(t) * (1.0 + 0.2 * x[0]) * product_bump(&[v[0] - 0.2, v[1], v[2]], &[1.0, 1.0, 1.0])
    });
    if let Some(h) = c.numeric("t·f kernel", h) {
        if let Some(ops) = c.numeric("averaged operators for t·f", averaged_operators(&law, &h, &quads, &l2)) {
            let ladder = cutoff_ladder(&ops, &cutoffs);
            let diffs: Vec<f64> = ladder.iter().filter_map(|s| s.diff_from_previous).collect();
            let norm = ladder.last().map(|s| s.norm).unwrap_or(0.0);
            let listed: Vec<String> = diffs.iter().map(|d| format!("{:.2e}", d)).collect();
            c.check("differences decrease", diffs.windows(2).all(|w| w[1] < w[0]), format!("[{}]", listed.join(", ")));
            let last = diffs.last().copied().unwrap_or(f64::INFINITY);
            c.check("last difference < 1e-3 ‖T‖", last < 1e-3 * norm, format!("{last:.3e} vs ‖T‖ = {norm:.3e}"));
        }
    }

    // h = u(v) bump(x) with u of mean zero, constant in t
    let xg = GridSpec::new(vec![1.0; 3], vec![7; 3]).expect("grid");
    let tg = TimeGrid::new(vec![0.0, 3e4]).expect("time grid");
    let raw = SampledFunction::from_real_fn(vg.clone(), SupportClaim::Compact, |v| {
        product_bump(v, &[1.0, 1.0, 1.0]) - 2.0 * product_bump(v, &[0.6, 0.7, 0.8])
    });
    let Some(u) = c.numeric("type-0 profile", project_to_rel(&law, &raw, None)) else { return };
    let Some(h0) = c.numeric(
        "type-0 kernel",
        GroupoidKernel::from_fn(xg, tg, vg, |x, _, v| u.eval(v) * product_bump(x, &[1.5, 1.5, 1.5])),
    ) else {
        return;
    };
    let last_decade = [&cutoffs[cutoffs.len() - 3], &cutoffs[cutoffs.len() - 1]];
    let quads: Vec<LogQuadrature> = last_decade.iter().map(|k| LogQuadrature::anchored(k, step).expect("quadrature")).collect();
    if let Some(ops) = c.numeric("averaged operators for type-0 kernel", averaged_operators(&law, &h0, &quads, &l2)) {
        let (a, b) = (crate::numeric::operator_norm(&ops[0]), crate::numeric::operator_norm(&ops[1]));
        let change = (b - a).abs() / b.max(f64::MIN_POSITIVE);
        c.check("‖T(h)‖ change over the last decade < 5%", change < 0.05 && b > 0.0, format!("{a:.4e} -> {b:.4e} ({:.2}%)", 100.0 * change));
    }
}

fn invariant_suites(c: &mut Checks) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let small = |rng: &mut ChaCha8Rng| Rational::new(rng.random_range(-5i64..=5).into(), rng.random_range(1i64..=4).into());
    for alg in bundled_all() {
        let name = alg.name().to_string();
        let n = alg.dim();
        let coad = match coadjoint_action(&alg) {
            Ok(m) => m,
            Err(e) => {
                c.check(format!("{name}: coadjoint action"), false, e.to_string());
                continue;
            }
        };
        let (mut skew_bad, mut jump_bad, mut coad_bad, mut dil_bad) = (0, 0, 0, 0);
        for i in 0..25 {
            let l = sample_covector(n, 17, i);
            let b = bilinear_form(&alg, &l);
            // V = span{X_k..X_n}, W a random subspace of V
            let k = rng.random_range(0..n);
            let v: Vec<Vec<Rational>> = (k..n).map(|j| (0..n).map(|r| if r == j { Rational::one() } else { Rational::zero() }).collect()).collect();
            let wdim = rng.random_range(0..=v.len());
            let w: Vec<Vec<Rational>> = (0..wdim)
                .map(|_| {
                    let mut x = vec![Rational::zero(); n];
                    for xj in x.iter_mut().skip(k) {
                        *xj = small(&mut rng);
                    }
                    x
                })
                .collect();
            let (lhs, rhs) = skew_form_identity(&b, &v, &w);
            if lhs != rhs {
                skew_bad += 1;
            }
            if !jump_criterion_check(&alg, &l).is_empty() {
                jump_bad += 1;
            }
            let d = dimension_sequence(&alg, &l);
            let x: Vec<Rational> = (0..n).map(|_| small(&mut rng)).collect();
            if dimension_sequence(&alg, &apply_coadjoint(&coad, &x, &l)) != d {
                coad_bad += 1;
            }
            let mu = Rational::new(rng.random_range(1i64..=9).into(), rng.random_range(1i64..=9).into());
            let dl = if alg.weights().iter().all(|w| w.is_integer()) {
                dilation_on_dual(&alg, &mu, &l).ok()
            } else {
                // λ = μ^D with D clearing the weight denominators keeps λ^{q_j} rational
                Some(dual_dilation_by_power(&alg, &mu, &l))
            };
            match dl {
                Some(dl) if dimension_sequence(&alg, &dl) == d => {}
                _ => dil_bad += 1,
            }
        }
        c.check(format!("{name}: skew-form rank identity"), skew_bad == 0, format!("{skew_bad} of 25"));
        c.check(format!("{name}: jump criterion"), jump_bad == 0, format!("{jump_bad} of 25"));
        c.check(format!("{name}: d(l) coadjoint-invariant"), coad_bad == 0, format!("{coad_bad} of 25"));
        c.check(format!("{name}: d(l) dilation-invariant"), dil_bad == 0, format!("{dil_bad} of 25"));
    }
    numeric_invariants(c);
}

fn dual_dilation_by_power(alg: &crate::GradedLieAlgebra, mu: &Rational, l: &[Rational]) -> Vec<Rational> {
    use num_integer::Integer;
    let den = alg.weights().iter().fold(num_bigint::BigInt::one(), |a, w| a.lcm(w.denom()));
    l.iter()
        .zip(alg.weights())
        .map(|(x, w)| {
            let e: i32 = num_traits::ToPrimitive::to_i32(&(w * Rational::from_integer(den.clone())).to_integer()).expect("small exponent");
            x * num_traits::pow::Pow::pow(mu, e)
        })
        .collect()
}

fn bspline5(x: f64) -> f64 {
    if !(0.0..6.0).contains(&x) {
        return 0.0;
    }
    let binom = [1.0, 6.0, 15.0, 20.0, 15.0, 6.0, 1.0];
    let mut s = 0.0;
    for (j, b) in binom.iter().enumerate() {
        let t = x - j as f64;
        if t > 0.0 {
            s += if j % 2 == 0 { *b } else { -b } * t.powi(5);
        }
    }
    s / 120.0
}

fn numeric_invariants(c: &mut Checks) {
    let law = heisenberg_law();

    // Haar homogeneity: a B-spline with knots on the σ_2 sampling lattice
    // has exact Riemann sums before and after the dilation
    let grid = GridSpec::new(vec![2.0; 3], vec![65; 3]).expect("grid");
    let s = 4.0 * grid.spacing()[0];
    let f = SampledFunction::from_real_fn(grid, SupportClaim::Compact, |x| {
        bspline5((x[0] - 0.07) / s + 3.0) * bspline5((x[1] + 0.11) / s + 3.0) * bspline5((x[2] - 0.03) / s + 3.0)
    });
    if let Some(d) = c.numeric("dilate", harmonic::dilate(&law, &f, 2.0)) {
        let (a, b) = (f.integral(), d.integral());
        c.check("Haar homogeneity ∫σ_2 f = ∫f", (a - b).norm() < 1e-4 * a.norm(), format!("{:.6e} vs {:.6e}", b.re, a.re));
    }

    let one = GridSpec::new(vec![1.0; 3], vec![1; 3]).expect("grid");
    let xg = GridSpec::new(vec![0.5, 1.0, 1.0], vec![3, 1, 1]).expect("grid");
    let tg = TimeGrid::new(vec![0.0, 0.5, 1.0]).expect("time grid");
    let vg = GridSpec::new(vec![2.0; 3], vec![17; 3]).expect("grid");
    let kernels = (
        GroupoidKernel::from_fn(one.clone(), tg.clone(), vg.clone(), |_, t, v| {
            crate::numeric::Complex::new(product_bump(&[v[0] - 0.2, v[1], v[2]], &[0.9, 0.9, 0.9]), 0.3 * t * product_bump(v, &[0.8, 0.8, 0.8]))
        }),
        GroupoidKernel::from_real_fn(one, tg.clone(), vg.clone(), |_, t, v| {
            (1.0 - 0.5 * t) * product_bump(&[v[0], v[1] - 0.2, v[2] + 0.1], &[0.8, 0.9, 0.8])
        }),
    );
    let (Some(f), Some(g)) = (c.numeric("f", kernels.0), c.numeric("g", kernels.1)) else { return };
    let run = || -> Result<(f64, f64, f64, f64, f64), NumericError> {
        let fg = groupoid_convolve(&law, &f, &g)?;
        let lhs = groupoid_involution(&law, &fg)?;
        let rhs = groupoid_convolve(&law, &groupoid_involution(&law, &g)?, &groupoid_involution(&law, &f)?)?;
        Ok((lhs.max_diff(&rhs)?, lhs.sup_norm(), i_norm(&law, &f)?, i_norm(&law, &g)?, i_norm(&law, &fg)?))
    };
    if let Some((diff, sup, nf, ng, nfg)) = c.numeric("groupoid products", run()) {
        let h = vg.spacing()[0];
        c.check("involution anti-homomorphism", diff < 10.0 * h * h * sup, format!("{diff:.3e} vs 10h²·sup = {:.3e}", 10.0 * h * h * sup));
        c.check("I-norm submultiplicativity", nfg <= nf * ng * (1.0 + 1e-2), format!("{nfg:.4e} ≤ {nf:.4e}·{ng:.4e}"));
    }

    // t=0 restriction with x-dependent kernels
    let run = || -> Result<bool, NumericError> {
        let f = GroupoidKernel::from_real_fn(xg.clone(), tg.clone(), vg.clone(), |x, t, v| {
            (1.0 + x[0]) * (1.0 + t) * product_bump(&[v[0] - 0.2, v[1], v[2]], &[0.8, 0.8, 0.8])
        })?;
        let g = GroupoidKernel::from_real_fn(xg.clone(), tg.clone(), vg.clone(), |x, _, v| {
            (1.0 - x[0]) * product_bump(&[v[0], v[1] + 0.1, v[2]], &[0.7, 0.9, 0.8])
        })?;
        let fg = groupoid_convolve(&law, &f, &g)?;
        for ix in 0..xg.len() {
            let direct = harmonic::convolve(&law, &f.fiber(ix, 0), &g.fiber(ix, 0))?;
            if fg.fiber(ix, 0).values != direct.values {
                return Ok(false);
            }
        }
        Ok(true)
    };
    if let Some(ok) = c.numeric("t=0 restriction", run()) {
        c.check("t=0 restriction is a homomorphism", ok, "");
    }
}
