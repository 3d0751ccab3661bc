use carnot_core::groupoid::*;
use carnot_core::lie::{abelian, heisenberg};
use carnot_core::numeric::harmonic::{self, bump_1d, product_bump};
use carnot_core::numeric::{Complex, CutoffFamily, GridSpec, LogQuadrature, Orientation, SampledFunction, SupportClaim};
use carnot_core::{GroupLaw, NumericError};

fn heis() -> GroupLaw {
    GroupLaw::new(&heisenberg()).unwrap()
}

fn point_x() -> GridSpec {
    GridSpec::new(vec![1.0; 3], vec![1; 3]).unwrap()
}

fn vgrid(r: f64, n: usize) -> GridSpec {
    GridSpec::new(vec![r; 3], vec![n; 3]).unwrap()
}

fn c(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

#[test]
fn restriction_to_t0_is_fiberwise_convolution() {
    let law = heis();
    let xg = GridSpec::new(vec![0.5, 1.0, 1.0], vec![3, 1, 1]).unwrap();
    let tg = TimeGrid::new(vec![0.0, 1.0]).unwrap();
    let vg = vgrid(2.0, 13);
    let f = GroupoidKernel::from_real_fn(xg.clone(), tg.clone(), vg.clone(), |x, t, v| {
        (1.0 + x[0]) * (1.0 + t) * product_bump(&[v[0] - 0.2, v[1], v[2]], &[0.8, 0.8, 0.8])
    })
    .unwrap();
    let g = GroupoidKernel::from_real_fn(xg.clone(), tg, vg, |x, _, v| (1.0 - x[0]) * product_bump(&[v[0], v[1] + 0.1, v[2]], &[0.7, 0.9, 0.8]))
        .unwrap();
    let fg = groupoid_convolve(&law, &f, &g).unwrap();
    for ix in 0..xg.len() {
        let direct = harmonic::convolve(&law, &f.fiber(ix, 0), &g.fiber(ix, 0)).unwrap();
        assert_eq!(fg.fiber(ix, 0).values, direct.values);
    }
}

#[test]
fn t1_slice_matches_pair_groupoid_convolution() {
    // K_f(x, y) = f(x, 1, x⁻¹y); (f*g)(x, 1, v) = ∫ K_f(x, z) K_g(z, xv) dz.
    let law = heis();
    let hat = |x: &[f64]| (1.0 - 2.0 * x[0].abs()).max(0.0);
    let fe = |x: &[f64], v: &[f64]| (1.0 + x[0]) * product_bump(&[v[0] - 0.2, v[1], v[2]], &[1.0, 1.0, 1.0]);
    let ge = |x: &[f64], v: &[f64]| hat(x) * product_bump(&[v[0], v[1] + 0.1, v[2] - 0.1], &[1.0, 1.0, 1.0]);
    let xg = GridSpec::new(vec![0.5, 1.0, 1.0], vec![3, 1, 1]).unwrap();
    let tg = TimeGrid::new(vec![0.0, 1.0]).unwrap();
    let vg = vgrid(2.0, 33);
    let f = GroupoidKernel::from_real_fn(xg.clone(), tg.clone(), vg.clone(), |x, _, v| fe(x, v)).unwrap();
    let g = GroupoidKernel::from_real_fn(xg.clone(), tg, vg.clone(), |x, _, v| ge(x, v)).unwrap();
    let fg = groupoid_convolve(&law, &f, &g).unwrap();
    let zg = GridSpec::new(vec![1.75, 1.75, 2.5], vec![57, 57, 81]).unwrap();
    let hz = zg.cell_volume();
    let mut worst = 0.0f64;
    let scale = fg.fiber(1, 1).sup_norm();
    for ix in 0..xg.len() {
        let x = xg.point(ix);
        for &v in &[[0.0, 0.0, 0.0], [0.25, -0.5, 0.25], [-0.5, 0.25, 0.5], [0.5, 0.5, -0.25]] {
            let y = law.multiply(&x, &v);
            let mut acc = 0.0;
            for iz in 0..zg.len() {
                let z = zg.point(iz);
                let kf = fe(&x, &law.left_divide(&x, &z));
                if kf == 0.0 {
                    continue;
                }
                acc += kf * ge(&z, &law.left_divide(&z, &y)) * hz;
            }
            let got = fg.eval(&x, 1.0, &v).re;
            worst = worst.max((got - acc).abs());
        }
    }
    assert!(worst < 2e-2 * scale, "{worst} vs scale {scale}");
}

#[test]
fn involution_properties() {
    let law = heis();
    let tg = TimeGrid::new(vec![0.0, 0.5, 1.0]).unwrap();
    let vg = vgrid(2.0, 17);
    let even = GroupoidKernel::from_real_fn(point_x(), TimeGrid::zero_only(), vg.clone(), |_, _, v| product_bump(v, &[1.0, 0.8, 0.9])).unwrap();
    assert_eq!(groupoid_involution(&law, &even).unwrap(), even);

    let f = GroupoidKernel::from_fn(point_x(), tg.clone(), vg.clone(), |_, t, v| {
        Complex::new(product_bump(&[v[0] - 0.3, v[1], v[2]], &[1.0, 1.0, 1.0]), t * v[1] * product_bump(v, &[1.0, 1.0, 1.0]))
    })
    .unwrap();
    let ff = groupoid_involution(&law, &groupoid_involution(&law, &f).unwrap()).unwrap();
    assert!(ff.max_diff(&f).unwrap() < 1e-6);
    let fs = groupoid_involution(&law, &f).unwrap();
    let (a, b) = (groupoid_seminorm(&law, &f, 0).unwrap(), groupoid_seminorm(&law, &fs, 0).unwrap());
    assert!((a - b).abs() < 1e-12 * a);

    // With x-dependence the outer point x α_t(v) is interpolated. Compare
    // on inner x points, where x α_t(v) never leaves the x-box.
    let xg = GridSpec::new(vec![1.0, 1.0, 1.0], vec![9, 9, 9]).unwrap();
    let fx = GroupoidKernel::from_real_fn(xg.clone(), tg.clone(), vgrid(1.0, 9), |x, _, v| {
        (1.0 + 0.2 * x[0] - 0.1 * x[1] * x[1]) * product_bump(v, &[0.3, 0.3, 0.3])
    })
    .unwrap();
    let back = groupoid_involution(&law, &groupoid_involution(&law, &fx).unwrap()).unwrap();
    let hx = 0.25f64;
    let mut worst = 0.0f64;
    for ix in 0..xg.len() {
        let x = xg.point(ix);
        if x.iter().any(|c| c.abs() > 0.5) {
            continue;
        }
        for &t in tg.nodes() {
            for iv in 0..fx.vgrid.len() {
                let v = fx.vgrid.point(iv);
                worst = worst.max((back.eval(&x, t, &v) - fx.eval(&x, t, &v)).norm());
            }
        }
    }
    assert!(worst < hx * hx * fx.sup_norm(), "{worst}");
}

#[test]
fn anti_homomorphism_and_submultiplicativity() {
    let law = heis();
    let tg = TimeGrid::new(vec![0.0, 0.5, 1.0]).unwrap();
    let vg = vgrid(2.0, 25);
    let f = GroupoidKernel::from_fn(point_x(), tg.clone(), vg.clone(), |_, t, v| {
        Complex::new(product_bump(&[v[0] - 0.2, v[1], v[2]], &[0.7, 0.7, 0.7]), 0.3 * t * product_bump(v, &[0.6, 0.6, 0.6]))
    })
    .unwrap();
    let g = GroupoidKernel::from_real_fn(point_x(), tg, vg, |_, t, v| (1.0 - 0.5 * t) * product_bump(&[v[0], v[1] - 0.2, v[2] + 0.1], &[0.6, 0.7, 0.6]))
        .unwrap();
    let fg = groupoid_convolve(&law, &f, &g).unwrap();
    let lhs = groupoid_involution(&law, &fg).unwrap();
    let rhs = groupoid_convolve(&law, &groupoid_involution(&law, &g).unwrap(), &groupoid_involution(&law, &f).unwrap()).unwrap();
    let h = vg_spacing(&f);
    assert!(lhs.max_diff(&rhs).unwrap() < 10.0 * h * h * lhs.sup_norm());
    let (nf, ng, nfg) = (i_norm(&law, &f).unwrap(), i_norm(&law, &g).unwrap(), i_norm(&law, &fg).unwrap());
    assert!(nfg <= nf * ng * (1.0 + 1e-2), "{nfg} > {nf}·{ng}");
}

fn vg_spacing(f: &GroupoidKernel) -> f64 {
    f.vgrid.spacing().iter().cloned().fold(0.0, f64::max)
}

#[test]
fn i_norm_of_normalized_bumps() {
    let law = heis();
    let tg = TimeGrid::new(vec![0.0, 0.5, 1.0]).unwrap();
    let vg = vgrid(2.0, 17);
    let bump = SampledFunction::from_real_fn(vg.clone(), SupportClaim::Compact, |v| product_bump(v, &[1.0, 1.0, 1.0]));
    let mass = bump.integral().re;
    let f = GroupoidKernel::from_real_fn(point_x(), tg, vg, |_, _, v| 2.5 * product_bump(v, &[1.0, 1.0, 1.0]) / mass).unwrap();
    assert!((i_norm(&law, &f).unwrap() - 2.5).abs() < 1e-12);
    assert!((i1_norm(&f) - i1_norm(&groupoid_involution(&law, &f).unwrap())).abs() < 1e-12);
}

fn bspline5(x: f64) -> f64 {
    if !(0.0..6.0).contains(&x) {
        return 0.0;
    }
    let binom = [1.0, 6.0, 15.0, 20.0, 15.0, 6.0, 1.0];
    let mut s = 0.0;
    for (j, c) in binom.iter().enumerate() {
        let t = x - j as f64;
        if t > 0.0 {
            s += if j % 2 == 0 { *c } else { -c } * t.powi(5);
        }
    }
    s / 120.0
}

#[test]
fn zoom_properties() {
    let law = heis();
    // ratio-2 time grid: zoom by 2 or 1/2 maps nodes to nodes
    let tg = TimeGrid::new(vec![0.0, 0.25, 0.5, 1.0, 2.0, 4.0]).unwrap();
    let vg = GridSpec::new(vec![2.0, 2.0, 4.0], vec![33, 33, 65]).unwrap();
    let f = GroupoidKernel::from_real_fn(point_x(), tg.clone(), vg.clone(), |_, t, v| (1.0 - t / 8.0) * product_bump(v, &[0.9, 0.9, 0.9])).unwrap();
    assert_eq!(zoom(&law, &f, 1.0).unwrap(), f);
    let base = i_norm(&law, &f).unwrap();
    let z = i_norm(&law, &zoom(&law, &f, 0.5).unwrap()).unwrap();
    assert!((z - base).abs() < 1e-3 * base, "λ=1/2: {z} vs {base}");

    // σ_2 samples every other x node and every fourth z node; a B-spline
    // with knots on that coarser lattice keeps both Riemann sums exact
    let sp = GroupoidKernel::from_real_fn(point_x(), tg, vg, |_, t, v| {
        (1.0 - t / 8.0) * bspline5(v[0] / 0.25 + 3.0) * bspline5(v[1] / 0.25 + 3.0) * bspline5(v[2] / 0.5 + 3.0)
    })
    .unwrap();
    let base = i_norm(&law, &sp).unwrap();
    let z = i_norm(&law, &zoom(&law, &sp, 2.0).unwrap()).unwrap();
    assert!((z - base).abs() < 1e-3 * base, "λ=2: {z} vs {base}");

    // σ_{1/2} σ_{3/2} = σ_{3/4} up to two resamplings; a round trip
    // σ_{2/3} σ_{3/2} measures the error of two resamplings directly
    let sup_t2 = |a: &GroupoidKernel, b: &GroupoidKernel| (0..5).map(|it| a.fiber(0, it).max_diff(&b.fiber(0, it)).unwrap()).fold(0.0, f64::max);
    let compressed = zoom(&law, &f, 1.5).unwrap();
    let twice = zoom(&law, &compressed, 0.5).unwrap();
    let once = zoom(&law, &f, 0.75).unwrap();
    let round = zoom(&law, &compressed, 1.0 / 1.5).unwrap();
    let (d, r) = (sup_t2(&twice, &once) / once.sup_norm(), sup_t2(&round, &f) / f.sup_norm());
    assert!(d < 2.0 * r, "composition {d} vs round trip {r}");
}

#[test]
fn ideal_membership_cases() {
    let law = heis();
    let xg = GridSpec::new(vec![0.5, 0.5, 1.0], vec![3, 3, 1]).unwrap();
    let tg = TimeGrid::new(vec![0.0, 0.5, 1.0]).unwrap();
    let vg = GridSpec::new(vec![2.0, 2.0, 4.0], vec![17, 17, 33]).unwrap();
    let raw = GroupoidKernel::from_real_fn(xg.clone(), tg.clone(), vg.clone(), |x, _, v| {
        (1.0 + x[0] * x[1]) * product_bump(&[v[0] - 0.2, v[1], v[2]], &[0.8, 0.8, 0.8])
    })
    .unwrap();
    assert!(!ideal_membership(&raw, 1e-10).passed);
    let rel = raw.project_t0_to_rel(&law).unwrap();
    assert!(ideal_membership(&rel, 1e-10).passed);
    let vanishing = GroupoidKernel::from_real_fn(xg, tg, vg, |_, t, v| t * product_bump(v, &[0.8, 0.8, 0.8])).unwrap();
    assert!(ideal_membership(&vanishing, 0.0).passed);
    // σ_{1/2} refines the lattice, where Riemann sums of the interpolant are exact
    assert!(ideal_membership(&zoom(&law, &rel, 0.5).unwrap(), 1e-10).passed);
}

#[test]
fn represent_pt_matches_convolution_matrix() {
    let law = heis();
    let vg = vgrid(2.0, 33);
    let u = |v: &[f64]| product_bump(&[v[0] - 0.3, v[1], v[2] + 0.2], &[0.9, 0.8, 0.7]);
    let f = GroupoidKernel::from_real_fn(point_x(), TimeGrid::new(vec![0.0, 1.0]).unwrap(), vg.clone(), |_, _, v| u(v)).unwrap();
    let l2 = GridSpec::new(vec![0.5; 3], vec![5; 3]).unwrap();
    let k = represent_pt(&law, &f, 1.0, &l2).unwrap();
    // K(x,y) = u(x⁻¹y) = ũ(y⁻¹x) with ũ(v) = u(v⁻¹) = u(-v)
    let flipped = SampledFunction::from_real_fn(vg, SupportClaim::Compact, |v| u(&[-v[0], -v[1], -v[2]]));
    let m = harmonic::convolution_operator_matrix(&law, &flipped, &l2, Orientation::KernelRight).unwrap();
    assert!(k.max_abs_diff(&m) < 1e-12 * m.max_abs());
}

#[test]
fn pullback_agrees_with_direct_form() {
    let law = heis();
    let vg = vgrid(2.0, 17);
    let f = GroupoidKernel::from_real_fn(point_x(), TimeGrid::new(vec![0.0, 2.0]).unwrap(), vg, |_, _, v| product_bump(v, &[1.0, 1.0, 1.0])).unwrap();
    let l2 = GridSpec::new(vec![1.0; 3], vec![9; 3]).unwrap();
    let t = 1.5;
    assert!(t > pullback_threshold(&law, &f, &l2));
    let direct = represent_pt(&law, &f, t, &l2).unwrap();
    let pulled = represent_pt_pullback(&law, &f, t, &l2).unwrap();
    // the two forms discretize differently at the grid scale; compare their
    // action on a profile resolved by the grid
    let psi: Vec<Complex> = (0..l2.len()).map(|i| c(product_bump(&l2.point(i), &[1.2, 1.2, 1.2]))).collect();
    let (a, b) = (direct.matvec(&psi), pulled.matvec(&psi));
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let diff = a.iter().zip(&b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
    assert!(diff < 0.1 * scale, "{diff} vs {scale}");
}

#[test]
fn zoom_covariance_small() {
    let law = heis();
    let l2 = GridSpec::new(vec![1.0; 3], vec![5; 3]).unwrap();
    let defect = |n: usize| {
        let f = GroupoidKernel::from_real_fn(point_x(), TimeGrid::new(vec![0.0, 0.5, 1.0]).unwrap(), vgrid(4.0, n), |_, t, v| {
            (1.0 + t) * product_bump(v, &[1.5, 1.5, 1.5])
        })
        .unwrap();
        assert_eq!(zoom_covariance_check(&law, &f, 1.0, 1.0, &l2).unwrap(), 0.0);
        zoom_covariance_check(&law, &f, 1.0, 2.0, &l2).unwrap()
    };
    let (coarse, fine) = (defect(17), defect(33));
    assert!(fine < coarse && fine < 0.2, "{coarse} -> {fine}");
}

#[test]
fn averaged_operator_rules() {
    let law = heis();
    let vg = vgrid(2.0, 9);
    let l2 = GridSpec::new(vec![1.0; 3], vec![3; 3]).unwrap();
    let tg = TimeGrid::new(vec![0.0, 1.0, 2.0]).unwrap();
    let cutoff = CutoffFamily::new(0.1, 10.0).unwrap();
    let pos = GroupoidKernel::from_real_fn(point_x(), tg.clone(), vg.clone(), |_, _, v| product_bump(v, &[1.0, 1.0, 1.0])).unwrap();
    assert!(matches!(averaged_operator(&law, &pos, &cutoff, 20, &l2), Err(NumericError::NotInIdeal(_))));
    let zero = GroupoidKernel::zeros(point_x(), tg, vg).unwrap();
    assert_eq!(averaged_operator(&law, &zero, &cutoff, 20, &l2).unwrap().max_abs(), 0.0);
}

#[test]
fn averaged_operators_converge_for_t_times_f() {
    let law = heis();
    let vg = vgrid(2.0, 13);
    let xg = GridSpec::new(vec![1.0, 1.0, 1.0], vec![3, 3, 1]).unwrap();
    let tg = TimeGrid::new((0..=8).map(|k| k as f64 * 0.5).collect()).unwrap();
    let h = GroupoidKernel::from_real_fn(xg, tg, vg, |x, t, v| {
        t * bump_1d((t - 2.0) / 2.0) * (1.0 + 0.2 * x[0]) * product_bump(v, &[1.0, 1.0, 1.0])
    })
    .unwrap();
    let l2 = GridSpec::new(vec![1.0; 3], vec![5; 3]).unwrap();
    let step = std::f64::consts::LN_10 / 20.0;
    let cutoffs: Vec<CutoffFamily> = (2..=6).map(|k| CutoffFamily::new(10f64.powf(-k as f64 / 2.0), 10f64.powf(k as f64 / 2.0)).unwrap()).collect();
    let quads: Vec<LogQuadrature> = cutoffs.iter().map(|c| LogQuadrature::anchored(c, step).unwrap()).collect();
    let ops = averaged_operators(&law, &h, &quads, &l2).unwrap();
    let ladder = cutoff_ladder(&ops, &cutoffs);
    let diffs: Vec<f64> = ladder.iter().filter_map(|s| s.diff_from_previous).collect();
    assert!(diffs.windows(2).all(|w| w[1] < w[0]), "{diffs:?}");
}

#[test]
fn decay_probe_small() {
    let law = heis();
    let vg = vgrid(2.0, 17);
    let tg = TimeGrid::new(vec![0.0, 0.5, 1.0]).unwrap();
    let prof = |t: f64| 1.0 - 0.5 * t;
    let phi = SampledFunction::from_real_fn(vg.clone(), SupportClaim::Compact, |v| {
        let s = v[0] / 0.75;
        // -∂₁ of the bump, up to the constant radius factor
        if s.abs() >= 1.0 {
            0.0
        } else {
            2.0 * s / (1.0 - s * s).powi(2) * bump_1d(s) * product_bump(&v[1..], &[0.75, 0.75])
        }
    });
    let phi = harmonic::project_to_rel(&law, &phi, None).unwrap();
    let f = GroupoidKernel::from_real_fn(point_x(), tg.clone(), vg.clone(), |_, t, v| prof(t) * phi.eval(v).re).unwrap();
    let g = GroupoidKernel::from_real_fn(point_x(), tg.clone(), vg.clone(), |_, t, v| prof(t) * product_bump(v, &[1.0, 1.0, 1.0])).unwrap();
    let lambdas = [4.0, 8.0, 16.0];
    let pts = decay_estimate_probe(&law, &f, &g, &lambdas).unwrap();
    let slope = log_log_slope(&pts.iter().map(|p| (p.lambda, p.i_norm)).collect::<Vec<_>>());
    assert!((-1.5..=-0.9).contains(&slope), "{slope}");
    let ctrl = decay_estimate_probe(&law, &g, &g, &lambdas).unwrap();
    let cs = log_log_slope(&ctrl.iter().map(|p| (p.lambda, p.i_norm)).collect::<Vec<_>>());
    assert!(cs.abs() < 0.2, "{cs}");
    let zero = GroupoidKernel::zeros(point_x(), tg, vg).unwrap();
    assert!(decay_estimate_probe(&law, &zero, &g, &lambdas).unwrap().iter().all(|p| p.i_norm == 0.0));
}

#[test]
fn mean_value_probe() {
    let law = heis();
    let vg = vgrid(2.0, 17);
    let tg = TimeGrid::new(vec![0.0, 1.0]).unwrap();
    let flat = GroupoidKernel::from_real_fn(point_x(), tg.clone(), vg.clone(), |_, _, _| 1.0).unwrap();
    assert!(mean_value_ratio_probe(&law, &flat, 1, 200, 5).unwrap().max_ratio < 1e-9);
    let g = GroupoidKernel::from_real_fn(point_x(), tg, vg, |_, _, v| product_bump(v, &[1.5, 1.5, 1.5])).unwrap();
    let p = mean_value_ratio_probe(&law, &g, 1, 16000, 5).unwrap();
    assert!(p.max_ratio.is_finite() && p.max_ratio > 0.0);
    assert!(p.stability_ratio < 1.1, "{p:?}");
    let p2 = mean_value_ratio_probe(&law, &g.scale(c(2.0)), 1, 16000, 5).unwrap();
    assert!((p2.max_ratio - p.max_ratio).abs() < 1e-12 * p.max_ratio);
}

#[test]
fn abelian_fiber_convolution_is_exact() {
    let a = abelian(1);
    let law = GroupLaw::new(&a).unwrap();
    let g1 = GridSpec::new(vec![1.0], vec![1]).unwrap();
    let vg = GridSpec::new(vec![2.0], vec![81]).unwrap();
    let tg = TimeGrid::new(vec![0.0, 1.0]).unwrap();
    let f = GroupoidKernel::from_real_fn(g1.clone(), tg.clone(), vg.clone(), |_, _, v| bump_1d(v[0] / 0.8)).unwrap();
    let fg = groupoid_convolve(&law, &f, &f).unwrap();
    let direct = harmonic::convolve(&law, &f.fiber(0, 0), &f.fiber(0, 0)).unwrap();
    // x-independent kernels on an abelian group: every slice is a plain convolution
    assert!(fg.fiber(0, 1).max_diff(&direct).unwrap() < 1e-12);
}
