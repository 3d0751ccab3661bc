use std::fmt::Write as _;

use carnot_core::acceptance;
use carnot_core::coadjoint::{
    character_check, cross_section_membership, dimension_sequence, jump_criterion_check, jump_set, sample_covector,
    stabilizer, stratify, vergne_polarization,
};
use carnot_core::group_law::{
    associativity_symbolic, dilation_is_automorphism, jacobian_is_unimodular, law_json, law_text, verify_triangular_form,
};
use carnot_core::groupoid::{
    averaged_operators, cutoff_ladder, decay_estimate_probe, i_norm, log_log_slope, zoom, zoom_covariance_check,
    GroupoidKernel, TimeGrid,
};
use carnot_core::invariant_ops::{
    bracket_defects, left_invariant_fields, right_invariant_fields, rockland_candidate, verify_vectorfield_form, DiffOp,
    Homogeneity,
};
use carnot_core::numeric::harmonic::{average_over_dilations, bump_1d, homogeneity_defect, product_bump, project_to_rel};
use carnot_core::numeric::{CutoffFamily, GridSpec, LogQuadrature, SampledFunction, SupportClaim};
use carnot_core::{GradedLieAlgebra, GroupLaw, Rational};
use serde_json::{json, Value};

use crate::{Artifact, CliError, Params};

fn rats(v: &[Rational]) -> Vec<String> {
    v.iter().map(|c| c.to_string()).collect()
}

fn spaced(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// `n` points from `a` to `b`, evenly spaced in `log λ`.
fn log_space(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|k| a * (b / a).powf(k as f64 / (n - 1) as f64)).collect()
}

fn grid_json(g: &GridSpec) -> Value {
    json!({ "half_widths": g.half_widths(), "counts": g.counts() })
}

pub fn check_algebra(alg: &GradedLieAlgebra) -> Artifact {
    let violations: Vec<String> = alg.validate().iter().map(|v| v.to_string()).collect();
    let step = alg.nilpotency_step();
    let q = alg.homogeneous_dimension();
    let ok = violations.is_empty() && step.is_ok();
    let summary = match (&step, ok) {
        (Ok(s), true) => format!("valid graded algebra, Q={q}, step {s}"),
        (Err(e), _) if violations.is_empty() => format!("invalid: {e}"),
        _ => format!("invalid graded algebra, {} violation(s):\n  {}", violations.len(), violations.join("\n  ")),
    };
    Artifact {
        json: json!({
            "group": alg.name(),
            "dim": alg.dim(),
            "weights": rats(alg.weights()),
            "homogeneous_dimension": q.to_string(),
            "step": step.as_ref().ok(),
            "valid": ok,
            "violations": violations,
            "summary": summary.lines().next().unwrap_or(""),
        }),
        csv: None,
        summary,
        ok,
    }
}

pub fn group_law(alg: &GradedLieAlgebra) -> Result<Artifact, CliError> {
    let law = GroupLaw::new(alg)?;
    let m = law.product();
    let triangular = verify_triangular_form(alg, m);
    let unimodular = jacobian_is_unimodular(m);
    let dilation = alg.weights().iter().all(|w| w.is_integer()).then(|| dilation_is_automorphism(alg, m));
    // symbolic associativity expands in 3n variables; skip it for large n
    let associative = (alg.dim() <= 6).then(|| associativity_symbolic(m));
    let ok = triangular.is_empty() && unimodular && dilation != Some(false) && associative != Some(false);
    let text = law_text(alg, m);
    Ok(Artifact {
        json: json!({
            "group": alg.name(),
            "law": law_json(m),
            "text": text.lines().collect::<Vec<_>>(),
            "triangular_violations": triangular,
            "jacobian_unimodular": unimodular,
            "dilation_automorphism": dilation,
            "associative": associative,
        }),
        csv: None,
        summary: if ok { text } else { format!("{text}\ngroup law checks failed") },
        ok,
    })
}

fn fields_json(alg: &GradedLieAlgebra, fields: &[DiffOp]) -> Vec<Value> {
    let names: Vec<String> = alg.labels().iter().map(|l| format!("x_{l}")).collect();
    fields
        .iter()
        .zip(alg.labels())
        .map(|(x, l)| json!({ "label": l, "text": x.fmt_with(&names), "terms": x.to_json() }))
        .collect()
}

pub fn vector_fields(alg: &GradedLieAlgebra) -> Result<Artifact, CliError> {
    let law = GroupLaw::new(alg)?;
    let left = left_invariant_fields(law.product());
    let right = right_invariant_fields(law.product());
    let form = verify_vectorfield_form(alg, &left);
    let defects = bracket_defects(alg, &left);
    let ok = form.is_empty() && defects.is_empty();
    let left_json = fields_json(alg, &left);
    let mut summary = String::new();
    for f in &left_json {
        let _ = writeln!(summary, "{} = {}", f["label"].as_str().unwrap_or(""), f["text"].as_str().unwrap_or(""));
    }
    let _ = write!(summary, "{} form violation(s), {} bracket defect(s)", form.len(), defects.len());
    Ok(Artifact {
        json: json!({
            "group": alg.name(),
            "left": left_json,
            "right": fields_json(alg, &right),
            "form_violations": form,
            "bracket_defects": defects.iter().map(|(i, j, _)| [i + 1, j + 1]).collect::<Vec<_>>(),
        }),
        csv: None,
        summary,
        ok,
    })
}

pub fn rockland(alg: &GradedLieAlgebra) -> Result<Artifact, CliError> {
    let law = GroupLaw::new(alg)?;
    let fields = left_invariant_fields(law.product());
    let (r, deg) = rockland_candidate(alg, &fields);
    let homogeneous = r.homogeneity_degree(alg.weights()) == Homogeneity::Degree(deg.clone());
    let names: Vec<String> = alg.labels().iter().map(|l| format!("x_{l}")).collect();
    let text = r.fmt_with(&names);
    Ok(Artifact {
        json: json!({
            "group": alg.name(),
            "operator": text,
            "terms": r.to_json(),
            "degree": deg.to_string(),
            "homogeneous": homogeneous,
        }),
        csv: None,
        summary: format!("Rockland candidate of degree {deg}{}", if homogeneous { "" } else { " (not homogeneous)" }),
        ok: homogeneous,
    })
}

pub fn strata(alg: &GradedLieAlgebra, p: &Params) -> Artifact {
    let st = stratify(alg, p.samples, p.seed);
    let mut csv = String::from("d,s,t,sample_count,rank_order_position\n");
    let mut summary = format!("{} strata from {} samples", st.len(), p.samples);
    for s in &st {
        let _ = writeln!(csv, "{},{},{},{},{}", spaced(&s.d.0), spaced(&s.s), spaced(&s.t), s.sample_count, s.rank_order_position);
        let _ = write!(summary, "\n  d = {:?}  S = {:?}  T = {:?}  ({} samples)", s.d.0, s.s, s.t, s.sample_count);
    }
    Artifact {
        json: json!({ "group": alg.name(), "samples": p.samples, "seed": p.seed, "strata": st }),
        csv: Some(csv),
        summary,
        ok: true,
    }
}

pub fn orbit_dims(alg: &GradedLieAlgebra, p: &Params) -> Result<Artifact, CliError> {
    let n = alg.dim();
    let mut rows = Vec::with_capacity(p.samples);
    let mut csv = String::from("index,covector,d,s,t,stabilizer_dim,in_cross_section,jump_mismatches\n");
    let mut mismatched = 0;
    for i in 0..p.samples {
        let l = sample_covector(n, p.seed, i);
        let d = dimension_sequence(alg, &l);
        let (s, t) = jump_set(&d);
        let stab = stabilizer(alg, &l).len();
        let section = cross_section_membership(alg, &l);
        let bad = jump_criterion_check(alg, &l).len();
        mismatched += usize::from(bad > 0);
        let cov = rats(&l);
        let _ = writeln!(csv, "{i},{},{},{},{},{stab},{section},{bad}", cov.join(" "), spaced(&d.0), spaced(&s), spaced(&t));
        rows.push(json!({
            "covector": cov,
            "d": d.0,
            "s": s,
            "t": t,
            "stabilizer_dim": stab,
            "in_cross_section": section,
            "jump_mismatches": bad,
        }));
    }
    Ok(Artifact {
        json: json!({ "group": alg.name(), "samples": p.samples, "seed": p.seed, "covectors": rows }),
        csv: Some(csv),
        summary: format!("{} covectors, {mismatched} with jump-criterion mismatches", p.samples),
        ok: mismatched == 0,
    })
}

pub fn polarization(alg: &GradedLieAlgebra, p: &Params) -> Artifact {
    let n = alg.dim();
    let mut rows = Vec::with_capacity(p.samples);
    let mut csv = String::from("index,covector,orbit_dim,polarization_dim,isotropic\n");
    let mut failures = 0;
    for i in 0..p.samples {
        let l = sample_covector(n, p.seed, i);
        let orbit = dimension_sequence(alg, &l).top();
        let h = vergne_polarization(alg, &l);
        let iso = character_check(alg, &l, &h);
        failures += usize::from(!iso || 2 * (n - h.len()) != orbit);
        let cov = rats(&l);
        let _ = writeln!(csv, "{i},{},{orbit},{},{iso}", cov.join(" "), h.len());
        rows.push(json!({
            "covector": cov,
            "orbit_dim": orbit,
            "basis": h.iter().map(|v| rats(v)).collect::<Vec<_>>(),
            "isotropic": iso,
        }));
    }
    Artifact {
        json: json!({ "group": alg.name(), "samples": p.samples, "seed": p.seed, "polarizations": rows }),
        csv: Some(csv),
        summary: format!("{} polarizations, {failures} failing isotropy or codimension", p.samples),
        ok: failures == 0,
    }
}

pub fn type0_kernel(alg: &GradedLieAlgebra, p: &Params) -> Result<Artifact, CliError> {
    let law = GroupLaw::new(alg)?;
    let dim = alg.dim();
    let n = p.grid_n.unwrap_or(if dim == 1 { 257 } else { 33 });
    let r = p.grid_r.unwrap_or(if dim == 1 { 5.0 } else { 4.0 });
    let (a, b) = (p.lambda_min.unwrap_or(1e-3), p.lambda_max.unwrap_or(1e3));
    let n_lambda = p.n_lambda.unwrap_or(400);
    let tol = p.tol.unwrap_or(1e-2);
    let grid = GridSpec::uniform(dim, r, n)?;
    // odd in v_1, so the integral vanishes on the symmetric grid
    let f = SampledFunction::from_real_fn(grid.clone(), SupportClaim::Schwartz, |v| {
        v[0] * (-v.iter().map(|x| x * x).sum::<f64>()).exp()
    });
    let cutoff = CutoffFamily::new(a, b)?;
    let u = average_over_dilations(&law, &f, &cutoff, n_lambda)?;
    let defect = homogeneity_defect(&law, &u, 2.0, (0.5, 2.0), 0.0)?;
    let ok = defect < tol;
    Ok(Artifact {
        json: json!({
            "group": alg.name(),
            "grid": grid_json(&grid),
            "cutoff": [a, b],
            "n_lambda": n_lambda,
            "homogeneity_defect": defect,
            "tol": tol,
            "passed": ok,
            "values": u.values.iter().map(|c| c.re).collect::<Vec<_>>(),
        }),
        csv: Some(u.to_csv()),
        summary: format!("type-0 kernel on {n}^{dim} grid, homogeneity defect {defect:.3e} (tol {tol:.1e})"),
        ok,
    })
}

fn cos2(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (std::f64::consts::FRAC_PI_2 * s).cos().powi(2)
    }
}

fn l2_grid(dim: usize, r: f64, n: usize) -> Result<GridSpec, CliError> {
    // keep the operator matrices small in higher dimensions
    let n = if dim > 3 { n.min(5) } else { n };
    Ok(GridSpec::uniform(dim, r, n)?)
}

pub fn zoom_demo(alg: &GradedLieAlgebra, p: &Params) -> Result<Artifact, CliError> {
    let law = GroupLaw::new(alg)?;
    let dim = alg.dim();
    let n = p.grid_n.unwrap_or(65);
    let r = p.grid_r.unwrap_or(4.0);
    let lambdas = log_space(p.lambda_min.unwrap_or(0.5), p.lambda_max.unwrap_or(2.0), p.n_lambda.unwrap_or(3));
    let tol = p.tol.unwrap_or(1e-2);
    let xg = GridSpec::uniform(dim, 1.0, 1)?;
    let tg = TimeGrid::new((0..=8).map(|k| k as f64 * 0.5).collect())?;
    let vg = GridSpec::uniform(dim, r, n)?;
    let l2 = l2_grid(dim, 1.0, 9)?;
    let f = GroupoidKernel::from_real_fn(xg, tg, vg.clone(), |_, t, v| (1.0 + t) * v.iter().map(|x| cos2(x / r)).product::<f64>())?;
    let base = i_norm(&law, &f)?;
    let mut rows = Vec::new();
    let mut csv = String::from("lambda,covariance_defect,i_norm_ratio\n");
    let mut worst = 0.0f64;
    for &lam in &lambdas {
        let d = zoom_covariance_check(&law, &f, 1.0, lam, &l2)?;
        let ratio = i_norm(&law, &zoom(&law, &f, lam)?)? / base;
        worst = worst.max(d);
        let _ = writeln!(csv, "{lam:e},{d:e},{ratio:e}");
        rows.push(json!({ "lambda": lam, "covariance_defect": d, "i_norm_ratio": ratio }));
    }
    let ok = worst < tol;
    Ok(Artifact {
        json: json!({
            "group": alg.name(),
            "v_grid": grid_json(&vg),
            "l2_grid": grid_json(&l2),
            "t": 1.0,
            "tol": tol,
            "passed": ok,
            "points": rows,
        }),
        csv: Some(csv),
        summary: format!("zoom covariance over {} λ values, worst defect {worst:.3e} (tol {tol:.1e})", lambdas.len()),
        ok,
    })
}

pub fn fix_operator(alg: &GradedLieAlgebra, p: &Params) -> Result<Artifact, CliError> {
    let law = GroupLaw::new(alg)?;
    let dim = alg.dim();
    let n = p.grid_n.unwrap_or(17);
    let r = p.grid_r.unwrap_or(2.0);
    let (a, b) = (p.lambda_min.unwrap_or(1e-3), p.lambda_max.unwrap_or(1e3));
    let per_decade = p.n_lambda.unwrap_or(40);
    let tol = p.tol.unwrap_or(1e-2);
    let vg = GridSpec::uniform(dim, r, n)?;
    let l2 = l2_grid(dim, r / 2.0, 7)?;
    // half-decade ladder [10^{-k/2}, 10^{k/2}] from k = 2 out to the requested range
    let k_max = ((-a.log10()).min(b.log10()) * 2.0).floor().max(3.0) as i32;
    let cutoffs: Vec<CutoffFamily> = (2..=k_max)
        .map(|k| CutoffFamily::new(10f64.powf(-k as f64 / 2.0), 10f64.powf(k as f64 / 2.0)))
        .collect::<Result<_, _>>()?;
    let step = std::f64::consts::LN_10 / per_decade as f64;
    let quads: Vec<LogQuadrature> = cutoffs.iter().map(|c| LogQuadrature::anchored(c, step)).collect::<Result<_, _>>()?;

    let counts: Vec<usize> = (0..dim).map(|j| if j < 2 { 3 } else { 1 }).collect();
    let xg = GridSpec::new(vec![1.0; dim], counts)?;
    let tg = TimeGrid::new((0..=16).map(|k| k as f64 * 0.25).collect())?;
    let plateau = |t: f64| if t <= 2.0 { 1.0 } else { bump_1d((t - 2.0) / 2.0) / bump_1d(0.0) };
    let radii = vec![r / 2.0; dim];
    let h = GroupoidKernel::from_real_fn(xg, tg, vg.clone(), |x, t, v| {
        let mut w = v.to_vec();
        w[0] -= 0.1 * r;
        t * plateau(t) * (1.0 + 0.2 * x[0]) * product_bump(&w, &radii)
    })?;
    let ops = averaged_operators(&law, &h, &quads, &l2)?;
    let ladder = cutoff_ladder(&ops, &cutoffs);
    let diffs: Vec<f64> = ladder.iter().filter_map(|s| s.diff_from_previous).collect();
    let norm = ladder.last().map_or(0.0, |s| s.norm);
    let last = diffs.last().copied().unwrap_or(f64::INFINITY);
    let decreasing = diffs.windows(2).all(|w| w[1] < w[0]);
    let ok = decreasing && last < tol * norm;
    let mut csv = String::from("cutoff_a,cutoff_b,diff_from_previous,norm\n");
    for s in &ladder {
        let d = s.diff_from_previous.map(|d| format!("{d:e}")).unwrap_or_default();
        let _ = writeln!(csv, "{:e},{:e},{d},{:e}", s.a, s.b, s.norm);
    }
    Ok(Artifact {
        json: json!({
            "group": alg.name(),
            "v_grid": grid_json(&vg),
            "l2_grid": grid_json(&l2),
            "nodes_per_decade": per_decade,
            "ladder": ladder,
            "differences_decrease": decreasing,
            "tol": tol,
            "passed": ok,
        }),
        csv: Some(csv),
        summary: format!("{} cutoffs, last difference {last:.3e} vs ‖T‖ = {norm:.3e} (tol {tol:.1e})", ladder.len()),
        ok,
    })
}

pub fn decay_probe(alg: &GradedLieAlgebra, p: &Params) -> Result<Artifact, CliError> {
    let law = GroupLaw::new(alg)?;
    let dim = alg.dim();
    let n = p.grid_n.unwrap_or(17);
    let r = p.grid_r.unwrap_or(2.0);
    let lambdas = log_space(p.lambda_min.unwrap_or(4.0), p.lambda_max.unwrap_or(64.0), p.n_lambda.unwrap_or(5));
    let tol = p.tol.unwrap_or(0.5);
    let vg = GridSpec::uniform(dim, r, n)?;
    let xg = GridSpec::uniform(dim, 1.0, 1)?;
    let tg = TimeGrid::new(vec![0.0, 0.5, 1.0])?;
    let (rf, rg) = (r / 4.0, r / 2.0);
    // -∂₁ of a bump, then projected to mean zero
    let df = SampledFunction::from_real_fn(vg.clone(), SupportClaim::Compact, |v| {
        let s = v[0] / rf;
        if s.abs() >= 1.0 {
            0.0
        } else {
            2.0 * s / (1.0 - s * s).powi(2) * bump_1d(s) * product_bump(&v[1..], &vec![rf; dim - 1])
        }
    });
    let phi = project_to_rel(&law, &df, None)?;
    let raw = SampledFunction::from_real_fn(vg.clone(), SupportClaim::Compact, |v| product_bump(v, &vec![rg; dim]));
    let psi = project_to_rel(&law, &raw, None)?;
    let ctrl = SampledFunction::from_real_fn(vg.clone(), SupportClaim::Compact, |v| product_bump(v, &vec![rf; dim]));
    let kernel = |s: &SampledFunction| {
        GroupoidKernel::from_real_fn(xg.clone(), tg.clone(), vg.clone(), |_, t, v| s.eval(v).re * (1.0 - 0.5 * t))
    };
    let (f, g, c) = (kernel(&phi)?, kernel(&psi)?, kernel(&ctrl)?);
    let pts = decay_estimate_probe(&law, &f, &g, &lambdas)?;
    let ctl = decay_estimate_probe(&law, &c, &g, &lambdas)?;
    let slope = log_log_slope(&pts.iter().map(|q| (q.lambda, q.i_norm)).collect::<Vec<_>>());
    let control_slope = log_log_slope(&ctl.iter().map(|q| (q.lambda, q.i_norm)).collect::<Vec<_>>());
    let ok = (slope + 1.0).abs() < tol;
    let mut csv = String::from("lambda,i_norm,control_i_norm\n");
    for (a, b) in pts.iter().zip(&ctl) {
        let _ = writeln!(csv, "{:e},{:e},{:e}", a.lambda, a.i_norm, b.i_norm);
    }
    Ok(Artifact {
        json: json!({
            "group": alg.name(),
            "v_grid": grid_json(&vg),
            "points": pts,
            "control": ctl,
            "slope": slope,
            "control_slope": control_slope,
            "expected_slope": -1.0,
            "tol": tol,
            "passed": ok,
        }),
        csv: Some(csv),
        summary: format!("log-log slope {slope:.3} (control {control_slope:.3}), expected -1 within {tol}"),
        ok,
    })
}

pub fn report_all() -> Artifact {
    let reports = acceptance::run_all();
    let mut summary = String::new();
    let mut csv = String::from("id,name,passed,within_budget,budget_s\n");
    let mut criteria = Vec::new();
    for r in &reports {
        let within = r.elapsed_s <= r.budget_s;
        let _ = writeln!(summary, "{}", r.line());
        let _ = writeln!(csv, "{},{},{},{within},{}", r.id, r.name, r.passed, r.budget_s);
        // wall-clock time stays out of the artifact so reruns are byte-identical
        criteria.push(json!({
            "id": r.id,
            "name": r.name,
            "passed": r.passed,
            "within_budget": within,
            "budget_s": r.budget_s,
            "checks": r.checks,
        }));
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    let _ = write!(summary, "{passed}/{} criteria passed", reports.len());
    Artifact {
        json: json!({ "passed": passed, "total": reports.len(), "criteria": criteria }),
        csv: Some(csv),
        summary,
        ok: passed == reports.len(),
    }
}
