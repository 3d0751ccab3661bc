//! Quasi-norms, seminorms, convolution, dilations and dilation averages for
//! sampled functions on a graded group in exponential coordinates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::reduce::{pairwise_sum, pairwise_sum_complex};
use super::{Complex, CutoffFamily, DenseMatrix, GridSpec, LogQuadrature, Orientation, SampledFunction, SupportClaim};
use crate::lie::MultiIndex;
use crate::{GradedLieAlgebra, GroupLaw, NumericError};

/// `Σ |x_j|^{1/q_j}`.
pub fn quasi_norm(alg: &GradedLieAlgebra, x: &[f64]) -> f64 {
    x.iter().zip(alg.weights_f64()).map(|(v, q)| v.abs().powf(1.0 / q)).sum()
}

fn check_dim(law: &GroupLaw, grid: &GridSpec) -> Result<(), NumericError> {
    if grid.dim() != law.dim() {
        return Err(NumericError::DimensionMismatch { expected: law.dim(), got: grid.dim() });
    }
    Ok(())
}

fn check_same(f: &SampledFunction, g: &SampledFunction) -> Result<(), NumericError> {
    if !f.grid.same_as(&g.grid) {
        return Err(NumericError::GridMismatch);
    }
    Ok(())
}

fn positive(name: &'static str, value: f64) -> Result<(), NumericError> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(NumericError::NonPositive { name, value });
    }
    Ok(())
}

/// `exp(1 - 1/(1-s²))` on `|s| < 1`, normalized to 1 at 0.
pub fn bump_1d(s: f64) -> f64 {
    let s2 = s * s;
    if s2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s2)).exp()
    }
}

/// Product bump `Π bump_1d(x_j / r_j)`; coordinates with `r_j = ∞` are ignored.
pub fn product_bump(x: &[f64], radii: &[f64]) -> f64 {
    x.iter().zip(radii).map(|(v, r)| if r.is_finite() { bump_1d(v / r) } else { 1.0 }).product()
}

#[derive(Clone, Debug, Serialize)]
pub struct TriangleProbe {
    pub constant: f64,
    pub half_sample_constant: f64,
    /// `constant / half_sample_constant`, at least 1.
    pub stability_ratio: f64,
    pub samples: usize,
}

fn random_scaled_point(alg: &GradedLieAlgebra, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let x: Vec<f64> = (0..alg.dim()).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let lambda = 2f64.powf(rng.random_range(-4.0..=4.0));
    alg.dilate_unchecked(lambda, &x)
}

/// Largest sampled `‖xy‖ / (‖x‖ + ‖y‖)`. Points are uniform in the unit cube
/// and independently dilated by `2^s`, `s ∈ [-4, 4]`.
pub fn triangle_constant_probe(law: &GroupLaw, samples: usize, seed: u64) -> TriangleProbe {
    let alg = law.algebra();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> =
        (0..samples).map(|_| (random_scaled_point(alg, &mut rng), random_scaled_point(alg, &mut rng))).collect();
    let ratios: Vec<f64> = pairs
        .par_iter()
        .map(|(x, y)| {
            let denom = quasi_norm(alg, x) + quasi_norm(alg, y);
            if denom == 0.0 {
                0.0
            } else {
                quasi_norm(alg, &law.multiply(x, y)) / denom
            }
        })
        .collect();
    let half = ratios[..samples / 2].iter().fold(0.0f64, |m, &r| m.max(r));
    let constant = ratios.iter().fold(0.0f64, |m, &r| m.max(r));
    TriangleProbe {
        constant,
        half_sample_constant: half,
        stability_ratio: if half > 0.0 { constant / half } else { f64::INFINITY },
        samples,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeminormReport {
    pub value: f64,
    /// Grid point where the supremum is attained.
    pub argmax: Vec<f64>,
    pub multi_index: Vec<u32>,
    pub warning: Option<String>,
}

pub(crate) fn all_multi_indices(n: usize, max_order: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for prefix in &out {
            let used: u32 = prefix.iter().sum();
            for k in 0..=(max_order - used) {
                let mut p = prefix.clone();
                p.push(k);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Second-order central difference along `axis`; NaN marks points whose
/// stencil leaves the grid (or touches an earlier NaN).
pub(crate) fn central_difference(grid: &GridSpec, values: &[Complex], axis: usize) -> Vec<Complex> {
    let nan = Complex::new(f64::NAN, f64::NAN);
    if grid.is_constant_axis(axis) {
        return values.iter().map(|v| if v.re.is_nan() { nan } else { Complex::new(0.0, 0.0) }).collect();
    }
    let stride = grid.strides()[axis];
    let n = grid.counts()[axis];
    let h2 = 2.0 * grid.spacing()[axis];
    (0..values.len())
        .map(|i| {
            let k = (i / stride) % n;
            if k == 0 || k == n - 1 {
                return nan;
            }
            let (a, b) = (values[i + stride], values[i - stride]);
            if a.re.is_nan() || b.re.is_nan() {
                nan
            } else {
                (a - b) / h2
            }
        })
        .collect()
}

/// Discrete `sup_x sup_{|I| ≤ order} (1+‖x‖)^{(order+1)(Q+1)} |∂^I f(x)|`, with
/// `|I|` the plain order and `∂^I` by iterated central differences. Points whose
/// stencil would leave the grid are skipped.
pub fn schwartz_seminorm(law: &GroupLaw, f: &SampledFunction, order: u32) -> Result<SeminormReport, NumericError> {
    check_dim(law, &f.grid)?;
    let alg = law.algebra();
    let grid = &f.grid;
    let q = alg.homogeneous_dimension_f64();
    let power = (order as f64 + 1.0) * (q + 1.0);
    let weights: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map_init(|| vec![0.0; grid.dim()], |p, i| {
            grid.point_into(i, p);
            (1.0 + quasi_norm(alg, p)).powf(power)
        })
        .collect();
    let mut best = SeminormReport { value: 0.0, argmax: vec![0.0; grid.dim()], multi_index: vec![0; grid.dim()], warning: None };
    for idx in all_multi_indices(grid.dim(), order) {
        let mut d = f.values.clone();
        for (axis, &k) in idx.iter().enumerate() {
            for _ in 0..k {
                d = central_difference(grid, &d, axis);
            }
        }
        for (i, v) in d.iter().enumerate() {
            if v.re.is_nan() {
                continue;
            }
            let s = weights[i] * v.norm();
            if s > best.value {
                best.value = s;
                best.argmax = grid.point(i);
                best.multi_index = idx.clone();
            }
        }
    }
    let qmax = alg.weights_f64().iter().cloned().fold(0.0, f64::max);
    let nmin = grid.counts().iter().filter(|&&n| n > 1).min().copied().unwrap_or(1);
    if order as f64 * qmax >= (nmin as f64 - 1.0) / 4.0 {
        best.warning = Some(format!(
            "derivative order {} with weight {} is large for a {}-point axis; finite differences are unreliable",
            order, qmax, nmin
        ));
    }
    let near_edge = (0..grid.dim()).any(|j| {
        !grid.is_constant_axis(j)
            && best.argmax[j].abs() >= grid.half_widths()[j] - (order as f64 + 1.0) * grid.spacing()[j] - 1e-12
    });
    if best.value > 0.0 && near_edge && best.warning.is_none() {
        best.warning = Some("supremum attained at the box boundary; truncation may dominate".into());
    }
    Ok(best)
}

/// `(f * g)(x) = Σ_y h f(y) g(y⁻¹x)`, with `g` interpolated off-grid.
pub fn convolve(law: &GroupLaw, f: &SampledFunction, g: &SampledFunction) -> Result<SampledFunction, NumericError> {
    check_dim(law, &f.grid)?;
    check_same(f, g)?;
    let grid = &f.grid;
    let n = grid.dim();
    let h = grid.cell_volume();
    let sources: Vec<(Vec<f64>, Complex)> = f
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm_sqr() != 0.0)
        .map(|(i, v)| (grid.point(i).into_iter().map(|c| -c).collect(), *v))
        .collect();
    let values: Vec<Complex> = (0..grid.len())
        .into_par_iter()
        .map_init(
            || (vec![0.0; n], vec![0.0; 2 * n], vec![0.0; n], Vec::with_capacity(sources.len())),
            |(x, buf, z, terms), i| {
                grid.point_into(i, x);
                terms.clear();
                for (neg_y, fy) in &sources {
                    law.multiply_into(neg_y, x, buf, z);
                    let gz = g.eval(z);
                    if gz.norm_sqr() != 0.0 {
                        terms.push(fy * gz);
                    }
                }
                pairwise_sum_complex(terms) * h
            },
        )
        .collect();
    let support = if f.support == SupportClaim::Compact && g.support == SupportClaim::Compact {
        SupportClaim::Compact
    } else {
        SupportClaim::Unspecified
    };
    Ok(SampledFunction { grid: grid.clone(), values, support })
}

/// `f*(x) = conj f(x⁻¹)`; exact, since `x⁻¹ = -x` is again a grid point.
pub fn involution(f: &SampledFunction) -> SampledFunction {
    let values = (0..f.grid.len()).map(|i| f.values[f.grid.mirror_index(i)].conj()).collect();
    SampledFunction { grid: f.grid.clone(), values, support: f.support }
}

/// `(σ_λ f)(x) = λ^Q f(α_λ x)`, resampled on the same grid.
pub fn dilate(law: &GroupLaw, f: &SampledFunction, lambda: f64) -> Result<SampledFunction, NumericError> {
    check_dim(law, &f.grid)?;
    positive("lambda", lambda)?;
    let alg = law.algebra();
    let scale = lambda.powf(alg.homogeneous_dimension_f64());
    let factors: Vec<f64> = alg.weights_f64().iter().map(|q| lambda.powf(*q)).collect();
    Ok(SampledFunction::from_fn(f.grid.clone(), f.support, |x| {
        let y: Vec<f64> = x.iter().zip(&factors).map(|(a, b)| a * b).collect();
        f.eval(&y) * scale
    }))
}

/// Riemann sum of `x^α f(x)`.
pub fn moment(law: &GroupLaw, f: &SampledFunction, alpha: &MultiIndex) -> Result<Complex, NumericError> {
    check_dim(law, &f.grid)?;
    if alpha.0.len() != f.dim() {
        return Err(NumericError::DimensionMismatch { expected: f.dim(), got: alpha.0.len() });
    }
    let grid = &f.grid;
    let terms: Vec<Complex> = (0..grid.len())
        .into_par_iter()
        .map_init(|| vec![0.0; grid.dim()], |p, i| {
            grid.point_into(i, p);
            let mono: f64 = p.iter().zip(&alpha.0).map(|(x, &k)| x.powi(k as i32)).product();
            f.values[i] * mono
        })
        .collect();
    Ok(pairwise_sum_complex(&terms) * grid.cell_volume())
}

/// Product bump of radius `R_j/4` on each non-constant axis.
pub fn default_bump(grid: &GridSpec) -> SampledFunction {
    let radii: Vec<f64> = (0..grid.dim())
        .map(|j| if grid.is_constant_axis(j) { f64::INFINITY } else { grid.half_widths()[j] / 4.0 })
        .collect();
    SampledFunction::from_real_fn(grid.clone(), SupportClaim::Compact, |x| product_bump(x, &radii))
}

/// `f - (∫f / ∫k) k`, so the result has vanishing Riemann integral. `k`
/// defaults to [`default_bump`].
pub fn project_to_rel(law: &GroupLaw, f: &SampledFunction, bump: Option<&SampledFunction>) -> Result<SampledFunction, NumericError> {
    check_dim(law, &f.grid)?;
    let owned;
    let k = match bump {
        Some(k) => {
            check_same(f, k)?;
            k
        }
        None => {
            owned = default_bump(&f.grid);
            &owned
        }
    };
    let mass = k.integral();
    if mass.norm() == 0.0 {
        return Err(NumericError::Invalid("projection bump has zero integral".into()));
    }
    let c = f.integral() / mass;
    let mut out = f.clone();
    for (v, kv) in out.values.iter_mut().zip(&k.values) {
        *v -= c * kv;
    }
    // absorb the rounding residue into the largest bump entry
    let residue = out.integral() / f.grid.cell_volume();
    if let Some((imax, _)) = k.values.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())) {
        out.values[imax] -= residue;
    }
    Ok(out)
}

pub const MEAN_TOLERANCE: f64 = 1e-10;

/// `Σ_k w_k σ_{λ_k} f` for a log-λ quadrature of `∫ χ(λ) σ_λ f dλ/λ`.
/// Requires `|∫f| < 1e-10`.
pub fn average_with_quadrature(law: &GroupLaw, f: &SampledFunction, quad: &LogQuadrature) -> Result<SampledFunction, NumericError> {
    check_dim(law, &f.grid)?;
    let mean = f.integral().norm();
    if mean >= MEAN_TOLERANCE {
        return Err(NumericError::NonzeroMean(mean));
    }
    let alg = law.algebra();
    let q = alg.homogeneous_dimension_f64();
    let weights = alg.weights_f64().to_vec();
    let nodes: Vec<(Vec<f64>, f64)> = quad
        .iter()
        .map(|(l, w)| (weights.iter().map(|qj| l.powf(*qj)).collect(), w * l.powf(q)))
        .collect();
    let grid = &f.grid;
    let values = (0..grid.len())
        .into_par_iter()
        .map_init(
            || (vec![0.0; grid.dim()], vec![0.0; grid.dim()], Vec::with_capacity(nodes.len())),
            |(x, y, terms), i| {
                grid.point_into(i, x);
                terms.clear();
                for (factors, w) in &nodes {
                    for j in 0..x.len() {
                        y[j] = x[j] * factors[j];
                    }
                    terms.push(f.eval(y) * *w);
                }
                pairwise_sum_complex(terms)
            },
        )
        .collect();
    Ok(SampledFunction { grid: grid.clone(), values, support: SupportClaim::Unspecified })
}

/// Midpoint log-λ rule with `n_lambda` nodes over the cutoff's support.
pub fn average_over_dilations(
    law: &GroupLaw,
    f: &SampledFunction,
    cutoff: &CutoffFamily,
    n_lambda: usize,
) -> Result<SampledFunction, NumericError> {
    let quad = LogQuadrature::midpoint(cutoff, n_lambda)?;
    average_with_quadrature(law, f, &quad)
}

/// Grid points with `r0 ≤ ‖v‖ ≤ r1` whose dilate by `λ` stays in the box.
fn annulus_points(alg: &GradedLieAlgebra, grid: &GridSpec, lambda: f64, annulus: (f64, f64)) -> Vec<usize> {
    let mut p = vec![0.0; grid.dim()];
    (0..grid.len())
        .filter(|&i| {
            grid.point_into(i, &mut p);
            let r = quasi_norm(alg, &p);
            r >= annulus.0 && r <= annulus.1 && grid.contains(&alg.dilate_unchecked(lambda, &p))
        })
        .collect()
}

/// `sup |λ^{Q-ν} u(α_λ v) - u(v)| / sup |u|` over annulus grid points, i.e.
/// the failure of `u` to be homogeneous of degree `ν - Q` (type `ν`).
pub fn homogeneity_defect(
    law: &GroupLaw,
    u: &SampledFunction,
    lambda: f64,
    annulus: (f64, f64),
    nu: f64,
) -> Result<f64, NumericError> {
    check_dim(law, &u.grid)?;
    positive("lambda", lambda)?;
    let alg = law.algebra();
    let pts = annulus_points(alg, &u.grid, lambda, annulus);
    let q = alg.homogeneous_dimension_f64();
    let scale = lambda.powf(q - nu);
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for i in pts {
        let v = u.grid.point(i);
        let w = alg.dilate_unchecked(lambda, &v);
        num = num.max((u.eval(&w) * scale - u.values[i]).norm());
        den = den.max(u.values[i].norm());
    }
    Ok(if den == 0.0 { 0.0 } else { num / den })
}

/// [`homogeneity_defect`] for an exactly evaluable function, sampled at the
/// annulus points of `grid`.
pub fn homogeneity_defect_fn<F>(alg: &GradedLieAlgebra, u: F, grid: &GridSpec, lambda: f64, annulus: (f64, f64), nu: f64) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let scale = lambda.powf(alg.homogeneous_dimension_f64() - nu);
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for i in annulus_points(alg, grid, lambda, annulus) {
        let v = grid.point(i);
        let uv = u(&v);
        num = num.max((scale * u(&alg.dilate_unchecked(lambda, &v)) - uv).abs());
        den = den.max(uv.abs());
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// `v ↦ v^α u(v)`. Multiplying a type-`ν` kernel by `v^α` gives type `ν + [α]`.
pub fn difference_op(law: &GroupLaw, u: &SampledFunction, alpha: &MultiIndex) -> Result<SampledFunction, NumericError> {
    check_dim(law, &u.grid)?;
    if alpha.0.len() != u.dim() {
        return Err(NumericError::DimensionMismatch { expected: u.dim(), got: alpha.0.len() });
    }
    let grid = &u.grid;
    let values = (0..grid.len())
        .into_par_iter()
        .map_init(|| vec![0.0; grid.dim()], |p, i| {
            grid.point_into(i, p);
            let mono: f64 = p.iter().zip(&alpha.0).map(|(x, &k)| x.powi(k as i32)).product();
            u.values[i] * mono
        })
        .collect();
    Ok(SampledFunction { grid: grid.clone(), values, support: u.support })
}

/// Matrix of `ψ ↦ ψ * u` (`KernelRight`, entries `h·u(y⁻¹x)`) or
/// `ψ ↦ u * ψ` (`KernelLeft`, entries `h·u(x y⁻¹)`) on the points of `grid`.
pub fn convolution_operator_matrix(
    law: &GroupLaw,
    u: &SampledFunction,
    grid: &GridSpec,
    orientation: Orientation,
) -> Result<DenseMatrix, NumericError> {
    check_dim(law, &u.grid)?;
    check_dim(law, grid)?;
    let n = grid.dim();
    let h = grid.cell_volume();
    let points: Vec<Vec<f64>> = (0..grid.len()).map(|i| grid.point(i)).collect();
    let neg: Vec<Vec<f64>> = points.iter().map(|p| p.iter().map(|c| -c).collect()).collect();
    let len = grid.len();
    let mut m = DenseMatrix::zeros(len, len);
    m.data.par_chunks_mut(len.max(1)).enumerate().for_each(|(i, row)| {
        let mut buf = vec![0.0; 2 * n];
        let mut z = vec![0.0; n];
        for (j, e) in row.iter_mut().enumerate() {
            match orientation {
                Orientation::KernelRight => law.multiply_into(&neg[j], &points[i], &mut buf, &mut z),
                Orientation::KernelLeft => law.multiply_into(&points[i], &neg[j], &mut buf, &mut z),
            }
            *e = u.eval(&z) * h;
        }
    });
    Ok(m)
}

/// `F(γ) = ∫ χ(λ) f(λ^{w} · γ) dλ/λ` for `ℝ_{>0}` acting on a section by
/// `(λ·γ)_j = λ^{w_j} γ_j`.
pub fn orbit_average_on_section(
    section_weights: &[f64],
    f: &SampledFunction,
    cutoff: &CutoffFamily,
    n_lambda: usize,
) -> Result<SampledFunction, NumericError> {
    if section_weights.len() != f.dim() {
        return Err(NumericError::DimensionMismatch { expected: f.dim(), got: section_weights.len() });
    }
    for &w in section_weights {
        positive("section weight", w)?;
    }
    let quad = LogQuadrature::midpoint(cutoff, n_lambda)?;
    let grid = &f.grid;
    let values = (0..grid.len())
        .into_par_iter()
        .map_init(|| (vec![0.0; grid.dim()], vec![0.0; grid.dim()]), |(x, y), i| {
            grid.point_into(i, x);
            let terms: Vec<Complex> = quad
                .iter()
                .map(|(l, w)| {
                    for j in 0..x.len() {
                        y[j] = l.powf(section_weights[j]) * x[j];
                    }
                    f.eval(y) * w
                })
                .collect();
            pairwise_sum_complex(&terms)
        })
        .collect();
    Ok(SampledFunction { grid: grid.clone(), values, support: SupportClaim::Unspecified })
}

/// Running totals of `∫ (1+‖v‖)^{-p} dv` over the boxes `α_{2^k}([-1,1]^n)`,
/// `k = 0..=doublings`. Each shell is integrated on a fixed rescaled grid of
/// `cells` midpoints per axis, so all scales get the same relative accuracy.
pub fn integrability_probe(alg: &GradedLieAlgebra, exponent: f64, doublings: usize, cells: usize) -> Vec<f64> {
    let n = alg.dim();
    let q = alg.homogeneous_dimension_f64();
    let weights = alg.weights_f64().to_vec();
    let total = cells.pow(n as u32);
    let h = 2.0 / cells as f64;
    let cell_vol = h.powi(n as i32);
    let mids: Vec<Vec<f64>> = (0..total)
        .map(|mut i| {
            let mut p = vec![0.0; n];
            for j in (0..n).rev() {
                p[j] = -1.0 + (i % cells) as f64 * h + h / 2.0;
                i /= cells;
            }
            p
        })
        .collect();
    let inner = |p: &[f64]| p.iter().zip(&weights).all(|(x, w)| x.abs() < 0.5f64.powf(*w));
    let shell_norms: Vec<f64> = mids.iter().filter(|p| !inner(p)).map(|p| quasi_norm(alg, p)).collect();
    let all_norms: Vec<f64> = mids.iter().map(|p| quasi_norm(alg, p)).collect();
    let ball: Vec<f64> = all_norms.iter().map(|r| (1.0 + r).powf(-exponent)).collect();
    let mut sum = pairwise_sum(&ball) * cell_vol;
    let mut out = vec![sum];
    for k in 1..=doublings {
        let s = 2f64.powi(k as i32);
        let terms: Vec<f64> = shell_norms.iter().map(|r| (1.0 + s * r).powf(-exponent)).collect();
        sum += pairwise_sum(&terms) * cell_vol * s.powf(q);
        out.push(sum);
    }
    out
}
