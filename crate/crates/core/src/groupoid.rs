//! Kernels `f(x, t, v)` on the tangent groupoid of a graded group: the
//! convolution algebra, involution, I-norm, zoom action, the fiber
//! representations `p_t` and averaged operators.
//!
//! A point `(x, t, v)` with `t > 0` is the arrow from `x α_t(v)` to `x`; at
//! `t = 0` it is the element `v` of the fiber group over `x`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::numeric::harmonic::{self, quasi_norm};
use crate::numeric::reduce::pairwise_sum;
use crate::numeric::{operator_norm, Complex, DenseMatrix, GridSpec, LogQuadrature, SampledFunction, SupportClaim};
use crate::{FormatError, GroupLaw, NumericError};

const T_SNAP: f64 = 1e-9;

/// Ascending time nodes starting at 0. Values are interpolated linearly in
/// `t` and vanish beyond the last node.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

impl TimeGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self, NumericError> {
        if nodes.first() != Some(&0.0) {
            return Err(NumericError::Invalid("time grid must start at t = 0".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(NumericError::Invalid("time nodes must be finite and strictly increasing".into()));
        }
        Ok(TimeGrid { nodes })
    }

    /// `{0} ∪ {t_min·r^k : k = 0..n}` with `r = (t_max/t_min)^{1/(n-1)}`.
    pub fn log_uniform(t_min: f64, t_max: f64, n: usize) -> Result<Self, NumericError> {
        if !(t_min > 0.0) || !(t_max >= t_min) || n == 0 {
            return Err(NumericError::Invalid(format!("bad log-uniform time grid ({t_min}, {t_max}, {n})")));
        }
        let mut nodes = vec![0.0];
        if n == 1 {
            nodes.push(t_min);
        } else {
            let r = (t_max / t_min).ln() / (n - 1) as f64;
            nodes.extend((0..n).map(|k| t_min * (r * k as f64).exp()));
        }
        Self::new(nodes)
    }

    /// The single node `t = 0`.
    pub fn zero_only() -> Self {
        TimeGrid { nodes: vec![0.0] }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Linear-interpolation stencil; `false` outside `[0, t_max]`.
    #[inline]
    pub fn stencil<F: FnMut(usize, f64)>(&self, t: f64, mut visit: F) -> bool {
        let n = self.nodes.len();
        let top = self.nodes[n - 1];
        if t < 0.0 || t > top * (1.0 + T_SNAP) {
            return false;
        }
        let k = self.nodes.partition_point(|&s| s <= t);
        // nodes[k-1] <= t < nodes[k]
        let lo = k.saturating_sub(1);
        if (t - self.nodes[lo]).abs() <= T_SNAP * self.nodes[lo].max(t) || lo == n - 1 {
            visit(lo, 1.0);
            return true;
        }
        let (a, b) = (self.nodes[lo], self.nodes[lo + 1]);
        if (b - t).abs() <= T_SNAP * b {
            visit(lo + 1, 1.0);
            return true;
        }
        let s = (t - a) / (b - a);
        visit(lo, 1.0 - s);
        visit(lo + 1, s);
        true
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupoidKernel {
    pub xgrid: GridSpec,
    pub tgrid: TimeGrid,
    pub vgrid: GridSpec,
    /// Layout `[ix][it][iv]`.
    pub values: Vec<Complex>,
}

fn zero() -> Complex {
    Complex::new(0.0, 0.0)
}

impl GroupoidKernel {
    pub fn zeros(xgrid: GridSpec, tgrid: TimeGrid, vgrid: GridSpec) -> Result<Self, NumericError> {
        let len = xgrid
            .len()
            .checked_mul(tgrid.len())
            .and_then(|a| a.checked_mul(vgrid.len()))
            .ok_or(NumericError::OverBudget { points: usize::MAX, budget: GridSpec::DEFAULT_BUDGET })?;
        if len > 4 * GridSpec::DEFAULT_BUDGET {
            return Err(NumericError::OverBudget { points: len, budget: 4 * GridSpec::DEFAULT_BUDGET });
        }
        Ok(GroupoidKernel { xgrid, tgrid, vgrid, values: vec![zero(); len] })
    }

    pub fn from_fn<F>(xgrid: GridSpec, tgrid: TimeGrid, vgrid: GridSpec, f: F) -> Result<Self, NumericError>
    where
        F: Fn(&[f64], f64, &[f64]) -> Complex + Sync,
    {
        let mut k = Self::zeros(xgrid, tgrid, vgrid)?;
        let nv = k.vgrid.len();
        let (xg, tg, vg) = (&k.xgrid, &k.tgrid, &k.vgrid);
        k.values.par_chunks_mut(nv).enumerate().for_each(|(slab, out)| {
            let (ix, it) = (slab / tg.len(), slab % tg.len());
            let x = xg.point(ix);
            let t = tg.nodes[it];
            let mut v = vec![0.0; vg.dim()];
            for (iv, o) in out.iter_mut().enumerate() {
                vg.point_into(iv, &mut v);
                *o = f(&x, t, &v);
            }
        });
        Ok(k)
    }

    pub fn from_real_fn<F>(xgrid: GridSpec, tgrid: TimeGrid, vgrid: GridSpec, f: F) -> Result<Self, NumericError>
    where
        F: Fn(&[f64], f64, &[f64]) -> f64 + Sync,
    {
        Self::from_fn(xgrid, tgrid, vgrid, |x, t, v| Complex::new(f(x, t, v), 0.0))
    }

    fn like(&self) -> Self {
        GroupoidKernel {
            xgrid: self.xgrid.clone(),
            tgrid: self.tgrid.clone(),
            vgrid: self.vgrid.clone(),
            values: vec![zero(); self.values.len()],
        }
    }

    pub fn same_grids(&self, other: &Self) -> bool {
        self.xgrid.same_as(&other.xgrid) && self.tgrid == other.tgrid && self.vgrid.same_as(&other.vgrid)
    }

    fn slab_len(&self) -> usize {
        self.vgrid.len()
    }

    #[inline]
    pub fn slice(&self, ix: usize, it: usize) -> &[Complex] {
        let nv = self.slab_len();
        let s = (ix * self.tgrid.len() + it) * nv;
        &self.values[s..s + nv]
    }

    /// The fiber `v ↦ f(x_ix, t_it, v)`.
    pub fn fiber(&self, ix: usize, it: usize) -> SampledFunction {
        SampledFunction { grid: self.vgrid.clone(), values: self.slice(ix, it).to_vec(), support: SupportClaim::Unspecified }
    }

    pub fn set_fiber(&mut self, ix: usize, it: usize, fiber: &SampledFunction) -> Result<(), NumericError> {
        if !fiber.grid.same_as(&self.vgrid) {
            return Err(NumericError::GridMismatch);
        }
        let nv = self.slab_len();
        let s = (ix * self.tgrid.len() + it) * nv;
        self.values[s..s + nv].copy_from_slice(&fiber.values);
        Ok(())
    }

    /// Interpolated value; zero outside the grids.
    pub fn eval(&self, x: &[f64], t: f64, v: &[f64]) -> Complex {
        let mut acc = zero();
        let nt = self.tgrid.len();
        let nv = self.slab_len();
        self.xgrid.stencil(x, |ix, wx| {
            self.tgrid.stencil(t, |it, wt| {
                let base = (ix * nt + it) * nv;
                self.vgrid.stencil(v, |iv, wv| acc += self.values[base + iv] * (wx * wt * wv));
            });
        });
        acc
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn max_diff(&self, other: &Self) -> Result<f64, NumericError> {
        if !self.same_grids(other) {
            return Err(NumericError::GridMismatch);
        }
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).norm())))
    }

    pub fn scale(&self, c: Complex) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// Copy with every `t = 0` fiber projected to zero mean.
    pub fn project_t0_to_rel(&self, law: &GroupLaw) -> Result<Self, NumericError> {
        let mut out = self.clone();
        for ix in 0..self.xgrid.len() {
            let p = harmonic::project_to_rel(law, &self.fiber(ix, 0), None)?;
            out.set_fiber(ix, 0, &p)?;
        }
        Ok(out)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("#groupoid,{}", self.xgrid.dim());
        for r in self.xgrid.half_widths() {
            out.push_str(&format!(",{r}"));
        }
        for n in self.xgrid.counts() {
            out.push_str(&format!(",{n}"));
        }
        out.push_str(&format!(",{}", self.tgrid.len()));
        for t in self.tgrid.nodes() {
            out.push_str(&format!(",{t}"));
        }
        out.push_str(&format!(",{}", self.vgrid.dim()));
        for r in self.vgrid.half_widths() {
            out.push_str(&format!(",{r}"));
        }
        for n in self.vgrid.counts() {
            out.push_str(&format!(",{n}"));
        }
        out.push('\n');
        let (nt, nv) = (self.tgrid.len(), self.slab_len());
        for (i, v) in self.values.iter().enumerate() {
            let (ix, it, iv) = (i / (nt * nv), (i / nv) % nt, i % nv);
            for k in self.xgrid.multi_index(ix) {
                out.push_str(&format!("{k},"));
            }
            out.push_str(&format!("{it},"));
            for k in self.vgrid.multi_index(iv) {
                out.push_str(&format!("{k},"));
            }
            out.push_str(&format!("{},{}\n", v.re, v.im));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, FormatError> {
        let bad = |m: &str| FormatError::Csv(m.to_string());
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines.next().ok_or_else(|| bad("empty input"))?.split(',').collect();
        if header.first() != Some(&"#groupoid") {
            return Err(bad("missing #groupoid header"));
        }
        let mut pos = 1;
        let mut take = |n: usize| -> Result<Vec<&str>, FormatError> {
            let s = header.get(pos..pos + n).ok_or_else(|| bad("truncated header"))?.to_vec();
            pos += n;
            Ok(s)
        };
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number in header"));
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad("bad integer in header"));
        let nx = int(take(1)?[0])?;
        let xr = take(nx)?.into_iter().map(num).collect::<Result<Vec<_>, _>>()?;
        let xn = take(nx)?.into_iter().map(int).collect::<Result<Vec<_>, _>>()?;
        let nt = int(take(1)?[0])?;
        let tn = take(nt)?.into_iter().map(num).collect::<Result<Vec<_>, _>>()?;
        let nvd = int(take(1)?[0])?;
        let vr = take(nvd)?.into_iter().map(num).collect::<Result<Vec<_>, _>>()?;
        let vn = take(nvd)?.into_iter().map(int).collect::<Result<Vec<_>, _>>()?;
        let e = |e: NumericError| FormatError::Csv(e.to_string());
        let xgrid = GridSpec::with_budget(xr, xn, usize::MAX).map_err(e)?;
        let vgrid = GridSpec::with_budget(vr, vn, usize::MAX).map_err(e)?;
        let tgrid = TimeGrid::new(tn).map_err(e)?;
        let mut k = GroupoidKernel::zeros(xgrid, tgrid, vgrid).map_err(e)?;
        let (ntl, nvl) = (k.tgrid.len(), k.vgrid.len());
        let mut seen = vec![false; k.values.len()];
        for (row, line) in lines.enumerate() {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != nx + 1 + nvd + 2 {
                return Err(FormatError::Csv(format!("row {}: wrong column count", row + 1)));
            }
            let idx = cols[..nx + 1 + nvd]
                .iter()
                .map(|s| s.parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| FormatError::Csv(format!("row {}: bad index", row + 1)))?;
            let (xi, ti, vi) = (&idx[..nx], idx[nx], &idx[nx + 1..]);
            if xi.iter().zip(k.xgrid.counts()).any(|(a, b)| a >= b) || ti >= ntl || vi.iter().zip(k.vgrid.counts()).any(|(a, b)| a >= b) {
                return Err(FormatError::Csv(format!("row {}: index out of range", row + 1)));
            }
            let re: f64 = cols[nx + 1 + nvd].parse().map_err(|_| FormatError::Csv(format!("row {}: bad value", row + 1)))?;
            let im: f64 = cols[nx + 2 + nvd].parse().map_err(|_| FormatError::Csv(format!("row {}: bad value", row + 1)))?;
            let flat = (k.xgrid.flat_index(xi) * ntl + ti) * nvl + k.vgrid.flat_index(vi);
            k.values[flat] = Complex::new(re, im);
            seen[flat] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(bad("missing grid points"));
        }
        Ok(k)
    }
}

fn check_law(law: &GroupLaw, f: &GroupoidKernel) -> Result<(), NumericError> {
    for g in [&f.xgrid, &f.vgrid] {
        if g.dim() != law.dim() {
            return Err(NumericError::DimensionMismatch { expected: law.dim(), got: g.dim() });
        }
    }
    Ok(())
}

fn dilation_factors(law: &GroupLaw, t: f64) -> Vec<f64> {
    law.algebra().weights_f64().iter().map(|q| t.powf(*q)).collect()
}

fn nonzero_points(grid: &GridSpec, values: &[Complex]) -> Vec<(Vec<f64>, Complex)> {
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm_sqr() != 0.0)
        .map(|(i, v)| (grid.point(i), *v))
        .collect()
}

/// `(f*g)(x,t,v) = ∫ f(x,t,w) g(x α_t(w), t, w⁻¹v) dw`. At `t = 0` this is
/// fiberwise group convolution, computed by [`harmonic::convolve`].
pub fn groupoid_convolve(law: &GroupLaw, f: &GroupoidKernel, g: &GroupoidKernel) -> Result<GroupoidKernel, NumericError> {
    check_law(law, f)?;
    if !f.same_grids(g) {
        return Err(NumericError::GridMismatch);
    }
    let n = law.dim();
    let (nt, nv) = (f.tgrid.len(), f.vgrid.len());
    let hv = f.vgrid.cell_volume();
    let mut out = f.like();
    out.values.par_chunks_mut(nv).enumerate().for_each(|(slab, dst)| {
        let (ix, it) = (slab / nt, slab % nt);
        let t = f.tgrid.nodes[it];
        if t == 0.0 {
            let c = harmonic::convolve(law, &f.fiber(ix, 0), &g.fiber(ix, 0)).expect("fiber grids agree");
            dst.copy_from_slice(&c.values);
            return;
        }
        let x = f.xgrid.point(ix);
        let factors = dilation_factors(law, t);
        let mut buf = vec![0.0; 2 * n];
        let mut xw = vec![0.0; n];
        let mut aw = vec![0.0; n];
        let mut z = vec![0.0; n];
        let mut v = vec![0.0; n];
        let mut xst: Vec<(usize, f64)> = Vec::with_capacity(1 << n);
        for (w, fw) in nonzero_points(&f.vgrid, f.slice(ix, it)) {
            for j in 0..n {
                aw[j] = w[j] * factors[j];
            }
            law.multiply_into(&x, &aw, &mut buf, &mut xw);
            xst.clear();
            if !f.xgrid.stencil(&xw, |i, wgt| xst.push((i, wgt))) {
                continue;
            }
            let neg_w: Vec<f64> = w.iter().map(|c| -c).collect();
            for (iv, d) in dst.iter_mut().enumerate() {
                f.vgrid.point_into(iv, &mut v);
                law.multiply_into(&neg_w, &v, &mut buf, &mut z);
                let mut gz = zero();
                for &(jx, wx) in &xst {
                    let gs = g.slice(jx, it);
                    f.vgrid.stencil(&z, |k, wv| gz += gs[k] * (wx * wv));
                }
                *d += fw * gz * hv;
            }
        }
    });
    Ok(out)
}

/// `f*(x,t,v) = conj f(x α_t(v), t, v⁻¹)`; exact at `t = 0`.
pub fn groupoid_involution(law: &GroupLaw, f: &GroupoidKernel) -> Result<GroupoidKernel, NumericError> {
    check_law(law, f)?;
    let n = law.dim();
    let (nt, nv) = (f.tgrid.len(), f.vgrid.len());
    let mirror: Vec<usize> = (0..nv).map(|i| f.vgrid.mirror_index(i)).collect();
    let mut out = f.like();
    out.values.par_chunks_mut(nv).enumerate().for_each(|(slab, dst)| {
        let (ix, it) = (slab / nt, slab % nt);
        let t = f.tgrid.nodes[it];
        let x_fixed = t == 0.0 || (0..n).all(|j| f.xgrid.is_constant_axis(j));
        if x_fixed {
            let src = f.slice(ix, it);
            for (iv, d) in dst.iter_mut().enumerate() {
                *d = src[mirror[iv]].conj();
            }
            return;
        }
        let x = f.xgrid.point(ix);
        let factors = dilation_factors(law, t);
        let mut buf = vec![0.0; 2 * n];
        let mut av = vec![0.0; n];
        let mut xv = vec![0.0; n];
        let mut v = vec![0.0; n];
        for (iv, d) in dst.iter_mut().enumerate() {
            f.vgrid.point_into(iv, &mut v);
            for j in 0..n {
                av[j] = v[j] * factors[j];
            }
            law.multiply_into(&x, &av, &mut buf, &mut xv);
            let mut acc = zero();
            let iv_m = mirror[iv];
            f.xgrid.stencil(&xv, |jx, wx| acc += f.slice(jx, it)[iv_m] * wx);
            *d = acc.conj();
        }
    });
    Ok(out)
}

/// `sup_{(x,t)} ∫ |f(x,t,v)| dv`.
pub fn i1_norm(f: &GroupoidKernel) -> f64 {
    let hv = f.vgrid.cell_volume();
    f.values
        .par_chunks(f.vgrid.len())
        .map(|s| {
            let abs: Vec<f64> = s.iter().map(|z| z.norm()).collect();
            pairwise_sum(&abs) * hv
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max)
}

/// `max(‖f‖_{I,1}, ‖f*‖_{I,1})`.
pub fn i_norm(law: &GroupLaw, f: &GroupoidKernel) -> Result<f64, NumericError> {
    Ok(i1_norm(f).max(i1_norm(&groupoid_involution(law, f)?)))
}

/// `(σ_λ f)(x,t,v) = λ^Q f(x, t/λ, α_λ v)`, resampled on the same grids.
pub fn zoom(law: &GroupLaw, f: &GroupoidKernel, lambda: f64) -> Result<GroupoidKernel, NumericError> {
    check_law(law, f)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(NumericError::NonPositive { name: "lambda", value: lambda });
    }
    let n = law.dim();
    let scale = lambda.powf(law.algebra().homogeneous_dimension_f64());
    let factors = dilation_factors(law, lambda);
    let (nt, nv) = (f.tgrid.len(), f.vgrid.len());
    let mut out = f.like();
    out.values.par_chunks_mut(nv).enumerate().for_each(|(slab, dst)| {
        let (ix, it) = (slab / nt, slab % nt);
        let t = f.tgrid.nodes[it] / lambda;
        let mut tst: Vec<(usize, f64)> = Vec::with_capacity(2);
        if !f.tgrid.stencil(t, |k, w| tst.push((k, w))) {
            return;
        }
        let mut v = vec![0.0; n];
        let mut av = vec![0.0; n];
        for (iv, d) in dst.iter_mut().enumerate() {
            f.vgrid.point_into(iv, &mut v);
            for j in 0..n {
                av[j] = v[j] * factors[j];
            }
            let mut acc = zero();
            for &(kt, wt) in &tst {
                let s = f.slice(ix, kt);
                f.vgrid.stencil(&av, |k, wv| acc += s[k] * (wt * wv));
            }
            *d = acc * scale;
        }
    });
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct MembershipReport {
    /// `sup_x |Σ_v f(x,0,v) h_v|`.
    pub sup_mean: f64,
    pub worst_x: Vec<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

/// Checks `∫ f(x, 0, v) dv = 0` for every x-grid point.
pub fn ideal_membership(f: &GroupoidKernel, tol: f64) -> MembershipReport {
    let mut rep = MembershipReport { sup_mean: 0.0, worst_x: f.xgrid.point(0), tolerance: tol, passed: true };
    for ix in 0..f.xgrid.len() {
        let m = f.fiber(ix, 0).integral().norm();
        if m > rep.sup_mean {
            rep.sup_mean = m;
            rep.worst_x = f.xgrid.point(ix);
        }
    }
    rep.passed = rep.sup_mean <= tol;
    rep
}

fn check_l2(law: &GroupLaw, grid: &GridSpec) -> Result<(), NumericError> {
    if grid.dim() != law.dim() {
        return Err(NumericError::DimensionMismatch { expected: law.dim(), got: grid.dim() });
    }
    Ok(())
}

/// `K_t(x,y) h_y` with `K_t(x,y) = t^{-Q} f(x, t, α_{1/t}(x⁻¹y))`, on the
/// points of `l2grid`.
pub fn represent_pt(law: &GroupLaw, f: &GroupoidKernel, t: f64, l2grid: &GridSpec) -> Result<DenseMatrix, NumericError> {
    check_law(law, f)?;
    check_l2(law, l2grid)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(NumericError::NonPositive { name: "t", value: t });
    }
    let n = law.dim();
    let len = l2grid.len();
    let hy = l2grid.cell_volume();
    let scale = t.powf(-law.algebra().homogeneous_dimension_f64()) * hy;
    let inv = dilation_factors(law, 1.0 / t);
    let points: Vec<Vec<f64>> = (0..len).map(|i| l2grid.point(i)).collect();
    let mut m = DenseMatrix::zeros(len, len);
    if f.tgrid.t_max() * (1.0 + T_SNAP) < t {
        return Ok(m);
    }
    let mut tst: Vec<(usize, f64)> = Vec::new();
    f.tgrid.stencil(t, |k, w| tst.push((k, w)));
    m.data.par_chunks_mut(len.max(1)).enumerate().for_each(|(i, row)| {
        let x = &points[i];
        let neg_x: Vec<f64> = x.iter().map(|c| -c).collect();
        let mut xst: Vec<(usize, f64)> = Vec::new();
        if !f.xgrid.stencil(x, |k, w| xst.push((k, w))) {
            return;
        }
        let mut buf = vec![0.0; 2 * n];
        let mut d = vec![0.0; n];
        let mut v = vec![0.0; n];
        for (j, e) in row.iter_mut().enumerate() {
            law.multiply_into(&neg_x, &points[j], &mut buf, &mut d);
            for k in 0..n {
                v[k] = d[k] * inv[k];
            }
            let mut acc = zero();
            for &(kx, wx) in &xst {
                for &(kt, wt) in &tst {
                    let s = f.slice(kx, kt);
                    f.vgrid.stencil(&v, |kv, wv| acc += s[kv] * (wx * wt * wv));
                }
            }
            *e = acc * scale;
        }
    });
    Ok(m)
}

/// The same operator written as `ψ ↦ ∫ f(x,t,u) ψ(x α_t(u)) du`: each row is
/// the sum over v-grid points of `h_u f(x,t,u)` times the interpolation
/// weights of `ψ` at `x α_t(u)`. Accurate when `t` is too small for the
/// direct form to resolve `f` on `l2grid`.
pub fn represent_pt_pullback(law: &GroupLaw, f: &GroupoidKernel, t: f64, l2grid: &GridSpec) -> Result<DenseMatrix, NumericError> {
    check_law(law, f)?;
    check_l2(law, l2grid)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(NumericError::NonPositive { name: "t", value: t });
    }
    let n = law.dim();
    let len = l2grid.len();
    let hu = f.vgrid.cell_volume();
    let factors = dilation_factors(law, t);
    let mut m = DenseMatrix::zeros(len, len);
    if f.tgrid.t_max() * (1.0 + T_SNAP) < t {
        return Ok(m);
    }
    let mut tst: Vec<(usize, f64)> = Vec::new();
    f.tgrid.stencil(t, |k, w| tst.push((k, w)));
    m.data.par_chunks_mut(len.max(1)).enumerate().for_each(|(i, row)| {
        let x = l2grid.point(i);
        let mut xst: Vec<(usize, f64)> = Vec::new();
        if !f.xgrid.stencil(&x, |k, w| xst.push((k, w))) {
            return;
        }
        // fiber of f at (x, t), interpolated in x and t
        let mut fib = vec![zero(); f.vgrid.len()];
        for &(kx, wx) in &xst {
            for &(kt, wt) in &tst {
                for (a, b) in fib.iter_mut().zip(f.slice(kx, kt)) {
                    *a += b * (wx * wt);
                }
            }
        }
        let mut buf = vec![0.0; 2 * n];
        let mut u = vec![0.0; n];
        let mut au = vec![0.0; n];
        let mut y = vec![0.0; n];
        for (iu, fu) in fib.iter().enumerate() {
            if fu.norm_sqr() == 0.0 {
                continue;
            }
            f.vgrid.point_into(iu, &mut u);
            for k in 0..n {
                au[k] = u[k] * factors[k];
            }
            law.multiply_into(&x, &au, &mut buf, &mut y);
            let c = fu * hu;
            l2grid.stencil(&y, |j, w| row[j] += c * w);
        }
    });
    Ok(m)
}

/// `max_j (h_{y,j} / h_{v,j})^{1/q_j}`: below this `t` the direct form of
/// [`represent_pt`] undersamples the v-profile of the kernel.
pub fn pullback_threshold(law: &GroupLaw, f: &GroupoidKernel, l2grid: &GridSpec) -> f64 {
    let q = law.algebra().weights_f64();
    (0..law.dim())
        .map(|j| (l2grid.spacing()[j] / f.vgrid.spacing()[j]).powf(1.0 / q[j]))
        .fold(0.0, f64::max)
}

/// [`represent_pt`] above [`pullback_threshold`], [`represent_pt_pullback`] below.
pub fn represent_pt_auto(law: &GroupLaw, f: &GroupoidKernel, t: f64, l2grid: &GridSpec) -> Result<DenseMatrix, NumericError> {
    if t < pullback_threshold(law, f, l2grid) {
        represent_pt_pullback(law, f, t, l2grid)
    } else {
        represent_pt(law, f, t, l2grid)
    }
}

/// `sup |K(σ_λ f, t) - K(f, t/λ)| / sup |K(f, t/λ)|` for the direct form.
pub fn zoom_covariance_check(law: &GroupLaw, f: &GroupoidKernel, t: f64, lambda: f64, l2grid: &GridSpec) -> Result<f64, NumericError> {
    let zf = zoom(law, f, lambda)?;
    let k1 = represent_pt(law, &zf, t, l2grid)?;
    let k2 = represent_pt(law, f, t / lambda, l2grid)?;
    let scale = k2.max_abs();
    Ok(if scale == 0.0 { k1.max_abs() } else { k1.max_abs_diff(&k2) / scale })
}

/// `T(h) = Σ_k w_k K(h, λ_k)` for each quadrature; matrices for nodes shared
/// between quadratures are computed once. Requires `h` to pass
/// [`ideal_membership`] at `1e-10` relative to its t=0 I-norm.
pub fn averaged_operators(
    law: &GroupLaw,
    h: &GroupoidKernel,
    quads: &[LogQuadrature],
    l2grid: &GridSpec,
) -> Result<Vec<DenseMatrix>, NumericError> {
    check_law(law, h)?;
    check_l2(law, l2grid)?;
    let t0_scale = (0..h.xgrid.len()).map(|ix| h.fiber(ix, 0).l1_norm()).fold(0.0, f64::max);
    let rep = ideal_membership(h, 1e-10 * t0_scale.max(1.0));
    if !rep.passed {
        return Err(NumericError::NotInIdeal(rep.sup_mean));
    }
    let mut nodes: Vec<f64> = quads.iter().flat_map(|q| q.nodes.iter().copied()).collect();
    nodes.sort_by(f64::total_cmp);
    nodes.dedup_by(|a, b| (*a / *b - 1.0).abs() < 1e-12);
    let len = l2grid.len();
    let mut out: Vec<DenseMatrix> = quads.iter().map(|_| DenseMatrix::zeros(len, len)).collect();
    for &lam in &nodes {
        if lam > h.tgrid.t_max() * (1.0 + T_SNAP) {
            continue;
        }
        let k = represent_pt_auto(law, h, lam, l2grid)?;
        for (q, m) in quads.iter().zip(out.iter_mut()) {
            if let Some(pos) = q.nodes.iter().position(|&l| (l / lam - 1.0).abs() < 1e-12) {
                m.add_scaled(&k, q.weights[pos]);
            }
        }
    }
    Ok(out)
}

/// Single-cutoff form of [`averaged_operators`] with a midpoint rule.
pub fn averaged_operator(
    law: &GroupLaw,
    h: &GroupoidKernel,
    cutoff: &crate::numeric::CutoffFamily,
    n_lambda: usize,
    l2grid: &GridSpec,
) -> Result<DenseMatrix, NumericError> {
    let q = LogQuadrature::midpoint(cutoff, n_lambda)?;
    Ok(averaged_operators(law, h, &[q], l2grid)?.pop().unwrap())
}

/// Convergence record for widening cutoffs.
#[derive(Clone, Debug, Serialize)]
pub struct CutoffStep {
    pub a: f64,
    pub b: f64,
    pub norm: f64,
    /// `‖T_k - T_{k-1}‖`, absent for the first cutoff.
    pub diff_from_previous: Option<f64>,
}

pub fn cutoff_ladder(ops: &[DenseMatrix], cutoffs: &[crate::numeric::CutoffFamily]) -> Vec<CutoffStep> {
    ops.iter()
        .zip(cutoffs)
        .enumerate()
        .map(|(k, (m, c))| CutoffStep {
            a: c.a,
            b: c.b,
            norm: operator_norm(m),
            diff_from_previous: if k == 0 { None } else { Some(operator_norm(&m.sub(&ops[k - 1]))) },
        })
        .collect()
}

/// `σ_λ(f) * g*` evaluated on the grids of `g` through the substitution
/// `u = α_λ w`:
/// `(σ_λ f * G)(x,t,v) = Σ_u h_u f(x, t/λ, u) G(x α_{t/λ}(u), t, α_{1/λ}(u)⁻¹ v)`,
/// with `G = g*`. This avoids resampling `f` on a λ-dependent lattice.
pub fn zoomed_product_with_adjoint(
    law: &GroupLaw,
    f: &GroupoidKernel,
    g: &GroupoidKernel,
    lambda: f64,
) -> Result<GroupoidKernel, NumericError> {
    check_law(law, f)?;
    check_law(law, g)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(NumericError::NonPositive { name: "lambda", value: lambda });
    }
    let gs = groupoid_involution(law, g)?;
    let n = law.dim();
    let (nt, nv) = (gs.tgrid.len(), gs.vgrid.len());
    let hu = f.vgrid.cell_volume();
    let x_constant = (0..n).all(|j| gs.xgrid.is_constant_axis(j));
    let shrink = dilation_factors(law, 1.0 / lambda);
    let mut out = gs.like();
    out.values.par_chunks_mut(nv).enumerate().for_each(|(slab, dst)| {
        let (ix, it) = (slab / nt, slab % nt);
        let x = gs.xgrid.point(ix);
        let t = gs.tgrid.nodes[it];
        let s = t / lambda;
        // fiber f(x, t/λ, ·)
        let mut fib = vec![zero(); f.vgrid.len()];
        let mut any = false;
        f.xgrid.stencil(&x, |kx, wx| {
            f.tgrid.stencil(s, |kt, wt| {
                any = true;
                for (a, b) in fib.iter_mut().zip(f.slice(kx, kt)) {
                    *a += b * (wx * wt);
                }
            });
        });
        if !any {
            return;
        }
        let step = dilation_factors(law, s);
        let mut buf = vec![0.0; 2 * n];
        let mut u = vec![0.0; n];
        let mut au = vec![0.0; n];
        let mut xu = vec![0.0; n];
        let mut neg = vec![0.0; n];
        let mut z = vec![0.0; n];
        let mut v = vec![0.0; n];
        let mut xst: Vec<(usize, f64)> = Vec::with_capacity(1 << n);
        for (iu, fu) in fib.iter().enumerate() {
            if fu.norm_sqr() == 0.0 {
                continue;
            }
            f.vgrid.point_into(iu, &mut u);
            xst.clear();
            if x_constant {
                xst.push((0, 1.0));
            } else {
                for k in 0..n {
                    au[k] = u[k] * step[k];
                }
                law.multiply_into(&x, &au, &mut buf, &mut xu);
                if !gs.xgrid.stencil(&xu, |k, w| xst.push((k, w))) {
                    continue;
                }
            }
            for k in 0..n {
                neg[k] = -u[k] * shrink[k];
            }
            let c = fu * hu;
            for (iv, d) in dst.iter_mut().enumerate() {
                gs.vgrid.point_into(iv, &mut v);
                law.multiply_into(&neg, &v, &mut buf, &mut z);
                let mut acc = zero();
                for &(kx, wx) in &xst {
                    let sl = gs.slice(kx, it);
                    gs.vgrid.stencil(&z, |k, wv| acc += sl[k] * (wx * wv));
                }
                *d += c * acc;
            }
        }
    });
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayPoint {
    pub lambda: f64,
    pub i_norm: f64,
}

/// `(λ, ‖σ_λ(f) * g*‖_I)` for each λ.
pub fn decay_estimate_probe(law: &GroupLaw, f: &GroupoidKernel, g: &GroupoidKernel, lambdas: &[f64]) -> Result<Vec<DecayPoint>, NumericError> {
    lambdas
        .iter()
        .map(|&lambda| {
            let k = zoomed_product_with_adjoint(law, f, g, lambda)?;
            Ok(DecayPoint { lambda, i_norm: i_norm(law, &k)? })
        })
        .collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// `max_{|I| ≤ max(k,1)} sup (1+‖v‖)^{k(Q+1)} |∂_v^I g|` over all fibers,
/// derivatives by central differences.
pub fn groupoid_seminorm(law: &GroupLaw, g: &GroupoidKernel, k: u32) -> Result<f64, NumericError> {
    check_law(law, g)?;
    let alg = law.algebra();
    let q = alg.homogeneous_dimension_f64();
    let power = k as f64 * (q + 1.0);
    let order = k.max(1);
    let vg = &g.vgrid;
    let mut best = 0.0f64;
    for ix in 0..g.xgrid.len() {
        for it in 0..g.tgrid.len() {
            let fib = g.fiber(ix, it);
            for idx in harmonic::all_multi_indices(vg.dim(), order) {
                let mut d = fib.values.clone();
                for (axis, &m) in idx.iter().enumerate() {
                    for _ in 0..m {
                        d = harmonic::central_difference(vg, &d, axis);
                    }
                }
                let mut p = vec![0.0; vg.dim()];
                for (i, z) in d.iter().enumerate() {
                    if z.re.is_nan() {
                        continue;
                    }
                    vg.point_into(i, &mut p);
                    best = best.max((1.0 + quasi_norm(alg, &p)).powf(power) * z.norm());
                }
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize)]
pub struct MeanValueProbe {
    pub max_ratio: f64,
    pub half_sample_max: f64,
    pub stability_ratio: f64,
    pub seminorm: f64,
    pub samples: usize,
}

/// Largest sampled
/// `|g(x,t,vw) - g(x,t,v)| / (‖g‖_(k) (1+‖w‖)^{(k+2)(Q+1)} (1+‖v‖)^{-k(Q+1)} Σ_j ‖w‖^{q_j})`
/// with `(x,t)` on the grid and `v` uniform in the inner half of the v-box.
/// `w = α_s(u)` with `u` uniform in the inner quarter and `s` log-uniform in
/// `[1e-3, 1]`, since the ratio peaks as `w → 0`. Draws with `vw` outside
/// the box are skipped.
pub fn mean_value_ratio_probe(law: &GroupLaw, g: &GroupoidKernel, k: u32, samples: usize, seed: u64) -> Result<MeanValueProbe, NumericError> {
    let semi = groupoid_seminorm(law, g, k)?;
    let alg = law.algebra();
    let q = alg.homogeneous_dimension_f64();
    let weights = alg.weights_f64().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radii = g.vgrid.half_widths().to_vec();
    let draws: Vec<(usize, usize, Vec<f64>, Vec<f64>)> = (0..samples)
        .map(|_| {
            let ix = rng.random_range(0..g.xgrid.len());
            let it = rng.random_range(0..g.tgrid.len());
            let v: Vec<f64> = radii.iter().map(|r| rng.random_range(-r / 2.0..=r / 2.0)).collect();
            let s = 10f64.powf(-3.0 * rng.random::<f64>());
            let w: Vec<f64> = radii.iter().zip(&weights).map(|(r, qj)| s.powf(*qj) * rng.random_range(-r / 4.0..=r / 4.0)).collect();
            (ix, it, v, w)
        })
        .collect();
    let ratios: Vec<f64> = draws
        .par_iter()
        .map(|(ix, it, v, w)| {
            let x = g.xgrid.point(*ix);
            let t = g.tgrid.nodes[*it];
            let vw = law.multiply(v, w);
            if !g.vgrid.contains(&vw) {
                return 0.0;
            }
            let lhs = (g.eval(&x, t, &vw) - g.eval(&x, t, v)).norm();
            let nw = quasi_norm(alg, w);
            let nv = quasi_norm(alg, v);
            let rhs = semi
                * (1.0 + nw).powf((k as f64 + 2.0) * (q + 1.0))
                * (1.0 + nv).powf(-(k as f64) * (q + 1.0))
                * weights.iter().map(|qj| nw.powf(*qj)).sum::<f64>();
            if rhs == 0.0 {
                0.0
            } else {
                lhs / rhs
            }
        })
        .collect();
    let max_ratio = ratios.iter().fold(0.0f64, |m, &r| m.max(r));
    let half_sample_max = ratios[..samples / 2].iter().fold(0.0f64, |m, &r| m.max(r));
    Ok(MeanValueProbe {
        max_ratio,
        half_sample_max,
        stability_ratio: if half_sample_max > 0.0 { max_ratio / half_sample_max } else if max_ratio == 0.0 { 1.0 } else { f64::INFINITY },
        seminorm: semi,
        samples,
    })
}
