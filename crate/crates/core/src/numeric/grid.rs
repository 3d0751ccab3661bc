//! Uniform grids centred at the origin.

use serde::{Deserialize, Serialize};

use crate::NumericError;

/// Points `-R_j + i h_j`, `i = 0..N_j`, with `h_j = 2R_j/(N_j - 1)`; flat
/// index is row-major (last axis fastest). `N_j` is odd so 0 is a grid point.
///
/// An axis with `N_j = 1` is a *constant axis*: it holds the single point 0,
/// interpolation ignores the coordinate along it, and its cell width is `2R_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct GridSpec {
    half_widths: Vec<f64>,
    counts: Vec<usize>,
    #[serde(skip)]
    spacing: Vec<f64>,
    #[serde(skip)]
    strides: Vec<usize>,
}

#[derive(Deserialize)]
struct RawGrid {
    half_widths: Vec<f64>,
    counts: Vec<usize>,
}

impl TryFrom<RawGrid> for GridSpec {
    type Error = NumericError;
    fn try_from(raw: RawGrid) -> Result<Self, NumericError> {
        GridSpec::with_budget(raw.half_widths, raw.counts, usize::MAX)
    }
}

const SNAP: f64 = 1e-9;

impl GridSpec {
    pub const DEFAULT_BUDGET: usize = 8_000_000;

    pub fn new(half_widths: Vec<f64>, counts: Vec<usize>) -> Result<Self, NumericError> {
        Self::with_budget(half_widths, counts, Self::DEFAULT_BUDGET)
    }

    pub fn with_budget(half_widths: Vec<f64>, counts: Vec<usize>, budget: usize) -> Result<Self, NumericError> {
        if half_widths.len() != counts.len() {
            return Err(NumericError::DimensionMismatch { expected: counts.len(), got: half_widths.len() });
        }
        for (axis, (&r, &n)) in half_widths.iter().zip(&counts).enumerate() {
            if n == 0 || n % 2 == 0 {
                return Err(NumericError::EvenAxis { axis, n });
            }
            if !(r > 0.0 && r.is_finite()) {
                return Err(NumericError::BadHalfWidth { axis });
            }
        }
        let points = counts.iter().try_fold(1usize, |a, &n| a.checked_mul(n)).unwrap_or(usize::MAX);
        if points > budget {
            return Err(NumericError::OverBudget { points, budget });
        }
        let mut g = GridSpec { half_widths, counts, spacing: Vec::new(), strides: Vec::new() };
        g.finish();
        Ok(g)
    }

    /// Same half-width and count on every axis.
    pub fn uniform(dim: usize, half_width: f64, count: usize) -> Result<Self, NumericError> {
        Self::new(vec![half_width; dim], vec![count; dim])
    }

    fn finish(&mut self) {
        self.spacing = self
            .half_widths
            .iter()
            .zip(&self.counts)
            .map(|(&r, &n)| if n == 1 { 2.0 * r } else { 2.0 * r / (n - 1) as f64 })
            .collect();
        let d = self.counts.len();
        self.strides = vec![1; d];
        for j in (0..d.saturating_sub(1)).rev() {
            self.strides[j] = self.strides[j + 1] * self.counts[j + 1];
        }
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn half_widths(&self) -> &[f64] {
        &self.half_widths
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Riemann weight `Π h_j`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn is_constant_axis(&self, j: usize) -> bool {
        self.counts[j] == 1
    }

    pub fn axis_coord(&self, j: usize, i: usize) -> f64 {
        if self.counts[j] == 1 {
            0.0
        } else {
            -self.half_widths[j] + i as f64 * self.spacing[j]
        }
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for j in (0..self.dim()).rev() {
            idx[j] = flat % self.counts[j];
            flat /= self.counts[j];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn point_into(&self, flat: usize, out: &mut [f64]) {
        let mut rest = flat;
        for j in (0..self.dim()).rev() {
            let i = rest % self.counts[j];
            rest /= self.counts[j];
            out[j] = self.axis_coord(j, i);
        }
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.dim()];
        self.point_into(flat, &mut p);
        p
    }

    /// Index of the grid point `-x` (the grid is symmetric).
    pub fn mirror_index(&self, flat: usize) -> usize {
        let idx = self.multi_index(flat);
        let m: Vec<usize> = idx.iter().zip(&self.counts).map(|(i, n)| n - 1 - i).collect();
        self.flat_index(&m)
    }

    pub fn same_as(&self, other: &GridSpec) -> bool {
        self.counts == other.counts
            && self
                .half_widths
                .iter()
                .zip(&other.half_widths)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0))
    }

    /// Calls `visit(flat, weight)` for the multilinear interpolation stencil of
    /// `x`. Returns `false` (without visiting) if `x` lies outside the box.
    /// Coordinates within `1e-9` cells of a grid line snap onto it.
    #[inline]
    pub fn stencil<F: FnMut(usize, f64)>(&self, x: &[f64], mut visit: F) -> bool {
        const MAX: usize = 16;
        let d = self.dim();
        debug_assert!(d <= MAX);
        let mut base = 0usize;
        let mut active_stride = [0usize; MAX];
        let mut active_t = [0.0f64; MAX];
        let mut k = 0usize;
        for j in 0..d {
            let n = self.counts[j];
            if n == 1 {
                continue;
            }
            let mut u = (x[j] + self.half_widths[j]) / self.spacing[j];
            let r = u.round();
            if (u - r).abs() < SNAP {
                u = r;
            }
            let top = (n - 1) as f64;
            if !(0.0..=top).contains(&u) {
                return false;
            }
            let mut i0 = u.floor() as usize;
            if i0 >= n - 1 {
                i0 = n - 2;
            }
            let t = u - i0 as f64;
            base += i0 * self.strides[j];
            if t > 0.0 {
                active_stride[k] = self.strides[j];
                active_t[k] = t;
                k += 1;
            }
        }
        for mask in 0..(1usize << k) {
            let mut idx = base;
            let mut w = 1.0;
            for a in 0..k {
                if mask & (1 << a) != 0 {
                    idx += active_stride[a];
                    w *= active_t[a];
                } else {
                    w *= 1.0 - active_t[a];
                }
            }
            if w != 0.0 {
                visit(idx, w);
            }
        }
        true
    }

    /// Whether `x` lies in the closed box (constant axes accept anything).
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.half_widths)
            .zip(&self.counts)
            .all(|((xi, r), &n)| n == 1 || xi.abs() <= r * (1.0 + 1e-12))
    }
}
