//! Complex-valued functions sampled on a [`GridSpec`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::reduce::pairwise_sum_complex;
use super::{Complex, GridSpec};
use crate::{FormatError, NumericError};

/// Decay class the producer of a sampled function vouches for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportClaim {
    Compact,
    Schwartz,
    Unspecified,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    pub grid: GridSpec,
    pub values: Vec<Complex>,
    pub support: SupportClaim,
}

impl SampledFunction {
    pub fn zeros(grid: GridSpec) -> Self {
        let values = vec![Complex::new(0.0, 0.0); grid.len()];
        SampledFunction { grid, values, support: SupportClaim::Compact }
    }

    pub fn from_values(grid: GridSpec, values: Vec<Complex>, support: SupportClaim) -> Result<Self, NumericError> {
        if values.len() != grid.len() {
            return Err(NumericError::Invalid(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(NumericError::Invalid("non-finite sample".into()));
        }
        Ok(SampledFunction { grid, values, support })
    }

    pub fn from_fn<F>(grid: GridSpec, support: SupportClaim, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex + Sync,
    {
        let d = grid.dim();
        let values = (0..grid.len())
            .into_par_iter()
            .map_init(|| vec![0.0; d], |p, i| {
                grid.point_into(i, p);
                f(p)
            })
            .collect();
        SampledFunction { grid, values, support }
    }

    pub fn from_real_fn<F>(grid: GridSpec, support: SupportClaim, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        Self::from_fn(grid, support, |x| Complex::new(f(x), 0.0))
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// Multilinear interpolation; zero outside the box.
    #[inline]
    pub fn eval(&self, x: &[f64]) -> Complex {
        let mut acc = Complex::new(0.0, 0.0);
        self.grid.stencil(x, |i, w| acc += self.values[i] * w);
        acc
    }

    /// Riemann sum `Π h_j Σ f`.
    pub fn integral(&self) -> Complex {
        pairwise_sum_complex(&self.values) * self.grid.cell_volume()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn l1_norm(&self) -> f64 {
        let abs: Vec<f64> = self.values.iter().map(|v| v.norm()).collect();
        super::reduce::pairwise_sum(&abs) * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v.norm_sqr()).collect();
        (super::reduce::pairwise_sum(&sq) * self.grid.cell_volume()).sqrt()
    }

    pub fn scale(&self, c: Complex) -> Self {
        SampledFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
            support: self.support,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, NumericError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, NumericError> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex, Complex) -> Complex) -> Result<Self, NumericError> {
        if !self.grid.same_as(&other.grid) {
            return Err(NumericError::GridMismatch);
        }
        let support = if self.support == other.support { self.support } else { SupportClaim::Unspecified };
        Ok(SampledFunction {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| op(*a, *b)).collect(),
            support,
        })
    }

    /// `sup |f - g|` over grid points.
    pub fn max_diff(&self, other: &Self) -> Result<f64, NumericError> {
        if !self.grid.same_as(&other.grid) {
            return Err(NumericError::GridMismatch);
        }
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).norm())))
    }

    /// Largest `max_j |x_j| / R_j` over points where `|f| > tol`; 0 for `f = 0`.
    pub fn support_fraction(&self, tol: f64) -> f64 {
        let mut p = vec![0.0; self.dim()];
        let mut worst = 0.0f64;
        for (i, v) in self.values.iter().enumerate() {
            if v.norm() > tol {
                self.grid.point_into(i, &mut p);
                for (j, x) in p.iter().enumerate() {
                    if !self.grid.is_constant_axis(j) {
                        worst = worst.max(x.abs() / self.grid.half_widths()[j]);
                    }
                }
            }
        }
        worst
    }

    /// Rejects functions whose support reaches past half the box.
    pub fn check_inner_support(&self) -> Result<(), NumericError> {
        let frac = self.support_fraction(1e-12 * self.sup_norm().max(f64::MIN_POSITIVE));
        if frac > 0.5 + 1e-9 {
            return Err(NumericError::Invalid(format!(
                "test function support reaches {:.3} of the box half-width (limit 0.5)",
                frac
            )));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let g = &self.grid;
        let mut out = format!("#sampled,{}", g.dim());
        for r in g.half_widths() {
            out.push_str(&format!(",{}", r));
        }
        for n in g.counts() {
            out.push_str(&format!(",{}", n));
        }
        out.push('\n');
        for (i, v) in self.values.iter().enumerate() {
            for k in g.multi_index(i) {
                out.push_str(&format!("{},", k));
            }
            out.push_str(&format!("{},{}\n", v.re, v.im));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, FormatError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| FormatError::Csv("empty input".into()))?;
        let fields: Vec<&str> = header.split(',').collect();
        if fields.first() != Some(&"#sampled") || fields.len() < 2 {
            return Err(FormatError::Csv("missing #sampled header".into()));
        }
        let n: usize = fields[1].parse().map_err(|_| FormatError::Csv("bad dimension".into()))?;
        if fields.len() != 2 + 2 * n {
            return Err(FormatError::Csv("header length does not match dimension".into()));
        }
        let radii = fields[2..2 + n]
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| FormatError::Csv("bad half-width".into()))?;
        let counts = fields[2 + n..]
            .iter()
            .map(|s| s.parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| FormatError::Csv("bad point count".into()))?;
        let grid = GridSpec::with_budget(radii, counts, usize::MAX).map_err(|e| FormatError::Csv(e.to_string()))?;
        let mut values = vec![Complex::new(0.0, 0.0); grid.len()];
        let mut seen = vec![false; grid.len()];
        for (lineno, line) in lines.enumerate() {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != n + 2 {
                return Err(FormatError::Csv(format!("row {}: expected {} columns", lineno + 1, n + 2)));
            }
            let idx = cols[..n]
                .iter()
                .map(|s| s.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| FormatError::Csv(format!("row {}: bad index", lineno + 1)))?;
            if idx.iter().zip(grid.counts()).any(|(i, c)| i >= c) {
                return Err(FormatError::Csv(format!("row {}: index out of range", lineno + 1)));
            }
            let re: f64 = cols[n].trim().parse().map_err(|_| FormatError::Csv(format!("row {}: bad value", lineno + 1)))?;
            let im: f64 =
                cols[n + 1].trim().parse().map_err(|_| FormatError::Csv(format!("row {}: bad value", lineno + 1)))?;
            let flat = grid.flat_index(&idx);
            values[flat] = Complex::new(re, im);
            seen[flat] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(FormatError::Csv("missing grid points".into()));
        }
        Ok(SampledFunction { grid, values, support: SupportClaim::Unspecified })
    }
}
