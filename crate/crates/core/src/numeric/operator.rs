//! Dense complex matrices and spectral-norm estimates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::reduce::{pairwise_sum, pairwise_sum_complex};
use super::Complex;

/// Which side of the convolution the kernel sits on: `KernelRight` builds
/// `ψ ↦ ψ * u`-type matrices `h·u(y⁻¹x)`, `KernelLeft` builds `h·u(x y⁻¹)`-type
/// matrices, i.e. `ψ ↦ u * ψ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    #[default]
    KernelRight,
    KernelLeft,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![Complex::new(0.0, 0.0); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Complex + Sync) -> Self {
        let mut m = Self::zeros(rows, cols);
        m.data.par_chunks_mut(cols.max(1)).enumerate().for_each(|(i, row)| {
            for (j, e) in row.iter_mut().enumerate() {
                *e = f(i, j);
            }
        });
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Complex] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matvec(&self, v: &[Complex]) -> Vec<Complex> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .into_par_iter()
            .map(|i| {
                let prods: Vec<Complex> = self.row(i).iter().zip(v).map(|(a, b)| a * b).collect();
                pairwise_sum_complex(&prods)
            })
            .collect()
    }

    /// `M^H v`.
    pub fn adjoint_matvec(&self, v: &[Complex]) -> Vec<Complex> {
        assert_eq!(v.len(), self.rows);
        (0..self.cols)
            .into_par_iter()
            .map(|j| {
                let prods: Vec<Complex> = (0..self.rows).map(|i| self.get(i, j).conj() * v[i]).collect();
                pairwise_sum_complex(&prods)
            })
            .collect()
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &Self, c: f64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.par_iter_mut().zip(other.data.par_iter()).for_each(|(a, b)| *a += b * c);
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn frobenius(&self) -> f64 {
        let sq: Vec<f64> = self.data.iter().map(|v| v.norm_sqr()).collect();
        pairwise_sum(&sq).sqrt()
    }
}

fn norm(v: &[Complex]) -> f64 {
    let sq: Vec<f64> = v.iter().map(|z| z.norm_sqr()).collect();
    pairwise_sum(&sq).sqrt()
}

pub const POWER_ITERATIONS: usize = 200;
pub const POWER_TOLERANCE: f64 = 1e-10;

/// Largest singular value by power iteration on `M^H M`, seeded with the
/// normalized all-ones vector.
pub fn operator_norm(m: &DenseMatrix) -> f64 {
    if m.cols == 0 || m.rows == 0 {
        return 0.0;
    }
    let mut v = vec![Complex::new(1.0 / (m.cols as f64).sqrt(), 0.0); m.cols];
    let mut sigma = 0.0;
    let mut reseeded = false;
    for _ in 0..POWER_ITERATIONS {
        let mv = m.matvec(&v);
        let next = norm(&mv);
        if next == 0.0 {
            if sigma == 0.0 && !reseeded {
                // the seed is in the kernel; retry once with a fixed ramp
                reseeded = true;
                let ramp: Vec<Complex> = (0..m.cols).map(|j| Complex::new(1.0 + j as f64, 0.0)).collect();
                let n = norm(&ramp);
                v = ramp.into_iter().map(|z| z / n).collect();
                continue;
            }
            return 0.0;
        }
        let w = m.adjoint_matvec(&mv);
        let nw = norm(&w);
        if nw == 0.0 {
            return next;
        }
        v = w.into_iter().map(|z| z / nw).collect();
        let done = sigma > 0.0 && ((next - sigma) / next).abs() < POWER_TOLERANCE;
        sigma = next;
        if done {
            break;
        }
    }
    sigma
}
