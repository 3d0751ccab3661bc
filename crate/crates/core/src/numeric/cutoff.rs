//! Smooth plateau cutoffs on `(0, ∞)`.

use serde::{Deserialize, Serialize};

use crate::NumericError;

/// `χ ≡ 1` on `[a, b]`, `χ ≡ 0` outside `[a/w, b·w]`, with a quintic
/// smoothstep in `log λ` across each transition. With `b = 1/a` the cutoff
/// satisfies `χ(1/λ) = χ(λ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffFamily {
    pub a: f64,
    pub b: f64,
    pub w: f64,
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (t * (6.0 * t - 15.0) + 10.0)
}

impl CutoffFamily {
    pub fn new(a: f64, b: f64) -> Result<Self, NumericError> {
        Self::with_width(a, b, 2.0)
    }

    pub fn with_width(a: f64, b: f64, w: f64) -> Result<Self, NumericError> {
        if !(a > 0.0 && a < 1.0 && b > 1.0 && b.is_finite()) {
            return Err(NumericError::BadCutoff { a, b });
        }
        if !(w > 1.0 && w.is_finite()) {
            return Err(NumericError::NonPositive { name: "transition width - 1", value: w - 1.0 });
        }
        Ok(CutoffFamily { a, b, w })
    }

    /// Plateau `[r^{-1}, r]`.
    pub fn symmetric(r: f64) -> Result<Self, NumericError> {
        Self::new(1.0 / r, r)
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        if !(lambda > 0.0) {
            return 0.0;
        }
        let lw = self.w.ln();
        if lambda < self.a {
            smoothstep((lambda / self.a).ln() / lw + 1.0)
        } else if lambda > self.b {
            smoothstep(1.0 - (lambda / self.b).ln() / lw)
        } else {
            1.0
        }
    }

    /// Closed interval outside which `χ` vanishes.
    pub fn support(&self) -> (f64, f64) {
        (self.a / self.w, self.b * self.w)
    }

    /// `∫ χ(λ) dλ/λ`.
    pub fn log_mass(&self) -> f64 {
        // each transition contributes half its log-length
        (self.b / self.a).ln() + self.w.ln()
    }
}
