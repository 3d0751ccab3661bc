//! Quadrature for `∫ χ(λ) F(λ) dλ/λ`.

use serde::Serialize;

use super::CutoffFamily;
use crate::NumericError;

/// Nodes `λ_k` and weights `χ(λ_k)·Δ` of a midpoint rule in `log λ`.
/// Nodes with zero weight are dropped.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogQuadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LogQuadrature {
    /// `n` midpoint nodes spread over the cutoff's support.
    pub fn midpoint(cutoff: &CutoffFamily, n: usize) -> Result<Self, NumericError> {
        if n == 0 {
            return Err(NumericError::NonPositive { name: "n_lambda", value: 0.0 });
        }
        let (lo, hi) = cutoff.support();
        let (l0, l1) = (lo.ln(), hi.ln());
        let step = (l1 - l0) / n as f64;
        let nodes = (0..n).map(|k| (l0 + (k as f64 + 0.5) * step).exp());
        Ok(Self::weighted(cutoff, nodes, step))
    }

    /// Nodes `exp((k + 1/2) step)`, `k ∈ ℤ`, restricted to the cutoff's
    /// support. Two cutoffs share every node they both use, so differences
    /// between widening cutoffs involve only the transition zones.
    pub fn anchored(cutoff: &CutoffFamily, step: f64) -> Result<Self, NumericError> {
        if !(step > 0.0) {
            return Err(NumericError::NonPositive { name: "log step", value: step });
        }
        let (lo, hi) = cutoff.support();
        let k0 = (lo.ln() / step - 0.5).floor() as i64;
        let k1 = (hi.ln() / step - 0.5).ceil() as i64;
        let nodes = (k0..=k1).map(|k| ((k as f64 + 0.5) * step).exp());
        Ok(Self::weighted(cutoff, nodes, step))
    }

    fn weighted(cutoff: &CutoffFamily, nodes: impl Iterator<Item = f64>, step: f64) -> Self {
        let mut out = LogQuadrature { nodes: Vec::new(), weights: Vec::new() };
        for l in nodes {
            let w = cutoff.eval(l) * step;
            if w > 0.0 {
                out.nodes.push(l);
                out.weights.push(w);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.iter().map(|(l, w)| w * f(l)).sum()
    }
}
