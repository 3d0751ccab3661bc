//! Deterministic reductions and thread configuration.
//!
//! Parallel loops produce per-item values in index order; sums are then taken
//! by [`pairwise_sum`] in a fixed tree order, so results do not depend on the
//! number of worker threads.

use std::sync::Once;

use super::Complex;

const LEAF: usize = 32;

pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn pairwise_sum_complex(xs: &[Complex]) -> Complex {
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum_complex(&xs[..mid]) + pairwise_sum_complex(&xs[mid..])
}

static INIT: Once = Once::new();

/// Caps the global rayon pool at `CARNOT_THREADS` if that variable is set to
/// a positive integer. Safe to call repeatedly; only the first call acts.
pub fn configure_threads() {
    INIT.call_once(|| {
        if let Some(n) = std::env::var("CARNOT_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()) {
            if n > 0 {
                // a pool may already exist (e.g. in tests); that is fine
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_exact_sum() {
        let xs: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 500500.0);
        let cs: Vec<Complex> = (0..100).map(|i| Complex::new(i as f64, -1.0)).collect();
        assert_eq!(pairwise_sum_complex(&cs), Complex::new(4950.0, -100.0));
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
