//! Numerical analysis on a graded group: sampled functions on uniform grids in
//! exponential coordinates, dilation averaging, convolution operators.

pub mod cutoff;
pub mod grid;
pub mod harmonic;
pub mod operator;
pub mod quadrature;
pub mod reduce;
pub mod sampled;

pub use cutoff::CutoffFamily;
pub use grid::GridSpec;
pub use operator::{operator_norm, DenseMatrix, Orientation};
pub use quadrature::LogQuadrature;
pub use sampled::{SampledFunction, SupportClaim};

pub type Complex = num_complex::Complex64;
