//! Numerical laboratory for the `H^p` scale of complete Pick spaces on finite
//! point sets.
//!
//! Everything here works on a finite restriction `k|_V` of a kernel: a
//! function on `V` is its vector of values, the Hilbert norm is
//! `‖f‖² = f* K⁻¹ f`, and the weak product, Hankel and Hardy-scale quantities
//! are computed from the Gram matrix `K`.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`numerics`] | Hermitian eigensolver, SVD, PSD square roots |
//! | [`kernels`] | point sets, kernel models, Gram matrices, `d_k`, Pick embedding |
//! | [`weak_product`] | `H¹ = M ⊙ M` norms via nuclear-norm minimization |
//! | [`hankel`] | Hankel operators and Han norms |
//! | [`hp_scale`] | Hardy quadrature and pointwise bound chains |
//! | [`sequences`] | separation, Carleson constants, counterexample families |
//! | [`battery`] | the seeded acceptance battery |

pub mod battery;
pub mod estimate;
pub mod hankel;
pub mod hp_scale;
pub mod io;
pub mod kernels;
pub mod numerics;
pub mod sequences;
pub mod weak_product;

pub use estimate::NormEstimate;
pub use num_complex::Complex64;

/// Values of a function on a point set, in point order.
pub type FuncValues = nalgebra::DVector<Complex64>;

/// Default seed for every randomized experiment.
pub const DEFAULT_SEED: u64 = 20240501;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Numerics(#[from] numerics::NumericsError),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("point variant does not match kernel model: {0}")]
    PointMismatch(String),
    #[error("points too close: condition number {condition:.3e} exceeds {limit:.1e}")]
    IllConditioned { condition: f64, limit: f64 },
    #[error("kernel vanishes at ({0}, basepoint); cannot normalize")]
    VanishingKernel(String),
    #[error("not a complete Pick kernel on this set: 1 - 1/K has eigenvalue {eigenvalue:.3e}")]
    NotCompletePick { eigenvalue: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("index {index} out of range for {len} points")]
    Index { index: usize, len: usize },
    #[error("solver did not converge: {0}")]
    NotConverged(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
