//! Følner-window approximation of von Neumann dimensions over amenable
//! group algebras, twisted group algebras, crossed products and UHF towers.
//!
//! Computations are generic over [`Scalar`]: [`ExactScalar`] (Gaussian
//! rationals, exact answers) and [`FloatScalar`] (`Complex<f64>`).

pub mod coefficient;
pub mod dimension;
pub mod engine;
pub mod error;
pub mod group;
pub mod io;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod scalar;

pub use coefficient::{CoefficientElement, MultiMatrixAlgebra};
pub use engine::{
    compress, estimate_vn_kernel_dim, kernel_range_dims, spectral_density, spectral_moments, verify_folner_certificate,
    CertificateReport, DimensionReport, EquivariantOperator, EstimateOptions,
};
pub use error::{Error, Result};
pub use model::{folner_window, AlgebraElement, Coordinate, FolnerWindow, Model, ModelKind};
pub use group::{FiniteGroup, Group, Permutation, PermutationAction, Word};
pub use scalar::{Backend, GaussianRational, Scalar, Turns};

pub use num_rational::BigRational;
pub type ExactScalar = GaussianRational;
pub type FloatScalar = num_complex::Complex64;
