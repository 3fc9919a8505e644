//! Følner approximation of kernel dimensions for matrices over the model
//! algebras.
//!
//! For `T ∈ M_k(𝒜)` and a window `(P, S)` with `T(S^k) ⊆ P^k`, the restriction
//! `T|_{S^k} : S^k → P^k` is a finite rectangular matrix. Its relative kernel
//! and range dimensions
//!
//! ```text
//! a_n = dim_N ker(T|_{S^k}) / dim_N P,   b_n = dim_N rg(T|_{S^k}) / dim_N P
//! ```
//!
//! satisfy `a_n + b_n = k · dim_N S / dim_N P`, and `a_n → dim_M ker T` along a
//! Følner sequence. No rate of convergence is known, so the engine reports the
//! whole sequence.

mod certificate;
mod compress;
mod estimate;
mod operator;
mod spectral;

pub use certificate::{default_probes, verify_folner_certificate, CertificateReport, Clause};
pub use compress::{compress, kernel_range_dims, CompressedOperator, KernelRange};
pub use estimate::{estimate_vn_kernel_dim, phi_deviation, DimensionReport, EstimateOptions, KernelEstimate};
pub use operator::EquivariantOperator;
pub use spectral::{spectral_density, spectral_measure, spectral_moments, Histogram, Moments};
