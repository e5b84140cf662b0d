//! Multiplicity vectors, Wick products, symmetric and traceless tensors,
//! pair-partition expansions and Monte Carlo chaos-kernel extraction.
//!
//! A chaos element of order `q` is written `Σ_{i ∈ [N]^q} K(i) :γ^{i_1}···γ^{i_q}:`
//! with a symmetric kernel `K`; two such elements satisfy
//! `E[XY] = q! ⟨K_X, K_Y⟩`. The isometry is the Bombieri–Weyl inner product
//! on homogeneous polynomials, which is why traceless kernels (harmonic
//! polynomials) play the role of spherical harmonics.

mod bruteforce;
mod tensor;
mod wick;

pub use bruteforce::{
    averaging_check, chaos_tensor_bruteforce, Estimate, TensorEstimate, MAX_BRUTEFORCE_DIM, MAX_BRUTEFORCE_ORDER,
};
pub use tensor::{multiplicity_vector, MultiIndex, SymmetricTensor, TensorLayout};
pub use wick::{
    harmonic_correspondence, max_contraction, pair_partition_count, pair_partitions, product_to_wick,
    tensor_inner_isometry, traceless_project, wick_covariance, wick_eval, wick_identity_check, PairPartition,
    MAX_PARTITION_ORDER,
};
