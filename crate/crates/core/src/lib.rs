//! Exact counting of the eigenvalues of a regular generalized eigenproblem
//! `A x = λ B x` inside a disk.
//!
//! The count comes from Gauss-Legendre contour quadrature of the spectral
//! projector: a randomized subspace search bounds the count from above and
//! yields a basis `U₁`; the eigenvalues of `M = U₁^* Q̃ U₁` are filter values
//! whose real parts exceed ½ exactly for the eigenvalues inside the circle.
//! The same machinery drives a subspace eigensolver that stops once it has
//! found that many eigenpairs.

// `!(x > 0.0)` is used on purpose to reject NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod counter;
pub mod eigensolver;
pub mod error;
pub mod matrix;
pub mod oracle;
pub mod projector;
pub mod quadrature;
pub mod search;

#[cfg(test)]
pub(crate) mod testutil;

pub use counter::{
    build_m, count_eigs, count_eigs_with_context, count_from_search, CountConfig, CountContext, CountReport, Timings,
    Warning, DEFAULT_DELTA_BAND,
};
pub use eigensolver::{refine_eigenpairs, residual, EigenpairSet, EigsConfig};
pub use error::{Error, Result};
pub use matrix::{DenseMatrix, SparseMatrix, Symmetry};
pub use num_complex::Complex64;
pub use projector::{apply_filtered, factorize_nodes, NodeFactorizations, Pencil, ProjectorOptions, DEFAULT_DENSE_CAP};
pub use quadrature::{filter_value, gauss_legendre, map_to_circle, ContourRule, Disk, FilterValue};
pub use search::{sample_gaussian, search, search_with, trace_estimate, trace_mean, SearchConfig, SearchResult};
