//! Determinantal point processes defined by projection and contraction
//! kernels on bounded-degree graphs.
//!
//! The crate covers the full pipeline from graph construction to entropy
//! estimation:
//!
//! - [`graph`]: finite multigraphs, deterministic families, rooted balls,
//!   line graphs, and oriented incidence matrices.
//! - [`kernels`]: kernel construction and validation (transfer currents,
//!   dilations of contractions, label restriction, spectral summaries).
//! - [`conditioning`]: conditional kernels for conditioning elements in or
//!   out, and the independence / permitted-pair predicates.
//! - [`sampling`]: exact sequential sampling, inclusion probabilities, full
//!   pmf enumeration, and a Wilson spanning-tree sampler.
//! - [`entropy`]: Shannon entropy of determinantal measures, exact and
//!   Monte-Carlo, plus local estimators and the return-probability formula
//!   for tree entropy.
//! - [`bsstats`]: decorated-ball statistics, the tightness profile, and
//!   convergence diagnostics across graph-kernel sequences.

pub mod bsstats;
pub mod conditioning;
pub mod entropy;
mod error;
pub mod graph;
pub mod io;
pub mod kernels;
pub mod rng;
pub mod sampling;

pub use error::{Error, Result};
pub use graph::{Family, Graph, IncidenceMatrix, RootedBall};
pub use kernels::{GroundSet, Kernel, KernelClass, SpectralSummary};
