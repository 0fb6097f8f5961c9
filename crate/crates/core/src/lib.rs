//! Matrix and operator Sinkhorn scaling, viewed through quantum information
//! geometry.
//!
//! A completely positive map `Φ: C^{n×n} → C^{m×m}` is identified with its
//! Choi matrix, an `mn × mn` positive semidefinite block matrix whose
//! `(i, j)` block is `Φ(E_ij)`. Operator Sinkhorn scaling alternately fixes
//! the two partial traces of that matrix by congruence with geometric-mean
//! factors; every such step is the e-projection onto the corresponding
//! marginal constraint under the SLD metric. This crate provides
//!
//! - [`linalg`]: Hermitian eigendecomposition and everything built on it
//!   (matrix functions, Lyapunov solves, geometric means, partial traces);
//! - [`channels`]: Kraus maps, Choi matrices, congruence scaling and random
//!   density matrices;
//! - [`geometry`]: SLD, Bogoliubov–Kubo–Mori and congruence-invariant
//!   metrics, their e-geodesics and orthogonality certificates;
//! - [`divergences`]: classical and quantum relative entropies and the
//!   central difference quotient probe;
//! - [`scaling`]: classical and operator Sinkhorn, the Umegaki and Burg
//!   alternating projections, and capacity estimation;
//! - [`io`]: the JSON matrix format shared with the command line tool.

pub mod channels;
pub mod divergences;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod policy;
pub mod scaling;

pub use channels::{ChoiMatrix, DensityMatrix, Ensemble, KrausMap};
pub use divergences::DivergenceTag;
pub use error::{Error, Result};
pub use geometry::{ConstraintSet, MetricTag, TangentVector};
pub use linalg::{ComplexMatrix, HermitianMatrix, MatrixFunction, SpectralDecomposition, Subsystem, C64};
pub use policy::NumericPolicy;
pub use scaling::{Method, ScalingConfig, ScalingTrace, Targets};
