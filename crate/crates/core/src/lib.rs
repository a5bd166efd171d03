//! Numerical toolkit for pseudo-Hermitian quantum mechanics in finite
//! dimension.
//!
//! The crate builds metric operators for quasi-Hermitian Hamiltonians,
//! moves states and observables between metric Hilbert spaces, decides when
//! two metric choices induce the same split of a system into subsystems,
//! reconstructs states tomographically in any metric space, checks
//! no-signalling, unravels Lindblad dynamics into quantum jumps and performs
//! the GNS construction for matrix algebras.
//!
//! Every routine is generic over the real scalar type through [`Real`];
//! the `*64` aliases at the crate root fix it to `f64`.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod gns;
pub mod linalg;
pub mod metric;
pub mod partition;
pub mod rng;
pub mod scalar;
pub mod tomography;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, EigenPair, Factor};
pub use metric::{Metric, MetricMap, MetricState};
pub use scalar::{Cx, Real};

pub type C64 = Cx<f64>;
pub type CMatrix64 = CMatrix<f64>;
pub type CMatrix32 = CMatrix<f32>;
pub type Metric64 = Metric<f64>;
pub type Metric32 = Metric<f32>;
pub type MetricState64 = MetricState<f64>;
pub type MetricMap64 = MetricMap<f64>;
pub type LindbladModel64 = dynamics::LindbladModel<f64>;
pub type OperatorFrame64 = tomography::OperatorFrame<f64>;
pub type GnsRepresentation64 = gns::GnsRepresentation<f64>;

/// Default relative tolerance used throughout the toolkit.
pub const DEFAULT_TOL: f64 = 1e-10;
