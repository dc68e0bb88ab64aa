//! Numerical workbench for modified Riesz potentials
//! `I_φ f(x) = ∫ |f(y)| φ(|x-y|)^{1-n} dy`, the Hardy-Littlewood maximal
//! operator, Orlicz/Luxemburg norms and Sobolev-Poincaré type embeddings on
//! uniform grids.
//!
//! Modules map onto the layers of the workbench:
//!
//! - [`orlicz`]: N-functions, Δ2 estimates and Luxemburg norms.
//! - [`kernels`]: the kernel shape φ, the dominating series `h` and the
//!   compatibility condition linking `H`, `φ`, `h` and `δ`.
//! - [`fields`]: uniform grids, domain masks, finite differences, integrals.
//! - [`potentials`]: discrete potential, maximal function and the two
//!   near/far splitting checks.
//! - [`domains`]: balls, cubes and the mushroom domain with its
//!   counterexample sequence.
//! - [`harness`]: experiment drivers, JSON configs and reports.

pub mod domains;
pub mod error;
pub mod fields;
pub mod harness;
pub mod kernels;
pub mod orlicz;
pub mod potentials;
pub mod scan;

pub use error::{Error, Result};
pub use fields::{DomainGeometry, Grid, GridField, MaskedGrid};
pub use kernels::{DeltaMap, PhiKernel};
pub use orlicz::{NormResult, OrliczFunction};
pub use scan::{LogGrid, ScalarFn, SupEstimate};
