//! Finite-dimensional quantum measurement toolkit.
//!
//! - [`linalg`]: dense complex matrices, Hermitian eigendecomposition, PSD square roots.
//! - [`states`]: density operators, the form `<C, D>_rho = tr(rho C* D)`, Bloch states.
//! - [`observables`]: effects, real-valued observables, sharp versions, conjugates,
//!   joint observables and coarse graining.
//! - [`statistics`]: averages, deviations, correlations and the uncertainty
//!   equation/inequality with its equality diagnosis.
//! - [`instruments`]: instruments in operator-sum form, duals, sequential
//!   products and conditioned observables.
//! - [`cli`]: JSON schemas and the drivers behind the `qobs` binary.

pub mod cli;
pub mod error;
pub mod instruments;
pub mod linalg;
pub mod observables;
pub mod random;
pub mod states;
pub mod statistics;
pub mod tolerance;

pub use error::{Error, Result};
pub use instruments::{Instrument, OperationMap};
pub use linalg::{ComplexMatrix, EigenDecomposition};
pub use observables::{Effect, GeneralObservable, Outcome, Povm, RealObservable};
pub use states::{BlochVector, DensityOperator};
pub use statistics::UncertaintyReport;
pub use tolerance::Tolerances;
