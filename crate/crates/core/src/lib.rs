//! Simulation engines for a driven three-level "V" atom whose two optical
//! transitions couple to the two propagation directions of a waveguide that
//! is terminated by a distant mirror.
//!
//! The mirror folds one propagation direction back onto the other, so the
//! atom interferes with its own emission after a round-trip delay `tau`.
//! Three regimes are covered, each with its own solver:
//!
//! - `tau -> 0` (Markov): a Lindblad master equation with a collective jump
//!   operator and a feedback-induced coherent exchange term ([`lindblad`]).
//! - a lumped model where the two directions are replaced by two cavity
//!   modes that hybridize through the mirror ([`cavity`]).
//! - finite `tau`: a quantum stochastic evolution over discrete time bins of
//!   the waveguide field, propagated as a matrix-product state so the bin
//!   written at step `k` can come back to the atom at step `k + m`
//!   ([`mps`]).
//!
//! Closed-form results about the dark (non-emitting) steady states that the
//! feedback stabilizes live in [`dark`]; the cross-solver acceptance checks
//! used by the test suite and the `sim validate` command live in [`suite`].
//!
//! Internally all rates are expressed in units of the guided decay rate
//! `gamma` (i.e. `gamma = 1` unless stated otherwise) and time in units of
//! `1/gamma`.

pub mod cavity;
pub mod dark;
pub mod error;
pub mod linalg;
pub mod lindblad;
pub mod mps;
pub mod operators;
pub mod params;
pub mod suite;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec};
pub use lindblad::{Jump, LindbladModel, Liouvillian, Observables, Trajectory};
pub use mps::{TensorTrainState, TimeBinConfig};
pub use params::SystemParams;

pub use cavity::CavityConfig;
pub use dark::DarkStatePrediction;
