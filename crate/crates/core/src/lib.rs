//! Phase-space quantum reference frames as covariant phase-space
//! observables, evaluated at the level of measurement statistics.
//!
//! Units with ħ = 1 throughout; the vacuum has position and momentum
//! variance 1/2.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod cvstate;
pub mod error;
pub mod measure;
pub mod phasespace;
pub mod relativize;

pub use audit::{Scenario, URReport};
pub use cvstate::{MixedState, PureState, StateSpec};
pub use error::{Error, Result};
pub use measure::{GridSpec1D, Measure1D, Measure2D};
pub use phasespace::{ApparatusState, PhaseSpaceWindow};
pub use relativize::{FrameSpec, FrameState};
