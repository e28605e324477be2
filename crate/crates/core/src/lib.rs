//! Spectral, resolvent and energy-decay toolkit for the one-dimensional
//! wave equation on `[-1, 0]` coupled to a heat equation on `[0, 1]`.

pub mod characteristic;
pub mod cli;
pub mod discretization;
pub mod domain;
pub mod error;
pub mod freq;
pub mod linalg;
pub mod plot;
pub mod quadrature;
pub mod resolvent;
pub mod simulator;
pub mod spectrum;
pub mod state;
pub mod verify;

pub use characteristic::{BoundaryVariant, Characteristic};
pub use error::{Error, Result};
pub use freq::{ComplexFrequency, Scaled, C64};
