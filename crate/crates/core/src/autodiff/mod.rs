//! Minimal reverse-mode automatic differentiation over dense matrices.
//!
//! A [`Tape`] owns every intermediate value of one forward pass. Trainable
//! tensors live in a [`ParamStore`] outside the tape and are bound as
//! leaves at the start of each pass.

mod adam;
pub mod gradcheck;
mod params;
mod tape;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use params::{BoundParams, ParamId, ParamStore};
pub use tape::{Reduction, Tape, Var};
