//! Reverse-mode automatic differentiation over dense `f64` arrays, with
//! exactly the layer set the SELD network needs.

mod adam;
mod attention;
pub mod checkpoint;
pub mod gradcheck;
mod graph;
mod gru;
pub(crate) mod linalg;
mod ops;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use graph::{Graph, Var};
pub use gru::GruDirection;
pub use ops::{BatchNormState, Mode};
