pub mod autodiff;
pub mod error;
pub mod features;
pub mod gradsuite;
pub mod harness;
pub mod kv;
pub mod labels;
pub mod losses;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod synth;
pub mod tensor;

pub use error::{Result, SeldError};
pub use tensor::Tensor;
