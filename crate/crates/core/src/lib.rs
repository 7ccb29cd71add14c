pub mod concentration;
pub mod error;
pub mod limit_law;
pub mod linalg;
pub mod measure;
pub mod quad;
pub mod quadform;
pub mod rmt;
pub mod rng;
pub mod sampler;

pub use error::{Error, Result};
