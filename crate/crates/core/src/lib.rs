pub mod bell;
pub mod decomposition;
pub mod error;
pub mod linalg;
pub mod povm;
pub mod sdp;
pub mod steering;
pub mod threshold;
pub mod tolerance;

pub use error::{Error, Result};
