pub mod compare;
pub mod detect;
pub mod error;
pub mod hrv;
pub mod io;
pub mod signal;
pub mod synth;

pub use error::{Error, Result};
