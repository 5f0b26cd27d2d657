pub mod error;
pub mod experiments;
pub mod format;
pub mod lexgen;
pub mod lexicon;
pub mod regress;
pub mod stats;
pub mod synthetic;
pub mod util;

pub use error::{Error, Result};
