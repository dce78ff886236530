pub mod cipher;
pub mod cli;
pub mod datagen;
pub mod error;
pub mod model;
pub mod objective;
pub mod prior;
pub mod surface;
pub mod trainer;

pub use error::{Error, Result};
