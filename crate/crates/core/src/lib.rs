pub mod coding;
pub mod conditions;
pub mod error;
pub mod expander;
pub mod io;
pub mod linalg;
pub mod poly;
pub mod sim;

pub use error::{Error, Result};
