pub mod dynamics;
pub mod error;
pub mod exact;
pub mod graph;
pub mod lamp;
pub mod montecarlo;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};
