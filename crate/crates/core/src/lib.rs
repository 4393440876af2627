pub mod analytics;
pub mod chains;
pub mod containers;
pub mod counting;
pub mod error;
pub mod exact;
pub mod flows;
pub mod grid;
pub mod matching;
pub mod rng;
pub mod saturation;
pub mod cli;

pub use error::{Error, Result};
pub use grid::{GridShape, LevelProfile, Point, VertexSet};
