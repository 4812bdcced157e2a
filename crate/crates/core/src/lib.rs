#![allow(clippy::needless_range_loop, clippy::should_implement_trait)]

pub mod cli;
pub mod dist;
pub mod engine;
pub mod error;
pub mod graph;
pub mod modmath;
pub mod oracles;
pub mod quotient;
pub mod reach;
pub mod series;
pub mod smalldet;

pub use error::{Error, Result};
