//! Sturmian maximizing measures for balanced pairs of 2×2 matrices.

pub mod cli;
pub mod error;
pub mod family;
pub mod lyapunov;
pub mod mat2;
pub mod optimizer;
pub mod pairs;
pub mod verify;
pub mod words;

pub use error::{Error, Result};
