//! Potential theory of rational maps on the projective line over complex,
//! p-adic, and Laurent-series fields.

pub mod berkline;
pub mod equidist;
pub mod error;
mod expr;
pub mod poly;
pub mod polyroots;
pub mod potential;
pub mod projline;
pub mod ratmap;
pub mod scalar;

pub use error::{Error, Result};
