//! Information extraction from semi-structured text with a dynamic Bayesian
//! network over token tags, slot memory and document segments.

pub mod config;
pub mod corpus;
pub mod eval;
pub mod error;
pub mod features;
pub mod inference;
pub mod learning;
pub mod model;
pub mod pipeline;

pub use error::{Error, Result};
