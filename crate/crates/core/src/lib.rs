//! Logistic regression and small feedforward networks, side by side.

pub mod cli;
pub mod data;
pub mod doc;
pub mod config;
pub mod error;
pub mod eval;
pub mod glm;
pub mod interpret;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod plot;
pub mod rng;
pub mod sim;
pub mod tables;

pub use data::{Column, ColumnKind, Dataset};
pub use error::{Error, Result};
pub use model::ProbabilityModel;
