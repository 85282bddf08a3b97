//! Composition operators on the Dirichlet space: truncated series, symbol
//! catalog, Gram matrices, preimage counting and operator norms.

pub mod cli;
pub mod config;
pub mod counting;
pub mod dirichlet;
pub mod error;
pub mod operator;
pub mod output;
pub mod quadrature;
pub mod series;
pub mod symbols;
pub mod verify;

pub use error::{Error, Result};
pub use series::TruncatedSeries;
pub use symbols::{Symbol, SymbolMap, SymbolRegistry};
