//! Uncertainty-aware air quality assessment.
//!
//! Pollutant concentrations are fuzzified with interval type-2 trapezoidal
//! sets, weighted by pollutant importance derived from an expert pairwise
//! comparison matrix, combined through a Mamdani rule base, and type-reduced
//! with the Karnik-Mendel algorithm into an AQI interval and category.
//! Assessed observations can be exported as triples and interpreted by a
//! small forward-chaining rule engine with a SELECT query subset.

pub mod evalkit;
pub mod fahp;
pub mod inference;
pub mod ingest;
pub mod it2;
pub mod kgraph;
pub mod rulebase;

pub use it2::{Category, ParameterTable, Pollutant, Variable};
