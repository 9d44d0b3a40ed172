//! Financial hypernym classification toolkit.
//!
//! The pipeline mines definition/tag corpora from an ontology dump
//! ([`ontology`]), turns definitions into sentence-level training pairs
//! ([`text`]), trains subword-aware word vectors ([`embeddings`]), fuses them
//! with externally produced 768-d sentence vectors ([`representation`]),
//! ranks the 17 hypernym tags for a term ([`classifiers`]) and scores the
//! rankings with Accuracy and Mean Rank ([`evaluation`]).
//!
//! [`pipeline`] wires the stages together behind file-based artifacts; the
//! `hypernym` binary is a thin command-line front end over it.

pub mod classifiers;
pub mod embeddings;
pub mod error;
pub mod evaluation;
pub mod ontology;
pub mod pipeline;
pub mod representation;
pub mod tags;
pub mod text;
pub mod tsv;

pub use error::{Error, Result};
pub use tags::Tag;
