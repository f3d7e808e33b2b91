//! Sentence-level sentiment classification trained from document-level
//! market-reaction labels with multiple-instance learning.

pub mod baselines;
pub mod cli;
pub mod corpus;
pub mod embed;
pub mod error;
pub mod eval;
pub mod eventstudy;
pub mod mil;
pub mod preprocess;

pub use error::{Error, Result};
