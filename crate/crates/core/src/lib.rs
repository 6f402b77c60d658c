//! Inter-assessor agreement analytics for relevance assessment campaigns.
//!
//! The crate scores how consistently a group of assessors judged the same
//! pooled documents (Fleiss' kappa, Krippendorff's alpha, percent agreement,
//! Jaccard overlap), drops assessment sets that fall below a reliability
//! threshold, and measures how much precision@k of the evaluated retrieval
//! services moves once unreliable sets are removed.
//!
//! The pipeline is:
//!
//! 1. [`reliability::clean_assessors`] removes assessors that skipped too much
//!    of their pool.
//! 2. [`agreement::AgreementTable::from_dataset`] scores every
//!    `(session, topic)` set.
//! 3. [`reliability::filter_sets`] keeps sets whose score clears a threshold.
//! 4. [`evalmetrics::per_topic_precision`] and [`evalmetrics::rms_error`]
//!    compare unfiltered and filtered precision grids.
//!
//! [`reliability::run_study`] runs all of it end to end.

pub mod agreement;
pub mod cli;
pub mod dataio;
pub mod error;
pub mod evalmetrics;
mod id;
pub mod reliability;
pub mod synthgen;

pub use error::{Error, Result};
pub use id::Id;
