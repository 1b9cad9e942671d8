//! Identification of disaster-relevant geotagged tweets.
//!
//! Two independent relevance classifiers are provided: a matching filter
//! built from core keywords plus human-reviewed hashtags
//! ([`matchfilter`]), and a learned classifier over bag-of-words, TF-IDF,
//! latent semantic indexing and logistic regression ([`learner`],
//! [`features`]). The [`evalreport`] module compares them, and
//! [`sentiment`] turns relevant tweets into positive/negative time series.
//!
//! Stage orchestration with on-disk intermediate files lives in [`runner`];
//! the `triage` binary is a thin wrapper over it.

pub mod config;
pub mod corpus;
pub mod error;
pub mod evalreport;
pub mod features;
pub mod learner;
pub mod matchfilter;
pub mod regions;
pub mod runner;
pub mod sentiment;
pub mod synth;

pub use error::{Error, Result};
