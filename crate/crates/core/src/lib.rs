//! Cross-project defect prediction toolkit.
//!
//! The library trains defect classifiers on static code metrics from other
//! projects and scores the modules of an unseen target project. It covers:
//!
//! * a fixed 20-metric data model with CSV and manifest loading,
//! * native classifiers (naive Bayes, random forest, C4.5-style trees,
//!   SMO support vector machines, a small MLP, logistic regression),
//! * six transfer strategies that adapt training data, test data, or
//!   instance weights before training,
//! * leave-one-project-out evaluation with AUC, Friedman ranking, and
//!   Fisher-LSD style grouping,
//! * dataset meta-features (distributional and unsupervised sets) and a
//!   multi-label meta-learner that recommends a method per dataset.
//!
//! All randomized routines derive their streams from an explicit seed, so
//! every pipeline output is reproducible byte for byte.

pub mod classifiers;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod metafeatures;
pub mod metalearner;
pub mod pipeline;
pub mod rng;
pub mod transfer;
mod util;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
