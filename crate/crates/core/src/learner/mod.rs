//! Learning-based relevance: labeled data ingestion, logistic regression
//! and the per-disaster-type pipeline.

mod data;
mod logreg;
mod pipeline;

pub use data::{
    load_training, load_training_file, normalize_label, save_training_file, Label, LabeledExample, LoadStats, Source,
    TrainingFile,
};
pub use logreg::{logreg_gradient, logreg_loss, train_logreg, train_logreg_traced, LogRegConfig, LogRegModel};
pub use pipeline::{
    classify_learning, train_relevance, Featurization, Featurizer, RelevanceConfig, RelevancePipeline,
    PIPELINE_FORMAT_VERSION,
};
