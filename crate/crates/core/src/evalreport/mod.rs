//! Method comparison metrics and report files.

mod metrics;
mod report;

pub use metrics::{
    agreement, paper_recall, paper_recall_counts, precision_recall, relevance_ratio, split_labeled, PrecisionRecall,
};
pub use report::{
    average, emit_results, load_results, stamp_path, write_improvement, write_region_averages, write_results,
    write_stamp, AverageRow, ComparisonRow, ImprovementRow, Method, MethodResult, RunStamp, RECALL_CONVENTION,
    RESULTS_HEADER,
};
