//! Extraction scoring and the distribution statistics used for license surveys.

pub mod distribution;
pub mod metrics;
pub mod report;
pub mod stats;
pub mod table;

use thiserror::Error;

use crate::benchmark::BenchmarkError;
use crate::model::ModelError;

pub use distribution::{
    bucket, distribution_table, license_distribution, LicenseShare, OTHERS, RECOGNIZED_LICENSES,
};
pub use metrics::{score_collection, score_extraction, Averaging, EvalMetrics, Scope};
pub use report::{
    evaluate_benchmark, evaluate_collection, render_metrics_table, CollectionEval, MetricsReport,
    MetricsRow,
};
pub use stats::{chi_square_sf, chi_square_test, ContingencyStats, EffectLabel};
pub use table::{parse_contingency, ContingencyTable};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{license}: term `{term}` is not in the taxonomy")]
    TaxonomyMismatch { license: String, term: String },
    #[error("nothing to score")]
    EmptyCollection,
    #[error("contingency table: {0}")]
    Table(String),
    #[error("contingency table line {line}: {message}")]
    TableParse { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Bundle(#[from] BenchmarkError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
