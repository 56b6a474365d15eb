//! Mutated-license benchmark: one term's attitude flipped per mutant, with
//! its evidence sentences rewritten to match.

pub mod bundle;
pub mod mutate;
pub mod rewrite;

use thiserror::Error;

use crate::model::{Attitude, ModelError};

pub use bundle::{
    bundled_collections, mutate_collection, read_collection, write_benchmark, write_collection,
    BundleEntry, Collection, CollectionCount, Manifest,
};
pub use mutate::{
    apply_rewrites, generate_mutants, mutant_id, mutant_problems, verify_mutant, MutatedLicense,
    MutationSpec, SentenceRewrite,
};
pub use rewrite::{override_sentence, rewrite_sentence, CueRow, CueTable, RewriteMethod};

#[derive(Debug, Error)]
pub enum BenchmarkError {
    #[error("`{term}` in {license} is not declared, so it has no sentence to rewrite")]
    NoAnchor { license: String, term: String },
    #[error("no cue to rewrite for `{term}` in: {sentence:?}")]
    RewriteGap { term: String, sentence: String },
    #[error("`{term}` is already {attitude}")]
    SameAttitude { term: String, attitude: Attitude },
    #[error("evidence sentence not found in license text: {sentence:?}")]
    EvidenceNotInText { sentence: String },
    #[error("rewrites overlap in the license text")]
    OverlappingRewrites,
    #[error("generated mutant {0} failed verification")]
    Unverified(String),
    #[error("cue table: {0}")]
    Cues(String),
    #[error("{path}: {message}")]
    Manifest { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}
