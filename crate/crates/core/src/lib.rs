//! License-compatibility auditing for LLMware supply chains.
//!
//! Licenses are modelled as term/attitude profiles ([`model`]), compared with
//! an asymmetric compatibility matrix ([`compat`]) along typed dependency
//! graphs ([`graph`]). Profiles come from template matching, a rule-based
//! extractor or an LLM agent loop ([`extraction`]). The [`benchmark`] and
//! [`evalkit`] modules build and score mutation benchmarks, and [`ingestion`]
//! populates graphs from Python sources and model-hub metadata.

pub mod benchmark;
pub mod bundled;
pub mod compat;
pub mod evalkit;
pub mod extraction;
pub mod graph;
pub mod ingestion;
pub mod model;
pub mod pipeline;

pub use compat::{
    attitude_compatible, check_pair, CompatibilityVerdict, MissingLicensePolicy, TermConflict,
};
pub use model::{
    complete_profile, validate_profile, Attitude, LegalTerm, LicenseProfile, ProfileSource,
    Provenance, Taxonomy, TermAssignment, TermKind, NOASSERTION, NOT_FOUND,
};
