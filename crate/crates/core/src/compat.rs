//! Upstream/downstream attitude compatibility and pairwise conflict detection.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Attitude, LicenseProfile, Taxonomy};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CompatError {
    #[error("profile `{license_id}` is not completed; missing terms: {}", missing.join(", "))]
    Incomplete {
        license_id: String,
        missing: Vec<String>,
    },
}

/// How sentinel license ids (`NOASSERTION`, `Not Found`) take part in scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissingLicensePolicy {
    /// Treat the artifact as carrying an all-defaults profile.
    #[default]
    Strict,
    /// Exclude the edge and report it separately.
    Skip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompatibilityVerdict {
    pub compatible: bool,
    pub upstream_attitude: Attitude,
    pub downstream_attitude: Attitude,
}

/// Whether a downstream attitude may sit on top of an upstream one.
///
/// Upstream `can` tolerates anything; upstream `cannot` and `must` are only
/// satisfied by the identical downstream attitude.
pub fn attitude_compatible(upstream: Attitude, downstream: Attitude) -> bool {
    match upstream {
        Attitude::Can => true,
        Attitude::Cannot | Attitude::Must => upstream == downstream,
    }
}

pub fn verdict(upstream: Attitude, downstream: Attitude) -> CompatibilityVerdict {
    CompatibilityVerdict {
        compatible: attitude_compatible(upstream, downstream),
        upstream_attitude: upstream,
        downstream_attitude: downstream,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermConflict {
    pub term: String,
    pub upstream_attitude: Attitude,
    pub downstream_attitude: Attitude,
    pub upstream_evidence: Vec<String>,
    pub downstream_evidence: Vec<String>,
}

/// Compares a downstream profile against its upstream dependency, term by
/// term in taxonomy order. Both profiles must be completed.
pub fn check_pair(
    downstream: &LicenseProfile,
    upstream: &LicenseProfile,
    taxonomy: &Taxonomy,
) -> Result<Vec<TermConflict>, CompatError> {
    for p in [downstream, upstream] {
        let missing = p.missing_terms(taxonomy);
        if !missing.is_empty() {
            return Err(CompatError::Incomplete {
                license_id: p.license_id().to_string(),
                missing,
            });
        }
    }
    let mut conflicts = Vec::new();
    for term in taxonomy.terms() {
        let down = downstream.get(&term.id).expect("completed");
        let up = upstream.get(&term.id).expect("completed");
        if !attitude_compatible(up.attitude, down.attitude) {
            conflicts.push(TermConflict {
                term: term.id.clone(),
                upstream_attitude: up.attitude,
                downstream_attitude: down.attitude,
                upstream_evidence: up.evidence.clone(),
                downstream_evidence: down.evidence.clone(),
            });
        }
    }
    Ok(conflicts)
}
