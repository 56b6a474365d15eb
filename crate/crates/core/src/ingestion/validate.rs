//! Existence checks for model identifiers pulled out of source code.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::hub::{FetchOutcome, HubKind, HubMetadata, MetadataFetcher};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentifierPartition {
    pub valid: Vec<String>,
    pub invalid: Vec<String>,
    /// Candidates whose lookup failed after retries.
    pub unverifiable: Vec<String>,
    /// Metadata of the valid identifiers.
    #[serde(skip)]
    pub metadata: BTreeMap<String, HubMetadata>,
}

/// Splits `candidates` into identifiers the hub knows, identifiers it does
/// not, and identifiers that could not be checked. Duplicates are queried once;
/// output keeps first-seen order.
pub fn validate_identifiers(
    candidates: &[String],
    fetcher: &dyn MetadataFetcher,
) -> IdentifierPartition {
    let mut out = IdentifierPartition::default();
    let mut seen = std::collections::HashSet::new();
    for id in candidates {
        let id = id.trim();
        if id.is_empty() || !seen.insert(id.to_string()) {
            continue;
        }
        match fetcher.fetch(HubKind::Model, id) {
            Ok(FetchOutcome::Found(meta)) => {
                out.valid.push(id.to_string());
                out.metadata.insert(id.to_string(), meta);
            }
            Ok(FetchOutcome::NotFound) => out.invalid.push(id.to_string()),
            Err(e) => {
                log::warn!("cannot verify identifier {id}: {e}");
                out.unverifiable.push(id.to_string());
            }
        }
    }
    out
}
