//! Graph population from the outside world: Python call-site scanning and
//! model-hub metadata.

pub mod hub;
pub mod scanner;
pub mod search;
pub mod signatures;
pub mod validate;

pub use hub::{
    fetch_metadata, CachedFetcher, FetchError, FetchOutcome, FixtureHub, HubKind, HubMetadata,
    LiveHub, MetadataFetcher, OfflineFetcher, RetryPolicy, RetryingFetcher,
};
pub use scanner::{match_signatures, scan_invocations, ParseFailure, Resolution, ScanFinding};
pub use search::{LocalDirectoryProvider, SearchHit, SearchProvider, SourcegraphProvider};
pub use signatures::{
    bundled_signatures, load_signatures, ApiSignature, CallPattern, ImportPattern,
};
pub use validate::{validate_identifiers, IdentifierPartition};
