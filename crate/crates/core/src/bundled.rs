//! Data files compiled into the library so the default catalogs work
//! without a checkout of the source tree.

/// Legal-term catalog (TSV).
pub const TERMS: &str = include_str!("../data/terms.tsv");
/// Per-term keyword patterns and modal cues for the rule extractor.
pub const TERM_PATTERNS: &str = include_str!("../data/term_patterns.toml");
/// Modal cue phrases and per-term action phrases for the mutation rewriter.
pub const REWRITE_CUES: &str = include_str!("../data/rewrite_cues.toml");
/// Python API signatures for model-hub access.
pub const SIGNATURES: &str = include_str!("../data/signatures.toml");
/// Few-shot exemplar for the extraction prompt.
pub const FEW_SHOT: &str = include_str!("../data/few_shot.json");

/// A bundled license: id, text and ground-truth profile document.
#[derive(Debug, Clone, Copy)]
pub struct BundledLicense {
    pub id: &'static str,
    pub text: &'static str,
    pub profile: &'static str,
}

macro_rules! licenses {
    ($dir:literal: $($id:literal),* $(,)?) => {
        &[$(BundledLicense {
            id: $id,
            text: include_str!(concat!("../data/corpus/", $dir, "/", $id, ".txt")),
            profile: include_str!(concat!("../data/corpus/", $dir, "/", $id, ".profile.json")),
        }),*]
    };
}

macro_rules! templates {
    ($($id:literal),* $(,)?) => {
        &[$(($id, include_str!(concat!("../data/templates/", $id, ".txt")))),*]
    };
}

/// Classic open-source licenses.
pub const OSS: &[BundledLicense] = licenses!("OSS": "0BSD", "Apache-2.0", "BSD-2-Clause", "BSD-3-Clause", "BSL-1.0", "CC0-1.0", "GPL-3.0", "ISC", "MIT", "MIT-0", "MPL-2.0", "Unlicense", "Zlib");

/// AI-specific licenses (abridged).
pub const AI: &[BundledLicense] =
    licenses!("AI": "bigscience-bloom-rail-1.0", "creativeml-openrail-m", "llama2", "llama3");

/// Template catalog: (license id, template text).
pub const TEMPLATES: &[(&str, &str)] = templates!(
    "0BSD",
    "Apache-2.0",
    "BSD-2-Clause",
    "BSD-3-Clause",
    "BSL-1.0",
    "CC0-1.0",
    "GPL-3.0",
    "ISC",
    "MIT",
    "MIT-0",
    "MPL-2.0",
    "Unlicense",
    "Zlib",
    "bigscience-bloom-rail-1.0",
    "creativeml-openrail-m",
    "llama2",
    "llama3"
);
