//! Term–attitude representation of licenses.
//!
//! A license is modelled as a fixed catalog of legal terms, each carrying one
//! of three attitudes. Terms a license is silent about are filled in by
//! [`complete_profile`]: rights default to `cannot`, obligations to `can`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of entries in the legal-term catalog.
pub const TAXONOMY_SIZE: usize = 23;

/// Sentinel for a license file that deviates from every known template.
pub const NOASSERTION: &str = "NOASSERTION";
/// Sentinel for an artifact without any license file.
pub const NOT_FOUND: &str = "Not Found";

/// Returns true for the two sentinel license ids.
pub fn is_sentinel(license_id: &str) -> bool {
    license_id == NOASSERTION || license_id == NOT_FOUND
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("term catalog line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("term catalog has {found} entries, expected {expected}")]
    Cardinality { expected: usize, found: usize },
    #[error("unknown legal term `{0}`")]
    UnknownTerm(String),
    #[error("duplicate assignment for term `{0}`")]
    DuplicateAssignment(String),
    #[error("invalid attitude `{0}` (expected can, cannot or must)")]
    InvalidAttitude(String),
    #[error("profile document: {0}")]
    Document(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    Right,
    Obligation,
}

impl TermKind {
    /// Attitude assumed when a license does not mention a term of this kind.
    pub fn default_attitude(self) -> Attitude {
        match self {
            TermKind::Right => Attitude::Cannot,
            TermKind::Obligation => Attitude::Can,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegalTerm {
    pub id: String,
    pub description: String,
    pub kind: TermKind,
}

/// The stance a license takes on a legal term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Attitude {
    Can,
    Cannot,
    Must,
}

impl Attitude {
    pub const ALL: [Attitude; 3] = [Attitude::Can, Attitude::Cannot, Attitude::Must];

    /// Rank used when several attitudes compete for one term: cannot > must > can.
    pub fn restrictiveness(self) -> u8 {
        match self {
            Attitude::Can => 0,
            Attitude::Must => 1,
            Attitude::Cannot => 2,
        }
    }

    pub fn most_restrictive(self, other: Attitude) -> Attitude {
        if other.restrictiveness() > self.restrictiveness() {
            other
        } else {
            self
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Attitude::Can => "can",
            Attitude::Cannot => "cannot",
            Attitude::Must => "must",
        }
    }
}

impl fmt::Display for Attitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Attitude {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let folded: String = s
            .trim()
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '\'' && *c != '_' && *c != '-')
            .collect::<String>()
            .to_ascii_lowercase();
        match folded.as_str() {
            "can" => Ok(Attitude::Can),
            "cannot" | "cant" => Ok(Attitude::Cannot),
            "must" => Ok(Attitude::Must),
            _ => Err(ModelError::InvalidAttitude(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Declared,
    Defaulted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileSource {
    TemplateMatch,
    GroundTruth,
    Extracted,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermAssignment {
    pub term: String,
    pub attitude: Attitude,
    pub provenance: Provenance,
    #[serde(default)]
    pub evidence: Vec<String>,
}

impl TermAssignment {
    pub fn declared(term: impl Into<String>, attitude: Attitude, evidence: Vec<String>) -> Self {
        TermAssignment {
            term: term.into(),
            attitude,
            provenance: Provenance::Declared,
            evidence,
        }
    }

    pub fn defaulted(term: impl Into<String>, attitude: Attitude) -> Self {
        TermAssignment {
            term: term.into(),
            attitude,
            provenance: Provenance::Defaulted,
            evidence: Vec::new(),
        }
    }

    pub fn is_declared(&self) -> bool {
        self.provenance == Provenance::Declared
    }
}

/// The legal-term catalog, in file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    terms: Vec<LegalTerm>,
    index: HashMap<String, usize>,
}

impl Taxonomy {
    /// Builds a taxonomy of any size. Ids must be unique.
    pub fn from_terms(terms: Vec<LegalTerm>) -> Result<Self, ModelError> {
        let mut index = HashMap::with_capacity(terms.len());
        for (i, term) in terms.iter().enumerate() {
            if term.id.trim().is_empty() {
                return Err(ModelError::Schema {
                    line: i + 1,
                    message: "empty term id".into(),
                });
            }
            if term.description.trim().is_empty() {
                return Err(ModelError::Schema {
                    line: i + 1,
                    message: format!("term `{}` has an empty description", term.id),
                });
            }
            if index.insert(term.id.clone(), i).is_some() {
                return Err(ModelError::Schema {
                    line: i + 1,
                    message: format!("duplicate term id `{}`", term.id),
                });
            }
        }
        Ok(Taxonomy { terms, index })
    }

    /// The catalog shipped with the crate.
    pub fn bundled() -> Self {
        load_taxonomy(crate::bundled::TERMS).expect("bundled term catalog is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        load_taxonomy(&text)
    }

    pub fn terms(&self) -> &[LegalTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&LegalTerm> {
        self.index.get(id).map(|&i| &self.terms[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Case- and whitespace-insensitive lookup returning the canonical id.
    pub fn canonical_id(&self, loose: &str) -> Option<&str> {
        if let Some(t) = self.get(loose) {
            return Some(&t.id);
        }
        let key = fold_term(loose);
        self.terms
            .iter()
            .find(|t| fold_term(&t.id) == key)
            .map(|t| t.id.as_str())
    }
}

fn fold_term(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

/// Parses a term catalog: one `id<TAB>kind<TAB>description` record per line,
/// `#` comments and blank lines ignored. Exactly [`TAXONOMY_SIZE`] entries.
pub fn load_taxonomy(source: &str) -> Result<Taxonomy, ModelError> {
    let mut terms = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (n, raw) in source.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(ModelError::Schema {
                line: line_no,
                message: format!("expected 3 tab-separated fields, found {}", fields.len()),
            });
        }
        let (id, kind, description) = (fields[0], fields[1], fields[2]);
        if id.is_empty() {
            return Err(ModelError::Schema {
                line: line_no,
                message: "empty term id".into(),
            });
        }
        let kind = match kind.to_ascii_lowercase().as_str() {
            "right" => TermKind::Right,
            "obligation" => TermKind::Obligation,
            other => {
                return Err(ModelError::Schema {
                    line: line_no,
                    message: format!("term `{id}`: unknown kind `{other}`"),
                })
            }
        };
        if description.is_empty() {
            return Err(ModelError::Schema {
                line: line_no,
                message: format!("term `{id}` has an empty description"),
            });
        }
        if let Some(first) = seen.insert(id.to_string(), line_no) {
            return Err(ModelError::Schema {
                line: line_no,
                message: format!("duplicate term id `{id}` (first defined on line {first})"),
            });
        }
        terms.push(LegalTerm {
            id: id.to_string(),
            description: description.to_string(),
            kind,
        });
    }
    if terms.len() != TAXONOMY_SIZE {
        return Err(ModelError::Cardinality {
            expected: TAXONOMY_SIZE,
            found: terms.len(),
        });
    }
    Taxonomy::from_terms(terms)
}

/// A license id plus its term→assignment map. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "ProfileDocument", try_from = "ProfileDocument")]
pub struct LicenseProfile {
    license_id: String,
    source: ProfileSource,
    assignments: BTreeMap<String, TermAssignment>,
}

/// On-disk shape of a profile: assignments as an ordered list.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ProfileDocument {
    license_id: String,
    source: ProfileSource,
    assignments: Vec<TermAssignment>,
}

impl From<LicenseProfile> for ProfileDocument {
    fn from(p: LicenseProfile) -> Self {
        ProfileDocument {
            license_id: p.license_id,
            source: p.source,
            assignments: p.assignments.into_values().collect(),
        }
    }
}

impl TryFrom<ProfileDocument> for LicenseProfile {
    type Error = ModelError;

    fn try_from(doc: ProfileDocument) -> Result<Self, Self::Error> {
        LicenseProfile::from_assignments(doc.license_id, doc.source, doc.assignments)
    }
}

impl LicenseProfile {
    pub fn new(license_id: impl Into<String>, source: ProfileSource) -> Self {
        LicenseProfile {
            license_id: license_id.into(),
            source,
            assignments: BTreeMap::new(),
        }
    }

    pub fn from_assignments(
        license_id: impl Into<String>,
        source: ProfileSource,
        assignments: impl IntoIterator<Item = TermAssignment>,
    ) -> Result<Self, ModelError> {
        let mut map = BTreeMap::new();
        for a in assignments {
            let term = a.term.clone();
            if map.insert(term.clone(), a).is_some() {
                return Err(ModelError::DuplicateAssignment(term));
            }
        }
        Ok(LicenseProfile {
            license_id: license_id.into(),
            source,
            assignments: map,
        })
    }

    pub fn license_id(&self) -> &str {
        &self.license_id
    }

    pub fn source(&self) -> ProfileSource {
        self.source
    }

    pub fn get(&self, term: &str) -> Option<&TermAssignment> {
        self.assignments.get(term)
    }

    pub fn attitude(&self, term: &str) -> Option<Attitude> {
        self.assignments.get(term).map(|a| a.attitude)
    }

    /// Assignments ordered by term id.
    pub fn assignments(&self) -> impl Iterator<Item = &TermAssignment> {
        self.assignments.values()
    }

    pub fn declared(&self) -> impl Iterator<Item = &TermAssignment> {
        self.assignments.values().filter(|a| a.is_declared())
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn with_license_id(&self, license_id: impl Into<String>) -> Self {
        LicenseProfile {
            license_id: license_id.into(),
            ..self.clone()
        }
    }

    pub fn with_source(&self, source: ProfileSource) -> Self {
        LicenseProfile {
            source,
            ..self.clone()
        }
    }

    /// Returns a copy with `assignment` inserted, replacing any previous one for its term.
    pub fn with_assignment(&self, assignment: TermAssignment) -> Self {
        let mut next = self.clone();
        next.assignments.insert(assignment.term.clone(), assignment);
        next
    }

    /// Returns a copy keeping only the declared assignments.
    pub fn declared_only(&self) -> Self {
        LicenseProfile {
            license_id: self.license_id.clone(),
            source: self.source,
            assignments: self
                .assignments
                .iter()
                .filter(|(_, a)| a.is_declared())
                .map(|(k, a)| (k.clone(), a.clone()))
                .collect(),
        }
    }

    /// Term ids of the taxonomy missing from this profile, in taxonomy order.
    pub fn missing_terms(&self, taxonomy: &Taxonomy) -> Vec<String> {
        taxonomy
            .terms()
            .iter()
            .filter(|t| !self.assignments.contains_key(&t.id))
            .map(|t| t.id.clone())
            .collect()
    }

    pub fn is_complete(&self, taxonomy: &Taxonomy) -> bool {
        self.missing_terms(taxonomy).is_empty()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("profile serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Fills every taxonomy term the profile does not mention with its default
/// attitude. Existing assignments are kept untouched.
pub fn complete_profile(
    partial: &LicenseProfile,
    taxonomy: &Taxonomy,
) -> Result<LicenseProfile, ModelError> {
    if let Some(unknown) = partial.assignments.keys().find(|t| !taxonomy.contains(t)) {
        return Err(ModelError::UnknownTerm(unknown.clone()));
    }
    let mut completed = partial.clone();
    for term in taxonomy.terms() {
        completed
            .assignments
            .entry(term.id.clone())
            .or_insert_with(|| TermAssignment::defaulted(&term.id, term.kind.default_attitude()));
    }
    Ok(completed)
}

/// All-defaults profile for a license id that has no analyzable text.
pub fn sentinel_profile(license_id: &str, taxonomy: &Taxonomy) -> LicenseProfile {
    complete_profile(
        &LicenseProfile::new(license_id, ProfileSource::Synthetic),
        taxonomy,
    )
    .expect("empty profile completes")
}

/// Profile forbidding every right and requiring every obligation.
pub fn maximally_restrictive_profile(license_id: &str, taxonomy: &Taxonomy) -> LicenseProfile {
    let assignments = taxonomy.terms().iter().map(|t| {
        let attitude = match t.kind {
            TermKind::Right => Attitude::Cannot,
            TermKind::Obligation => Attitude::Must,
        };
        TermAssignment::defaulted(&t.id, attitude)
    });
    LicenseProfile::from_assignments(license_id, ProfileSource::Synthetic, assignments)
        .expect("taxonomy ids are unique")
}

/// Lists every invariant a completed profile violates. Empty means valid.
pub fn validate_profile(profile: &LicenseProfile, taxonomy: &Taxonomy) -> Vec<String> {
    validate(profile, taxonomy, None)
}

/// Like [`validate_profile`], additionally checking that every evidence
/// sentence occurs verbatim in `text`.
pub fn validate_profile_with_text(
    profile: &LicenseProfile,
    taxonomy: &Taxonomy,
    text: &str,
) -> Vec<String> {
    validate(profile, taxonomy, Some(text))
}

fn validate(profile: &LicenseProfile, taxonomy: &Taxonomy, text: Option<&str>) -> Vec<String> {
    let mut out = Vec::new();
    for (key, a) in &profile.assignments {
        if key != &a.term {
            out.push(format!("assignment keyed `{key}` names term `{}`", a.term));
        }
        if !taxonomy.contains(&a.term) {
            out.push(format!("term `{}` is not in the taxonomy", a.term));
        }
        match a.provenance {
            Provenance::Declared if a.evidence.is_empty() => {
                out.push(format!("declared term `{}` has no evidence", a.term))
            }
            Provenance::Defaulted if !a.evidence.is_empty() => {
                out.push(format!("defaulted term `{}` carries evidence", a.term))
            }
            _ => {}
        }
        if let Some(text) = text {
            for sentence in &a.evidence {
                if !text.contains(sentence.as_str()) {
                    out.push(format!(
                        "evidence for `{}` is not a substring of the license text: {:?}",
                        a.term, sentence
                    ));
                }
            }
        }
    }
    for missing in profile.missing_terms(taxonomy) {
        out.push(format!("term `{missing}` has no assignment"));
    }
    if is_sentinel(&profile.license_id) && profile.declared().next().is_some() {
        out.push(format!(
            "sentinel profile `{}` carries declared assignments",
            profile.license_id
        ));
    }
    out
}
