//! Mutant generation and the generator's independent self-check.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::rewrite::{override_sentence, rewrite_sentence, CueTable, RewriteMethod};
use super::BenchmarkError;
use crate::model::{Attitude, LicenseProfile, Taxonomy, TermAssignment};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRewrite {
    pub original: String,
    pub rewritten: String,
    pub method: RewriteMethod,
    /// The sentence that carries the new attitude: the rewritten sentence for
    /// substitutions, the appended clause for overrides.
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationSpec {
    pub mutant_id: String,
    pub base_license_id: String,
    pub term: String,
    pub from: Attitude,
    pub to: Attitude,
    pub rewrites: Vec<SentenceRewrite>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutatedLicense {
    pub license_id: String,
    pub text: String,
    pub profile: LicenseProfile,
    pub spec: MutationSpec,
}

/// `<base>--mut-<term slug>-<attitude>`, e.g. `MIT--mut-commercial-use-cannot`.
pub fn mutant_id(base_id: &str, term: &str, to: Attitude) -> String {
    let slug = term
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join("-");
    format!("{base_id}--mut-{slug}-{to}")
}

/// Replaces every occurrence of each original sentence in one pass.
pub fn apply_rewrites(text: &str, rewrites: &[SentenceRewrite]) -> Result<String, BenchmarkError> {
    let mut spans: Vec<(usize, usize, &str)> = Vec::new();
    for r in rewrites {
        let before = spans.len();
        spans.extend(
            text.match_indices(r.original.as_str())
                .map(|(i, m)| (i, i + m.len(), r.rewritten.as_str())),
        );
        if spans.len() == before {
            return Err(BenchmarkError::EvidenceNotInText {
                sentence: r.original.clone(),
            });
        }
    }
    spans.sort();
    let mut out = String::with_capacity(text.len() + 64);
    let mut at = 0;
    for (start, end, replacement) in spans {
        if start < at {
            return Err(BenchmarkError::OverlappingRewrites);
        }
        out.push_str(&text[at..start]);
        out.push_str(replacement);
        at = end;
    }
    out.push_str(&text[at..]);
    Ok(out)
}

fn rewrites_for(
    assignment: &TermAssignment,
    to: Attitude,
    shared: &BTreeSet<&str>,
    cues: &CueTable,
) -> Result<Vec<SentenceRewrite>, BenchmarkError> {
    let mut out: Vec<SentenceRewrite> = Vec::new();
    for sentence in &assignment.evidence {
        if out.iter().any(|r| &r.original == sentence) {
            continue;
        }
        // Sentences that also support another term stay intact; an override
        // clause carries the new attitude instead.
        let substituted = if shared.contains(sentence.as_str()) {
            None
        } else {
            match rewrite_sentence(sentence, &assignment.term, assignment.attitude, to, cues) {
                Ok(s) => Some(s),
                Err(BenchmarkError::RewriteGap { .. }) => None,
                Err(e) => return Err(e),
            }
        };
        out.push(match substituted {
            Some(rewritten) => SentenceRewrite {
                original: sentence.clone(),
                evidence: rewritten.clone(),
                rewritten,
                method: RewriteMethod::Substitution,
            },
            None => {
                let clause = override_sentence(&assignment.term, to, cues).map_err(|_| {
                    BenchmarkError::RewriteGap {
                        term: assignment.term.clone(),
                        sentence: sentence.clone(),
                    }
                })?;
                SentenceRewrite {
                    original: sentence.clone(),
                    rewritten: format!("{sentence} {clause}"),
                    method: RewriteMethod::ScopedOverride,
                    evidence: clause,
                }
            }
        });
    }
    Ok(out)
}

/// Two mutants per selected term, one for each other attitude. `selection`
/// defaults to every Declared term, in taxonomy order.
pub fn generate_mutants(
    text: &str,
    base: &LicenseProfile,
    selection: Option<&[String]>,
    taxonomy: &Taxonomy,
    cues: &CueTable,
) -> Result<Vec<MutatedLicense>, BenchmarkError> {
    let terms: Vec<String> = match selection {
        Some(s) => s.to_vec(),
        None => taxonomy
            .terms()
            .iter()
            .filter(|t| base.get(&t.id).is_some_and(TermAssignment::is_declared))
            .map(|t| t.id.clone())
            .collect(),
    };
    let mut out = Vec::with_capacity(terms.len() * 2);
    for term in &terms {
        let no_anchor = || BenchmarkError::NoAnchor {
            license: base.license_id().to_string(),
            term: term.clone(),
        };
        let assignment = base.get(term).ok_or_else(no_anchor)?;
        if !assignment.is_declared() || assignment.evidence.is_empty() {
            return Err(no_anchor());
        }
        let shared: BTreeSet<&str> = base
            .declared()
            .filter(|a| a.term != *term)
            .flat_map(|a| a.evidence.iter().map(String::as_str))
            .collect();
        for to in Attitude::ALL
            .into_iter()
            .filter(|a| *a != assignment.attitude)
        {
            let rewrites = rewrites_for(assignment, to, &shared, cues)?;
            let mutated_text = apply_rewrites(text, &rewrites)?;
            let mut evidence: Vec<String> = Vec::new();
            for r in &rewrites {
                if !evidence.contains(&r.evidence) {
                    evidence.push(r.evidence.clone());
                }
            }
            let id = mutant_id(base.license_id(), term, to);
            let profile = base
                .with_assignment(TermAssignment::declared(term.clone(), to, evidence))
                .with_license_id(&id);
            out.push(MutatedLicense {
                license_id: id.clone(),
                text: mutated_text,
                profile,
                spec: MutationSpec {
                    mutant_id: id,
                    base_license_id: base.license_id().to_string(),
                    term: term.clone(),
                    from: assignment.attitude,
                    to,
                    rewrites,
                },
            });
        }
    }
    Ok(out)
}

/// Every way `mutant` departs from a well-formed mutation of the base.
/// Empty means the mutant is valid.
pub fn mutant_problems(
    base: &LicenseProfile,
    base_text: &str,
    mutant: &MutatedLicense,
) -> Vec<String> {
    let mut problems = Vec::new();
    let spec = &mutant.spec;
    if spec.from == spec.to {
        problems.push("mutation keeps the same attitude".into());
    }
    if mutant.license_id != mutant_id(base.license_id(), &spec.term, spec.to)
        || mutant.profile.license_id() != mutant.license_id
    {
        problems.push(format!("unexpected mutant id `{}`", mutant.license_id));
    }

    let terms: BTreeSet<&str> = base
        .assignments()
        .chain(mutant.profile.assignments())
        .map(|a| a.term.as_str())
        .collect();
    let changed: Vec<&str> = terms
        .into_iter()
        .filter(|t| base.attitude(t) != mutant.profile.attitude(t))
        .collect();
    if changed != [spec.term.as_str()] {
        problems.push(format!(
            "attitude changed for {changed:?}, expected only `{}`",
            spec.term
        ));
    }
    if base.attitude(&spec.term) != Some(spec.from)
        || mutant.profile.attitude(&spec.term) != Some(spec.to)
    {
        problems.push(format!(
            "`{}` is not {} -> {}",
            spec.term, spec.from, spec.to
        ));
    }
    for a in base.assignments().filter(|a| a.term != spec.term) {
        if mutant.profile.get(&a.term) != Some(a) {
            problems.push(format!("assignment for `{}` was altered", a.term));
        }
    }

    let originals: Vec<&str> = spec.rewrites.iter().map(|r| r.original.as_str()).collect();
    let evidence: BTreeSet<&str> = base
        .get(&spec.term)
        .map(|a| a.evidence.iter().map(String::as_str).collect())
        .unwrap_or_default();
    for e in &evidence {
        match originals.iter().filter(|o| *o == e).count() {
            1 => {}
            n => problems.push(format!("evidence sentence rewritten {n} times: {e:?}")),
        }
    }
    for o in &originals {
        if !evidence.contains(o) {
            problems.push(format!(
                "rewrite of a sentence that is not `{}` evidence: {o:?}",
                spec.term
            ));
        }
    }
    for r in &spec.rewrites {
        if r.original == r.rewritten {
            problems.push(format!(
                "rewrite leaves the sentence unchanged: {:?}",
                r.original
            ));
        }
    }
    match apply_rewrites(base_text, &spec.rewrites) {
        Ok(expected) if expected == mutant.text => {}
        Ok(_) => {
            problems.push("mutant text differs from the base beyond the listed rewrites".into())
        }
        Err(e) => problems.push(format!("rewrites do not apply to the base text: {e}")),
    }
    for a in mutant.profile.assignments() {
        for e in &a.evidence {
            if !mutant.text.contains(e.as_str()) {
                problems.push(format!(
                    "evidence for `{}` missing from mutant text: {e:?}",
                    a.term
                ));
            }
        }
    }
    problems
}

pub fn verify_mutant(base: &LicenseProfile, base_text: &str, mutant: &MutatedLicense) -> bool {
    mutant_problems(base, base_text, mutant).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::extraction::split_sentences;
    use crate::model::ProfileSource;

    fn text_set(text: &str) -> BTreeSet<String> {
        split_sentences(text)
            .into_iter()
            .map(str::to_string)
            .collect()
    }

    const TEXT: &str = "You are allowed to distribute modified works. You must give credit to the original author. \
                        You must not sublicense. Keep the name.";

    fn base() -> LicenseProfile {
        LicenseProfile::from_assignments(
            "Demo",
            ProfileSource::GroundTruth,
            [
                TermAssignment::declared(
                    "Distribute",
                    Attitude::Can,
                    vec!["You are allowed to distribute modified works.".into()],
                ),
                TermAssignment::declared(
                    "Give Credit",
                    Attitude::Must,
                    vec!["You must give credit to the original author.".into()],
                ),
                TermAssignment::declared(
                    "Sublicense",
                    Attitude::Cannot,
                    vec!["You must not sublicense.".into()],
                ),
                TermAssignment::defaulted("Rename", Attitude::Can),
            ],
        )
        .unwrap()
    }

    fn cues() -> (Taxonomy, CueTable) {
        let t = Taxonomy::bundled();
        let c = CueTable::bundled(&t);
        (t, c)
    }

    #[test]
    fn three_declared_terms_give_six_valid_mutants() {
        let (t, c) = cues();
        let ms = generate_mutants(TEXT, &base(), None, &t, &c).unwrap();
        assert_eq!(ms.len(), 6);
        for m in &ms {
            assert_eq!(
                mutant_problems(&base(), TEXT, m),
                Vec::<String>::new(),
                "{}",
                m.license_id
            );
        }
        let ids: Vec<&str> = ms.iter().map(|m| m.license_id.as_str()).collect();
        assert!(ids.contains(&"Demo--mut-give-credit-cannot"));
        let m = ms
            .iter()
            .find(|m| m.license_id == "Demo--mut-distribute-cannot")
            .unwrap();
        assert!(m
            .text
            .starts_with("You must not distribute modified works."));
    }

    #[test]
    fn defaulted_term_has_no_anchor() {
        let (t, c) = cues();
        let sel = vec!["Rename".to_string()];
        assert!(matches!(
            generate_mutants(TEXT, &base(), Some(&sel), &t, &c),
            Err(BenchmarkError::NoAnchor { .. })
        ));
    }

    #[test]
    fn corrupted_mutants_fail_verification() {
        let (t, c) = cues();
        let ms = generate_mutants(TEXT, &base(), None, &t, &c).unwrap();
        let mut two_terms = ms[0].clone();
        two_terms.profile = two_terms.profile.with_assignment(TermAssignment::declared(
            "Sublicense",
            Attitude::Can,
            vec!["You must not sublicense.".into()],
        ));
        assert!(!verify_mutant(&base(), TEXT, &two_terms));

        let mut extra_edit = ms[0].clone();
        extra_edit.text.push_str(" Extra.");
        assert!(!verify_mutant(&base(), TEXT, &extra_edit));
    }

    #[test]
    fn suppressed_rewrite_of_two_sentence_evidence_fails() {
        let (t, c) = cues();
        let text = "You may distribute copies. You may distribute binaries.";
        let base = LicenseProfile::from_assignments(
            "Two",
            ProfileSource::GroundTruth,
            [TermAssignment::declared(
                "Distribute",
                Attitude::Can,
                vec![
                    "You may distribute copies.".into(),
                    "You may distribute binaries.".into(),
                ],
            )],
        )
        .unwrap();
        let ms = generate_mutants(text, &base, None, &t, &c).unwrap();
        assert!(ms.iter().all(|m| verify_mutant(&base, text, m)));

        let mut m = ms[0].clone();
        m.spec.rewrites.truncate(1);
        m.text = apply_rewrites(text, &m.spec.rewrites).unwrap();
        m.profile = m.profile.with_assignment(TermAssignment::declared(
            "Distribute",
            m.spec.to,
            vec![m.spec.rewrites[0].evidence.clone()],
        ));
        assert!(!verify_mutant(&base, text, &m));
    }

    #[test]
    fn shared_sentence_gets_override_and_stays_intact() {
        let (t, c) = cues();
        let s = "You may copy, modify and distribute the work.";
        let base = LicenseProfile::from_assignments(
            "Shared",
            ProfileSource::GroundTruth,
            [
                TermAssignment::declared("Distribute", Attitude::Can, vec![s.into()]),
                TermAssignment::declared("Modify", Attitude::Can, vec![s.into()]),
            ],
        )
        .unwrap();
        let ms = generate_mutants(s, &base, None, &t, &c).unwrap();
        assert_eq!(ms.len(), 4);
        for m in &ms {
            assert!(m.text.starts_with(s));
            assert_eq!(m.spec.rewrites[0].method, RewriteMethod::ScopedOverride);
            assert!(verify_mutant(&base, s, m));
        }
    }

    #[test]
    fn bundled_corpus_mutates_cleanly_with_text_locality() {
        let (t, c) = cues();
        for lic in bundled::OSS.iter().chain(bundled::AI) {
            let base = LicenseProfile::from_json(lic.profile).unwrap();
            let declared = base.declared().count();
            let ms = generate_mutants(lic.text, &base, None, &t, &c).unwrap();
            assert_eq!(ms.len(), 2 * declared, "{}", lic.id);
            let base_sentences = text_set(lic.text);
            for m in &ms {
                assert_eq!(
                    mutant_problems(&base, lic.text, m),
                    Vec::<String>::new(),
                    "{}",
                    m.license_id
                );
                // Involution: flipping back recovers the base attitudes.
                let back = m
                    .profile
                    .with_assignment(base.get(&m.spec.term).unwrap().clone());
                for a in base.assignments() {
                    assert_eq!(back.attitude(&a.term), Some(a.attitude));
                }
                let mutant_sentences = text_set(&m.text);
                let removed: BTreeSet<_> = base_sentences
                    .difference(&mutant_sentences)
                    .cloned()
                    .collect();
                let added: BTreeSet<_> = mutant_sentences
                    .difference(&base_sentences)
                    .cloned()
                    .collect();
                let originals: BTreeSet<String> =
                    m.spec.rewrites.iter().map(|r| r.original.clone()).collect();
                let rewritten: BTreeSet<String> = m
                    .spec
                    .rewrites
                    .iter()
                    .flat_map(|r| text_set(&r.rewritten))
                    .collect();
                assert!(
                    removed.is_subset(&originals),
                    "{}: {removed:?}",
                    m.license_id
                );
                assert!(added.is_subset(&rewritten), "{}: {added:?}", m.license_id);
            }
        }
    }
}
