//! Precision / recall / F1 over (term, attitude) pairs.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::model::{complete_profile, Attitude, LicenseProfile, Taxonomy};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// Only Declared assignments count, on both sides.
    #[default]
    DeclaredOnly,
    /// Every assignment counts after completing both profiles.
    AllTerms,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Counts are summed across licenses before computing ratios.
    #[default]
    Micro,
    /// Per-license P, R and F1 are averaged.
    Macro,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub true_positives: usize,
    pub predicted_count: usize,
    pub truth_count: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl EvalMetrics {
    /// Ratios from raw counts. An empty prediction has precision 1 and an
    /// empty truth has recall 1; F1 is 0 when both ratios are 0.
    pub fn from_counts(true_positives: usize, predicted_count: usize, truth_count: usize) -> Self {
        let ratio = |n: usize, d: usize| if d == 0 { 1.0 } else { n as f64 / d as f64 };
        let precision = ratio(true_positives, predicted_count);
        let recall = ratio(true_positives, truth_count);
        EvalMetrics {
            true_positives,
            predicted_count,
            truth_count,
            precision,
            recall,
            f1: harmonic(precision, recall),
        }
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn pairs(
    profile: &LicenseProfile,
    scope: Scope,
    taxonomy: &Taxonomy,
) -> Result<BTreeSet<(String, Attitude)>, EvalError> {
    if let Some(t) = profile.assignments().find(|a| !taxonomy.contains(&a.term)) {
        return Err(EvalError::TaxonomyMismatch {
            license: profile.license_id().to_string(),
            term: t.term.clone(),
        });
    }
    Ok(match scope {
        Scope::DeclaredOnly => profile
            .declared()
            .map(|a| (a.term.clone(), a.attitude))
            .collect(),
        Scope::AllTerms => complete_profile(profile, taxonomy)?
            .assignments()
            .map(|a| (a.term.clone(), a.attitude))
            .collect(),
    })
}

pub fn score_extraction(
    predicted: &LicenseProfile,
    truth: &LicenseProfile,
    scope: Scope,
    taxonomy: &Taxonomy,
) -> Result<EvalMetrics, EvalError> {
    let p = pairs(predicted, scope, taxonomy)?;
    let t = pairs(truth, scope, taxonomy)?;
    Ok(EvalMetrics::from_counts(
        p.intersection(&t).count(),
        p.len(),
        t.len(),
    ))
}

pub fn score_collection(
    pairs: &[(LicenseProfile, LicenseProfile)],
    scope: Scope,
    averaging: Averaging,
    taxonomy: &Taxonomy,
) -> Result<EvalMetrics, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::EmptyCollection);
    }
    let each = pairs
        .iter()
        .map(|(p, t)| score_extraction(p, t, scope, taxonomy))
        .collect::<Result<Vec<_>, _>>()?;
    let tp = each.iter().map(|m| m.true_positives).sum();
    let pred = each.iter().map(|m| m.predicted_count).sum();
    let truth = each.iter().map(|m| m.truth_count).sum();
    Ok(match averaging {
        Averaging::Micro => EvalMetrics::from_counts(tp, pred, truth),
        Averaging::Macro => {
            let n = each.len() as f64;
            EvalMetrics {
                true_positives: tp,
                predicted_count: pred,
                truth_count: truth,
                precision: each.iter().map(|m| m.precision).sum::<f64>() / n,
                recall: each.iter().map(|m| m.recall).sum::<f64>() / n,
                f1: each.iter().map(|m| m.f1).sum::<f64>() / n,
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ProfileSource, TermAssignment};
    use proptest::prelude::*;

    fn profile(pairs: &[(&str, Attitude)]) -> LicenseProfile {
        LicenseProfile::from_assignments(
            "x",
            ProfileSource::Extracted,
            pairs
                .iter()
                .map(|(t, a)| TermAssignment::declared(*t, *a, vec!["s".into()])),
        )
        .unwrap()
    }

    #[test]
    fn hand_counted_half_match() {
        let t = Taxonomy::bundled();
        let p = profile(&[("Distribute", Attitude::Can), ("Modify", Attitude::Must)]);
        let g = profile(&[("Distribute", Attitude::Can), ("Modify", Attitude::Can)]);
        let m = score_extraction(&p, &g, Scope::DeclaredOnly, &t).unwrap();
        assert_eq!(
            (m.true_positives, m.predicted_count, m.truth_count),
            (1, 2, 2)
        );
        assert_eq!((m.precision, m.recall, m.f1), (0.5, 0.5, 0.5));
    }

    #[test]
    fn empty_prediction_convention() {
        let t = Taxonomy::bundled();
        let g = profile(&[("Distribute", Attitude::Can)]);
        let m = score_extraction(&profile(&[]), &g, Scope::DeclaredOnly, &t).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 0.0, 0.0));
    }

    #[test]
    fn micro_average_of_perfect_and_empty() {
        let t = Taxonomy::bundled();
        let g = profile(&[("Distribute", Attitude::Can), ("Modify", Attitude::Can)]);
        let m = score_collection(
            &[(g.clone(), g.clone()), (profile(&[]), g.clone())],
            Scope::DeclaredOnly,
            Averaging::Micro,
            &t,
        )
        .unwrap();
        assert_eq!(m.recall, 0.5);
        assert_eq!(m.precision, 1.0);
    }

    #[test]
    fn all_terms_scope_counts_defaults() {
        let t = Taxonomy::bundled();
        let g = profile(&[("Distribute", Attitude::Can)]);
        let m = score_extraction(&profile(&[]), &g, Scope::AllTerms, &t).unwrap();
        assert_eq!(m.predicted_count, 23);
        assert_eq!(m.true_positives, 22);
    }

    #[test]
    fn foreign_term_and_empty_collection_are_errors() {
        let t = Taxonomy::bundled();
        let bad = profile(&[("Teleport", Attitude::Can)]);
        assert!(matches!(
            score_extraction(&bad, &bad, Scope::DeclaredOnly, &t),
            Err(EvalError::TaxonomyMismatch { .. })
        ));
        assert!(matches!(
            score_collection(&[], Scope::DeclaredOnly, Averaging::Micro, &t),
            Err(EvalError::EmptyCollection)
        ));
    }

    fn arb_profile() -> impl Strategy<Value = LicenseProfile> {
        prop::collection::btree_map(0usize..23, 0usize..3, 0..10).prop_map(|m| {
            let t = Taxonomy::bundled();
            LicenseProfile::from_assignments(
                "x",
                ProfileSource::Extracted,
                m.into_iter().map(|(ti, ai)| {
                    TermAssignment::declared(&t.terms()[ti].id, Attitude::ALL[ai], vec!["s".into()])
                }),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn metrics_bounded_and_single_pair_collection_agrees(p in arb_profile(), g in arb_profile(), all in any::<bool>()) {
            let t = Taxonomy::bundled();
            let scope = if all { Scope::AllTerms } else { Scope::DeclaredOnly };
            let m = score_extraction(&p, &g, scope, &t).unwrap();
            for v in [m.precision, m.recall, m.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!(m.f1 <= m.precision.max(m.recall) + 1e-12);
            let c = score_collection(&[(p.clone(), g.clone())], scope, Averaging::Micro, &t).unwrap();
            prop_assert_eq!(c, m);
            let c = score_collection(&[(p, g.clone())], scope, Averaging::Macro, &t).unwrap();
            prop_assert_eq!(c, m);
            let s = score_extraction(&g, &g, scope, &t).unwrap();
            prop_assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        }
    }
}
