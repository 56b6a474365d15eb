//! Pearson χ² test of independence and Cramér's V.

use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectLabel {
    Negligible,
    Weak,
    Moderate,
    Strong,
}

impl EffectLabel {
    /// V < 0.10 negligible, [0.10, 0.20) weak, [0.20, 0.40] moderate, > 0.40 strong.
    pub fn from_v(v: f64) -> Self {
        if v < 0.10 {
            EffectLabel::Negligible
        } else if v < 0.20 {
            EffectLabel::Weak
        } else if v <= 0.40 {
            EffectLabel::Moderate
        } else {
            EffectLabel::Strong
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContingencyStats {
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub cramers_v: f64,
    pub effect_label: EffectLabel,
    pub total: u64,
}

const EPS: f64 = 1e-15;
const FPMIN: f64 = 1e-300;
const MAX_ITER: usize = 10_000;

/// ln Γ(x) for x > 0 (Lanczos, g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection keeps accuracy for small arguments.
        return (std::f64::consts::PI / (std::f64::consts::PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + G + 0.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_q_fraction(a: f64, x: f64) -> f64 {
    // Modified Lentz evaluation of the continued fraction.
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Upper regularized incomplete gamma Q(a, x). The series is used below
/// x = a + 1, the continued fraction above.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "gamma_q domain");
    if x == 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_fraction(a, x)
    }
}

/// P(X ≥ x) for X ~ χ²(df).
pub fn chi_square_sf(x: f64, df: usize) -> f64 {
    gamma_q(df as f64 / 2.0, x / 2.0).clamp(0.0, 1.0)
}

pub fn chi_square_test(table: &[Vec<u64>]) -> Result<ContingencyStats, EvalError> {
    let r = table.len();
    let c = table.first().map_or(0, Vec::len);
    if r < 2 || c < 2 {
        return Err(EvalError::Table(format!(
            "table is {r}×{c}; need at least 2×2"
        )));
    }
    if let Some(i) = table.iter().position(|row| row.len() != c) {
        return Err(EvalError::Table(format!(
            "row {} has {} columns, expected {c}",
            i + 1,
            table[i].len()
        )));
    }
    let rows: Vec<u64> = table.iter().map(|row| row.iter().sum()).collect();
    let cols: Vec<u64> = (0..c)
        .map(|j| table.iter().map(|row| row[j]).sum())
        .collect();
    let n: u64 = rows.iter().sum();
    if let Some(i) = rows.iter().position(|&s| s == 0) {
        return Err(EvalError::Table(format!("row {} sums to zero", i + 1)));
    }
    if let Some(j) = cols.iter().position(|&s| s == 0) {
        return Err(EvalError::Table(format!("column {} sums to zero", j + 1)));
    }
    let total = n as f64;
    let mut chi = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &obs) in row.iter().enumerate() {
            let expected = rows[i] as f64 * cols[j] as f64 / total;
            chi += (obs as f64 - expected).powi(2) / expected;
        }
    }
    let dof = (r - 1) * (c - 1);
    let v = (chi / (total * (r.min(c) - 1) as f64))
        .sqrt()
        .clamp(0.0, 1.0);
    Ok(ContingencyStats {
        chi_square: chi,
        degrees_of_freedom: dof,
        p_value: chi_square_sf(chi, dof),
        cramers_v: v,
        effect_label: EffectLabel::from_v(v),
        total: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    use statrs::function::gamma::ln_gamma as oracle_ln_gamma;

    #[test]
    fn independence_and_perfect_association() {
        let s = chi_square_test(&[vec![10, 10], vec![10, 10]]).unwrap();
        assert_eq!(
            (s.chi_square, s.cramers_v, s.effect_label),
            (0.0, 0.0, EffectLabel::Negligible)
        );
        assert_eq!(s.p_value, 1.0);
        let s = chi_square_test(&[vec![20, 0], vec![0, 20]]).unwrap();
        assert!((s.chi_square - 40.0).abs() < 1e-9);
        assert!((s.cramers_v - 1.0).abs() < 1e-9);
        assert_eq!(s.effect_label, EffectLabel::Strong);
    }

    #[test]
    fn label_boundaries() {
        assert_eq!(EffectLabel::from_v(0.0999), EffectLabel::Negligible);
        assert_eq!(EffectLabel::from_v(0.10), EffectLabel::Weak);
        assert_eq!(EffectLabel::from_v(0.20), EffectLabel::Moderate);
        assert_eq!(EffectLabel::from_v(0.40), EffectLabel::Moderate);
        assert_eq!(EffectLabel::from_v(0.4001), EffectLabel::Strong);
    }

    #[test]
    fn degenerate_tables_rejected() {
        assert!(chi_square_test(&[vec![1, 2]]).is_err());
        assert!(chi_square_test(&[vec![1, 0], vec![2, 0]]).is_err());
        assert!(chi_square_test(&[vec![0, 0], vec![2, 1]]).is_err());
        assert!(chi_square_test(&[vec![1, 2], vec![3]]).is_err());
    }

    #[test]
    fn published_quantiles() {
        // 0.95 quantiles of χ²(1), χ²(2), χ²(10).
        for (x, df) in [
            (3.841_458_820_694_124, 1),
            (5.991_464_547_107_979, 2),
            (18.307_038_053_275_146, 10),
        ] {
            assert!((chi_square_sf(x, df) - 0.05).abs() < 1e-10, "df={df}");
        }
    }

    #[test]
    fn ln_gamma_matches_oracle() {
        for x in [0.1, 0.5, 1.0, 1.5, 2.0, 7.3, 30.0, 171.5] {
            assert!(
                (ln_gamma(x) - oracle_ln_gamma(x)).abs()
                    < 1e-10 * oracle_ln_gamma(x).abs().max(1.0),
                "{x}"
            );
        }
    }

    proptest! {
        #[test]
        fn survival_matches_oracle(x in 0.0f64..200.0, df in 1usize..60) {
            let expected = ChiSquared::new(df as f64).unwrap().sf(x);
            prop_assert!((chi_square_sf(x, df) - expected).abs() < 1e-10, "x={x} df={df}");
        }

        #[test]
        fn invariant_under_permutation_and_scaling(
            cells in prop::collection::vec(1u64..50, 6),
            k in 2u64..5,
        ) {
            let t = vec![cells[0..3].to_vec(), cells[3..6].to_vec()];
            let base = chi_square_test(&t).unwrap();
            let swapped = vec![t[1].clone(), t[0].clone()];
            prop_assert!((chi_square_test(&swapped).unwrap().chi_square - base.chi_square).abs() < 1e-9);
            let cols: Vec<Vec<u64>> = t.iter().map(|r| vec![r[2], r[0], r[1]]).collect();
            prop_assert!((chi_square_test(&cols).unwrap().chi_square - base.chi_square).abs() < 1e-9);
            let scaled: Vec<Vec<u64>> = t.iter().map(|r| r.iter().map(|c| c * k).collect()).collect();
            let s = chi_square_test(&scaled).unwrap();
            prop_assert!((s.cramers_v - base.cramers_v).abs() < 1e-9);
        }
    }
}
