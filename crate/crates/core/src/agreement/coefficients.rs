use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AssessmentSet, Category, ContingencyTable2x2, Score, UndefinedReason};
use crate::{Error, Result};

/// Cohen's kappa from a 2×2 table: `1 − (b+c) / (p_a·q_b + p_b·q_a)`.
pub fn cohen_kappa_2x2(table: &ContingencyTable2x2) -> Score {
    let expected = table.p_a() * table.q_b() + table.p_b() * table.q_a();
    if expected == 0.0 {
        return UndefinedReason::NoVariation.into();
    }
    Score::Defined(1.0 - table.disagreement() / expected)
}

/// Krippendorff's alpha from a 2×2 table:
/// `1 − (b+c) / ((n/(n−1))·2·p̄·q̄)` with `n` the number of pairable values.
pub fn alpha_2x2(table: &ContingencyTable2x2) -> Score {
    let spread = table.p_bar() * table.q_bar();
    if spread <= 0.0 {
        return UndefinedReason::NoVariation.into();
    }
    let n = table.n_values() as f64;
    Score::Defined(1.0 - table.disagreement() / (n / (n - 1.0) * 2.0 * spread))
}

/// Fleiss' kappa together with how much of the grid it could use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FleissOutcome {
    pub score: Score,
    /// Documents judged by every assessor; only these enter the statistic.
    pub documents_used: usize,
    pub excluded_documents: usize,
}

/// Fleiss' multi-rater kappa over the documents every assessor judged.
///
/// Computed from integer counts with one final division:
/// `κ = (A·D₂ − B·D₁) / (D₁·(D₂ − B))` where `A = Σᵢⱼ nᵢⱼ(nᵢⱼ−1)`,
/// `D₁ = N·m·(m−1)`, `B = Σⱼ cⱼ²` and `D₂ = (N·m)²`.
pub fn fleiss_kappa(set: &AssessmentSet) -> FleissOutcome {
    let m = set.assessor_count();
    let total_docs = set.documents().len();
    if m < 2 {
        return FleissOutcome {
            score: UndefinedReason::SingleAssessor.into(),
            documents_used: 0,
            excluded_documents: total_docs,
        };
    }
    let mut per_category: BTreeMap<Category, i128> = BTreeMap::new();
    let mut pair_agreements: i128 = 0;
    let mut used = 0usize;
    for doc in 0..total_docs {
        if set.column(doc).count() != m {
            continue;
        }
        used += 1;
        let mut counts: BTreeMap<Category, i128> = BTreeMap::new();
        for label in set.column(doc) {
            *counts.entry(label).or_default() += 1;
        }
        for (label, n) in counts {
            pair_agreements += n * (n - 1);
            *per_category.entry(label).or_default() += n;
        }
    }
    let excluded_documents = total_docs - used;
    if used == 0 {
        return FleissOutcome {
            score: UndefinedReason::NoPairableValues.into(),
            documents_used: 0,
            excluded_documents,
        };
    }
    let (n_items, m) = (used as i128, m as i128);
    let d1 = n_items * m * (m - 1);
    let d2 = (n_items * m) * (n_items * m);
    let b: i128 = per_category.values().map(|c| c * c).sum();
    let score = if b == d2 {
        UndefinedReason::NoVariation.into()
    } else {
        Score::Defined((pair_agreements * d2 - b * d1) as f64 / (d1 * (d2 - b)) as f64)
    };
    FleissOutcome {
        score,
        documents_used: used,
        excluded_documents,
    }
}

/// Observed and expected disagreement from the coincidence matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disagreement {
    pub observed: f64,
    pub expected: f64,
    /// Number of pairable values (the `n` of the coincidence matrix).
    pub pairable_values: u64,
}

impl Disagreement {
    /// `1 − D_o / D_e`, undefined when `D_e = 0`.
    pub fn alpha(&self) -> Score {
        if self.expected == 0.0 {
            return UndefinedReason::NoVariation.into();
        }
        Score::Defined(1.0 - self.observed / self.expected)
    }
}

/// Nominal-metric observed/expected disagreement.
///
/// Documents with fewer than two judgments are not pairable and are skipped.
/// Coincidences are accumulated as integers per unit size `m_u` and divided by
/// `m_u − 1` group by group, so the result does not depend on the order of
/// assessors or documents.
pub fn decompose(set: &AssessmentSet) -> Result<Disagreement, UndefinedReason> {
    // m_u -> Σ_u Σ_{c≠k} n_uc·n_uk for units of that size
    let mut off_diagonal_by_size: BTreeMap<u64, u128> = BTreeMap::new();
    let mut value_counts: BTreeMap<Category, u128> = BTreeMap::new();
    for doc in 0..set.documents().len() {
        let mut counts: BTreeMap<Category, u128> = BTreeMap::new();
        for label in set.column(doc) {
            *counts.entry(label).or_default() += 1;
        }
        let m_u: u128 = counts.values().sum();
        if m_u < 2 {
            continue;
        }
        let same: u128 = counts.values().map(|c| c * c).sum();
        *off_diagonal_by_size.entry(m_u as u64).or_default() += m_u * m_u - same;
        for (label, c) in counts {
            *value_counts.entry(label).or_default() += c;
        }
    }
    let n: u128 = value_counts.values().sum();
    if n < 2 {
        return Err(UndefinedReason::NoPairableValues);
    }
    let observed_coincidences: f64 = off_diagonal_by_size
        .iter()
        .map(|(&m_u, &off)| off as f64 / (m_u - 1) as f64)
        .sum();
    let same: u128 = value_counts.values().map(|c| c * c).sum();
    let expected_pairs = n * n - same;
    let nf = n as f64;
    Ok(Disagreement {
        observed: observed_coincidences / nf,
        expected: expected_pairs as f64 / (nf * (nf - 1.0)),
        pairable_values: n as u64,
    })
}

/// Krippendorff's alpha, nominal metric, tolerant of missing cells.
pub fn krippendorff_alpha(set: &AssessmentSet) -> Score {
    match decompose(set) {
        Ok(d) => d.alpha(),
        Err(reason) => reason.into(),
    }
}

/// Mean over sorted values so the result is independent of input order.
fn order_free_mean(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    Some(values.iter().sum::<f64>() / values.len() as f64)
}

/// Mean pairwise share of co-judged documents that received the same label.
/// Pairs without a co-judged document do not take part.
pub fn percent_agreement(set: &AssessmentSet) -> Score {
    let m = set.assessor_count();
    if m < 2 {
        return UndefinedReason::SingleAssessor.into();
    }
    let mut ratios = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let (mut shared, mut same) = (0u64, 0u64);
            for (x, y) in set.row(i).iter().zip(set.row(j)) {
                if let (Some(x), Some(y)) = (x, y) {
                    shared += 1;
                    same += u64::from(x == y);
                }
            }
            if shared > 0 {
                ratios.push(same as f64 / shared as f64);
            }
        }
    }
    match order_free_mean(ratios) {
        Some(v) => Score::Defined(v),
        None => UndefinedReason::NoPairableValues.into(),
    }
}

/// Mean pairwise Jaccard overlap of the assessors' relevant sets. A pair where
/// neither assessor marked anything relevant counts as full agreement.
pub fn jaccard_mean(set: &AssessmentSet) -> Score {
    if !set.is_binary() {
        return UndefinedReason::NonBinaryCategories.into();
    }
    let m = set.assessor_count();
    if m < 2 {
        return UndefinedReason::SingleAssessor.into();
    }
    let relevant: Vec<_> = (0..m).map(|a| set.relevant_documents(a)).collect();
    let mut ratios = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in i + 1..m {
            let union = relevant[i].union(&relevant[j]).count();
            let ratio = if union == 0 {
                1.0
            } else {
                relevant[i].intersection(&relevant[j]).count() as f64 / union as f64
            };
            ratios.push(ratio);
        }
    }
    Score::Defined(order_free_mean(ratios).expect("at least one pair"))
}

/// Pearson product-moment correlation.
pub fn pearson_correlation(xs: &[f64], ys: &[f64]) -> Result<Score> {
    if xs.len() != ys.len() {
        return Err(Error::invalid(format!(
            "correlation needs equal-length inputs ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::invalid("correlation needs at least two pairs"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(UndefinedReason::NoVariation.into());
    }
    Ok(Score::Defined(
        (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0),
    ))
}
