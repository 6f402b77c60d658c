use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::Dataset;
use super::{
    decompose, fleiss_kappa, interpret_alpha, interpret_kappa, jaccard_mean, krippendorff_alpha,
    pearson_correlation, percent_agreement, AlphaBand, AssessmentSet, KappaBands, Score,
    UndefinedReason,
};
use crate::Id;

/// Agreement scores of one `(session, topic)` assessment set.
///
/// Records replayed from a pre-scored file only carry kappa and alpha; the
/// other measures are `None` there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementRecord {
    pub session: Id,
    pub topic: Id,
    pub assessor_count: usize,
    pub kappa: Score,
    pub alpha: Score,
    pub percent_agreement: Option<Score>,
    pub jaccard_mean: Option<Score>,
    pub observed_disagreement: Option<f64>,
    pub expected_disagreement: Option<f64>,
    /// Documents left out of Fleiss' kappa because not every assessor judged them.
    pub fleiss_excluded_documents: Option<usize>,
    pub kappa_bands: Option<KappaBands>,
    pub alpha_band: Option<AlphaBand>,
}

impl AgreementRecord {
    pub fn from_set(set: &AssessmentSet) -> Self {
        let assessor_count = set.assessor_count();
        if assessor_count < 2 {
            let single = Score::Undefined(UndefinedReason::SingleAssessor);
            return AgreementRecord {
                session: set.session().clone(),
                topic: set.topic().clone(),
                assessor_count,
                kappa: single,
                alpha: single,
                percent_agreement: Some(single),
                jaccard_mean: Some(if set.is_binary() {
                    single
                } else {
                    UndefinedReason::NonBinaryCategories.into()
                }),
                observed_disagreement: None,
                expected_disagreement: None,
                fleiss_excluded_documents: Some(set.documents().len()),
                kappa_bands: None,
                alpha_band: None,
            };
        }
        let fleiss = fleiss_kappa(set);
        let disagreement = decompose(set).ok();
        let mut record = AgreementRecord::prescored(
            set.session().clone(),
            set.topic().clone(),
            assessor_count,
            fleiss.score,
            krippendorff_alpha(set),
        );
        record.percent_agreement = Some(percent_agreement(set));
        record.jaccard_mean = Some(jaccard_mean(set));
        record.observed_disagreement = disagreement.map(|d| d.observed);
        record.expected_disagreement = disagreement.map(|d| d.expected);
        record.fleiss_excluded_documents = Some(fleiss.excluded_documents);
        record
    }

    /// A record holding externally computed kappa and alpha values.
    pub fn prescored(
        session: Id,
        topic: Id,
        assessor_count: usize,
        kappa: Score,
        alpha: Score,
    ) -> Self {
        AgreementRecord {
            session,
            topic,
            assessor_count,
            kappa,
            alpha,
            percent_agreement: None,
            jaccard_mean: None,
            observed_disagreement: None,
            expected_disagreement: None,
            fleiss_excluded_documents: None,
            kappa_bands: kappa
                .value()
                .and_then(|k| interpret_kappa(k.clamp(-1.0, 1.0)).ok()),
            alpha_band: alpha.value().map(interpret_alpha),
        }
    }
}

/// Mean assessor count, alpha and kappa over a group of records.
/// Undefined scores are left out of the means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub key: String,
    pub sets: usize,
    pub assessors: Option<f64>,
    pub alpha: Option<f64>,
    pub kappa: Option<f64>,
}

impl Averages {
    fn over<'a>(
        key: impl Into<String>,
        records: impl IntoIterator<Item = &'a AgreementRecord>,
    ) -> Self {
        let records: Vec<&AgreementRecord> = records.into_iter().collect();
        Averages {
            key: key.into(),
            sets: records.len(),
            assessors: mean(records.iter().map(|r| Some(r.assessor_count as f64))),
            alpha: mean(records.iter().map(|r| r.alpha.value())),
            kappa: mean(records.iter().map(|r| r.kappa.value())),
        }
    }
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let present: Vec<f64> = values.flatten().collect();
    if present.is_empty() {
        None
    } else {
        Some(present.iter().sum::<f64>() / present.len() as f64)
    }
}

/// Pearson correlation between the alpha and kappa columns of one scope:
/// a session, or the per-topic averages (`scope = "average"`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub scope: String,
    pub pairs: usize,
    pub value: Score,
}

impl Correlation {
    fn between(
        scope: impl Into<String>,
        pairs: impl IntoIterator<Item = (Option<f64>, Option<f64>)>,
    ) -> Self {
        let (alphas, kappas): (Vec<f64>, Vec<f64>) = pairs
            .into_iter()
            .filter_map(|(a, k)| Some((a?, k?)))
            .unzip();
        let value = pearson_correlation(&alphas, &kappas)
            .unwrap_or(Score::Undefined(UndefinedReason::NoPairableValues));
        Correlation {
            scope: scope.into(),
            pairs: alphas.len(),
            value,
        }
    }
}

pub const AVERAGE_SCOPE: &str = "average";

/// The per-set agreement grid with session and topic averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementTable {
    pub sessions: Vec<Id>,
    pub topics: Vec<Id>,
    /// Sorted by session, then topic.
    pub records: Vec<AgreementRecord>,
    pub session_averages: Vec<Averages>,
    pub topic_averages: Vec<Averages>,
    pub overall: Averages,
    pub correlations: Vec<Correlation>,
}

impl AgreementTable {
    pub fn from_dataset(dataset: &Dataset) -> Self {
        Self::from_records(dataset.sets().map(AgreementRecord::from_set).collect())
    }

    pub fn from_records(mut records: Vec<AgreementRecord>) -> Self {
        records.sort_by(|x, y| (&x.session, &x.topic).cmp(&(&y.session, &y.topic)));
        let sessions: Vec<Id> = records
            .iter()
            .map(|r| r.session.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let topics: Vec<Id> = records
            .iter()
            .map(|r| r.topic.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let session_averages: Vec<Averages> = sessions
            .iter()
            .map(|s| Averages::over(s.as_str(), records.iter().filter(|r| &r.session == s)))
            .collect();
        let topic_averages: Vec<Averages> = topics
            .iter()
            .map(|t| Averages::over(t.as_str(), records.iter().filter(|r| &r.topic == t)))
            .collect();
        let overall = Averages::over("all", &records);
        let mut correlations: Vec<Correlation> = sessions
            .iter()
            .map(|s| {
                Correlation::between(
                    s.as_str(),
                    records
                        .iter()
                        .filter(|r| &r.session == s)
                        .map(|r| (r.alpha.value(), r.kappa.value())),
                )
            })
            .collect();
        correlations.push(Correlation::between(
            AVERAGE_SCOPE,
            topic_averages.iter().map(|a| (a.alpha, a.kappa)),
        ));
        AgreementTable {
            sessions,
            topics,
            records,
            session_averages,
            topic_averages,
            overall,
            correlations,
        }
    }

    pub fn record(&self, session: &Id, topic: &Id) -> Option<&AgreementRecord> {
        self.records
            .iter()
            .find(|r| &r.session == session && &r.topic == topic)
    }

    pub fn correlation(&self, scope: &str) -> Option<&Correlation> {
        self.correlations.iter().find(|c| c.scope == scope)
    }
}
