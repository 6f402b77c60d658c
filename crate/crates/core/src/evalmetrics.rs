//! Pooling, precision@k and unfiltered-vs-filtered comparison.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::agreement::{Dataset, Measure, SetKey};
use crate::{Error, Id, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedDoc {
    pub doc: Id,
    pub rank: u32,
    pub score: f64,
}

/// One service's ranking for one topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedRun {
    service: String,
    topic: Id,
    ranking: Vec<RankedDoc>,
}

impl RankedRun {
    /// Ranks must run 1, 2, 3, … in order and documents must not repeat.
    pub fn new(
        service: impl Into<String>,
        topic: impl Into<Id>,
        ranking: Vec<RankedDoc>,
    ) -> Result<Self> {
        let service = service.into();
        let topic = topic.into();
        let mut seen = BTreeSet::new();
        for (i, entry) in ranking.iter().enumerate() {
            if entry.rank as usize != i + 1 {
                return Err(Error::invalid(format!(
                    "run {service}/{topic}: expected rank {} but found {}",
                    i + 1,
                    entry.rank
                )));
            }
            if !seen.insert(&entry.doc) {
                return Err(Error::invalid(format!(
                    "run {service}/{topic}: document {} ranked twice",
                    entry.doc
                )));
            }
        }
        Ok(RankedRun {
            service,
            topic,
            ranking,
        })
    }

    /// Convenience constructor: documents in rank order, scores descending.
    pub fn from_docs<D: Into<Id>>(
        service: impl Into<String>,
        topic: impl Into<Id>,
        docs: impl IntoIterator<Item = D>,
    ) -> Result<Self> {
        let docs: Vec<Id> = docs.into_iter().map(Into::into).collect();
        let len = docs.len();
        let ranking = docs
            .into_iter()
            .enumerate()
            .map(|(i, doc)| RankedDoc {
                doc,
                rank: i as u32 + 1,
                score: (len - i) as f64,
            })
            .collect();
        Self::new(service, topic, ranking)
    }

    pub fn service(&self) -> &str {
        &self.service
    }

    pub fn topic(&self) -> &Id {
        &self.topic
    }

    pub fn ranking(&self) -> &[RankedDoc] {
        &self.ranking
    }

    pub fn top(&self, depth: usize) -> impl Iterator<Item = &Id> + '_ {
        self.ranking.iter().take(depth).map(|r| &r.doc)
    }
}

/// The deduplicated union of several runs' top documents for one topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledList {
    pub topic: Id,
    /// Ascending document order.
    pub documents: Vec<Id>,
    /// Sorted service tags.
    pub source_runs: Vec<String>,
    pub depth: usize,
}

impl PooledList {
    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

pub fn build_pool<'a>(
    runs: impl IntoIterator<Item = &'a RankedRun>,
    depth: usize,
) -> Result<PooledList> {
    if depth == 0 {
        return Err(Error::invalid("pool depth must be at least 1"));
    }
    let mut topic: Option<&Id> = None;
    let mut documents = BTreeSet::new();
    let mut sources = BTreeSet::new();
    for run in runs {
        match topic {
            Some(t) if t != run.topic() => {
                return Err(Error::MixedTopics(t.to_string(), run.topic().to_string()))
            }
            _ => topic = Some(run.topic()),
        }
        documents.extend(run.top(depth).cloned());
        sources.insert(run.service().to_owned());
    }
    let topic = topic.ok_or_else(|| Error::invalid("cannot pool an empty list of runs"))?;
    Ok(PooledList {
        topic: topic.clone(),
        documents: documents.into_iter().collect(),
        source_runs: sources.into_iter().collect(),
        depth,
    })
}

/// `|top-k ∩ relevant| / k`. Short rankings still divide by `k`.
pub fn precision_at_k(run: &RankedRun, relevant: &BTreeSet<&Id>, k: usize) -> f64 {
    assert!(k >= 1, "precision cutoff must be at least 1");
    let hits = run.top(k).filter(|d| relevant.contains(d)).count();
    hits as f64 / k as f64
}

/// Runs available to each session.
///
/// Shared runs apply to every session; session-scoped runs apply to one
/// session and replace a shared run of the same service and topic.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunCatalog {
    shared: BTreeMap<(String, Id), RankedRun>,
    scoped: BTreeMap<Id, BTreeMap<(String, Id), RankedRun>>,
    services: Vec<String>,
}

impl RunCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_shared(&mut self, runs: impl IntoIterator<Item = RankedRun>) -> Result<()> {
        for run in runs {
            self.note_service(run.service());
            let key = (run.service.clone(), run.topic.clone());
            if self.shared.insert(key, run).is_some() {
                return Err(Error::invalid(
                    "a shared run for this service and topic was given twice",
                ));
            }
        }
        Ok(())
    }

    pub fn add_scoped(
        &mut self,
        session: impl Into<Id>,
        runs: impl IntoIterator<Item = RankedRun>,
    ) -> Result<()> {
        let session = session.into();
        for run in runs {
            self.note_service(run.service());
            let key = (run.service.clone(), run.topic.clone());
            let scope = self.scoped.entry(session.clone()).or_default();
            if scope.insert(key, run).is_some() {
                return Err(Error::invalid(format!(
                    "a run for this service and topic was given twice for session {session}"
                )));
            }
        }
        Ok(())
    }

    fn note_service(&mut self, service: &str) {
        if !self.services.iter().any(|s| s == service) {
            self.services.push(service.to_owned());
        }
    }

    /// Service tags in first-seen order.
    pub fn services(&self) -> &[String] {
        &self.services
    }

    pub fn run(&self, session: &Id, service: &str, topic: &Id) -> Option<&RankedRun> {
        let key = (service.to_owned(), topic.clone());
        self.scoped
            .get(session)
            .and_then(|scope| scope.get(&key))
            .or_else(|| self.shared.get(&key))
    }

    /// Runs visible to `session` for `topic`, in service order.
    pub fn runs_for(&self, session: &Id, topic: &Id) -> Vec<&RankedRun> {
        self.services
            .iter()
            .filter_map(|s| self.run(session, s, topic))
            .collect()
    }

    pub fn pool(&self, session: &Id, topic: &Id, depth: usize) -> Result<PooledList> {
        let runs = self.runs_for(session, topic);
        if runs.is_empty() {
            return Err(Error::UnknownPool {
                session: session.to_string(),
                topic: topic.to_string(),
            });
        }
        build_pool(runs, depth)
    }
}

/// Which judgments a precision grid was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Unfiltered,
    KappaFiltered,
    AlphaFiltered,
}

impl Variant {
    pub fn filtered(measure: Measure) -> Self {
        match measure {
            Measure::Kappa => Variant::KappaFiltered,
            Measure::Alpha => Variant::AlphaFiltered,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Unfiltered => "unfiltered",
            Variant::KappaFiltered => "kappa-filtered",
            Variant::AlphaFiltered => "alpha-filtered",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionCell {
    pub topic: Id,
    pub service: String,
    pub value: f64,
    /// How many assessor-level precision values were averaged.
    pub assessors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceValue {
    pub service: String,
    pub value: Option<f64>,
}

/// A topic × service precision grid. Missing cells are topics or services
/// with no retained judgments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionReport {
    pub variant: Variant,
    pub k: usize,
    pub topics: Vec<Id>,
    pub services: Vec<String>,
    /// Present cells only, by topic then service order.
    pub cells: Vec<PrecisionCell>,
    pub per_service_mean: Vec<ServiceValue>,
    pub rms_error_vs_original: Option<Vec<ServiceValue>>,
}

impl PrecisionReport {
    pub fn cell(&self, topic: &Id, service: &str) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| &c.topic == topic && c.service == service)
            .map(|c| c.value)
    }

    /// Present cells of one service keyed by topic.
    pub fn column(&self, service: &str) -> BTreeMap<Id, f64> {
        self.cells
            .iter()
            .filter(|c| c.service == service)
            .map(|c| (c.topic.clone(), c.value))
            .collect()
    }

    pub fn mean(&self, service: &str) -> Option<f64> {
        self.per_service_mean
            .iter()
            .find(|s| s.service == service)
            .and_then(|s| s.value)
    }

    pub fn rms(&self, service: &str) -> Option<f64> {
        self.rms_error_vs_original
            .as_ref()?
            .iter()
            .find(|s| s.service == service)
            .and_then(|s| s.value)
    }

    /// Fills the RMS row against an unfiltered report.
    pub fn compare_with(&mut self, original: &PrecisionReport) {
        let rows = self
            .services
            .iter()
            .map(|service| ServiceValue {
                service: service.clone(),
                value: rms_error(&original.column(service), &self.column(service)),
            })
            .collect();
        self.rms_error_vs_original = Some(rows);
    }
}

/// Averages per-assessor precision@k into one value per (topic, service).
///
/// Every assessor of every retained set counts once; a service contributes
/// only in sessions whose runs include it. `retained = None` keeps all sets.
/// Unjudged documents count as not relevant.
pub fn per_topic_precision(
    catalog: &RunCatalog,
    dataset: &Dataset,
    retained: Option<&BTreeSet<SetKey>>,
    k: usize,
    variant: Variant,
) -> Result<PrecisionReport> {
    if k == 0 {
        return Err(Error::invalid("precision cutoff k must be at least 1"));
    }
    let topics: Vec<Id> = dataset.topics().into_iter().cloned().collect();
    let services = catalog.services().to_vec();
    let mut cells = Vec::new();
    for topic in &topics {
        let sets: Vec<_> = dataset
            .sets_for_topic(topic)
            .filter(|s| {
                retained.is_none_or(|keep| {
                    keep.contains(&SetKey::new(s.session().clone(), topic.clone()))
                })
            })
            .collect();
        for service in &services {
            let mut values = Vec::new();
            for set in &sets {
                let Some(run) = catalog.run(set.session(), service, topic) else {
                    continue;
                };
                for assessor in 0..set.assessor_count() {
                    values.push(precision_at_k(run, &set.relevant_documents(assessor), k));
                }
            }
            if let Some(value) = mean_over_topics(values.iter().map(|v| Some(*v))) {
                cells.push(PrecisionCell {
                    topic: topic.clone(),
                    service: service.clone(),
                    value,
                    assessors: values.len(),
                });
            }
        }
    }
    let mut report = PrecisionReport {
        variant,
        k,
        topics,
        services,
        cells,
        per_service_mean: Vec::new(),
        rms_error_vs_original: None,
    };
    report.per_service_mean = report
        .services
        .iter()
        .map(|service| ServiceValue {
            service: service.clone(),
            value: mean_over_topics(report.column(service).values().map(|v| Some(*v))),
        })
        .collect();
    Ok(report)
}

/// Arithmetic mean of the present values; `None` if there are none.
pub fn mean_over_topics(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let present: Vec<f64> = values.into_iter().flatten().collect();
    if present.is_empty() {
        return None;
    }
    Some(present.iter().sum::<f64>() / present.len() as f64)
}

/// Root mean square difference over topics present in both grids.
pub fn rms_error(original: &BTreeMap<Id, f64>, filtered: &BTreeMap<Id, f64>) -> Option<f64> {
    let diffs: Vec<f64> = original
        .iter()
        .filter_map(|(topic, o)| filtered.get(topic).map(|f| (o - f) * (o - f)))
        .collect();
    if diffs.is_empty() {
        return None;
    }
    Some((diffs.iter().sum::<f64>() / diffs.len() as f64).sqrt())
}
