//! Assessor cleaning, threshold filtering of assessment sets, and the
//! end-to-end study.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::agreement::{AgreementRecord, AgreementTable, Dataset, Measure, SetKey};
use crate::dataio::TopicEntry;
use crate::evalmetrics::{per_topic_precision, PrecisionReport, RunCatalog, Variant};
use crate::{Error, Id, Result};

pub const DEFAULT_KAPPA_MIN: f64 = 0.4;
pub const DEFAULT_ALPHA_MIN: f64 = 0.1;
pub const DEFAULT_MAX_MISSING_RATE: f64 = 0.05;
pub const DEFAULT_POOL_DEPTH: usize = 10;
pub const DEFAULT_K: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityThresholds {
    pub kappa_min: f64,
    pub alpha_min: f64,
    pub max_missing_rate: f64,
    pub pool_depth: usize,
}

impl Default for ReliabilityThresholds {
    fn default() -> Self {
        ReliabilityThresholds {
            kappa_min: DEFAULT_KAPPA_MIN,
            alpha_min: DEFAULT_ALPHA_MIN,
            max_missing_rate: DEFAULT_MAX_MISSING_RATE,
            pool_depth: DEFAULT_POOL_DEPTH,
        }
    }
}

impl ReliabilityThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.max_missing_rate) {
            return Err(Error::invalid(format!(
                "max missing rate {} is outside [0, 1]",
                self.max_missing_rate
            )));
        }
        if self.pool_depth == 0 {
            return Err(Error::invalid("pool depth must be at least 1"));
        }
        if !self.kappa_min.is_finite() || !self.alpha_min.is_finite() {
            return Err(Error::invalid("thresholds must be finite"));
        }
        Ok(())
    }

    pub fn threshold(&self, measure: Measure) -> f64 {
        match measure {
            Measure::Kappa => self.kappa_min,
            Measure::Alpha => self.alpha_min,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedAssessor {
    pub session: Id,
    pub topic: Id,
    pub assessor: Id,
    pub missing: usize,
    pub pool_size: usize,
    pub missing_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleaningReport {
    pub max_missing_rate: f64,
    pub pool_depth: usize,
    /// Pool size per set, in set order.
    pub pools: Vec<PoolSize>,
    pub dropped_assessors: Vec<DroppedAssessor>,
    /// Sets in which no assessor survived.
    pub emptied_sets: Vec<SetKey>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolSize {
    pub session: Id,
    pub topic: Id,
    pub documents: usize,
}

/// Drops every assessor who left more than `max_missing_rate` of their pool
/// unjudged. The pool of a set is the union of the top `pool_depth`
/// documents of the runs its session saw for that topic.
pub fn clean_assessors(
    dataset: &Dataset,
    catalog: &RunCatalog,
    max_missing_rate: f64,
    pool_depth: usize,
) -> Result<(Dataset, CleaningReport)> {
    let mut kept_sets = Vec::new();
    let mut pools = Vec::new();
    let mut dropped_assessors = Vec::new();
    let mut emptied_sets = Vec::new();
    for set in dataset.sets() {
        let pool = catalog.pool(set.session(), set.topic(), pool_depth)?;
        pools.push(PoolSize {
            session: set.session().clone(),
            topic: set.topic().clone(),
            documents: pool.len(),
        });
        let mut drop = BTreeSet::new();
        for (i, assessor) in set.assessors().iter().enumerate() {
            let judged = set.judged_documents(i);
            let missing = pool
                .documents
                .iter()
                .filter(|d| !judged.contains(d))
                .count();
            let missing_rate = missing as f64 / pool.len() as f64;
            if missing_rate > max_missing_rate {
                drop.insert(assessor);
                dropped_assessors.push(DroppedAssessor {
                    session: set.session().clone(),
                    topic: set.topic().clone(),
                    assessor: assessor.clone(),
                    missing,
                    pool_size: pool.len(),
                    missing_rate,
                });
            }
        }
        if drop.is_empty() {
            kept_sets.push(set.clone());
        } else {
            match set.without_assessors(&drop) {
                Some(rest) => kept_sets.push(rest),
                None => emptied_sets.push(SetKey::new(set.session().clone(), set.topic().clone())),
            }
        }
    }
    let report = CleaningReport {
        max_missing_rate,
        pool_depth,
        pools,
        dropped_assessors,
        emptied_sets,
    };
    Ok((Dataset::from_sets(kept_sets)?, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DropReason {
    BelowThreshold,
    UndefinedScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedSet {
    pub session: Id,
    pub topic: Id,
    pub reason: DropReason,
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterOutcome {
    pub measure: Measure,
    pub threshold: f64,
    pub kept_sets: Vec<SetKey>,
    pub dropped_sets: Vec<DroppedSet>,
}

impl FilterOutcome {
    pub fn kept_count(&self) -> usize {
        self.kept_sets.len()
    }

    pub fn dropped_count(&self) -> usize {
        self.dropped_sets.len()
    }

    pub fn kept(&self) -> BTreeSet<SetKey> {
        self.kept_sets.iter().cloned().collect()
    }
}

/// Keeps a set iff its score is defined and at least `threshold`.
pub fn filter_sets(records: &[AgreementRecord], measure: Measure, threshold: f64) -> FilterOutcome {
    let mut kept_sets = Vec::new();
    let mut dropped_sets = Vec::new();
    for r in records {
        let score = match measure {
            Measure::Kappa => r.kappa,
            Measure::Alpha => r.alpha,
        };
        let key = SetKey::new(r.session.clone(), r.topic.clone());
        match score.value() {
            Some(v) if v >= threshold => kept_sets.push(key),
            value => dropped_sets.push(DroppedSet {
                session: key.session,
                topic: key.topic,
                reason: if value.is_some() {
                    DropReason::BelowThreshold
                } else {
                    DropReason::UndefinedScore
                },
                score: value,
            }),
        }
    }
    FilterOutcome {
        measure,
        threshold,
        kept_sets,
        dropped_sets,
    }
}

/// Filter outcomes for one or more measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub outcomes: Vec<FilterOutcome>,
}

impl FilterReport {
    pub fn from_table(
        table: &AgreementTable,
        measures: &[Measure],
        thresholds: &ReliabilityThresholds,
    ) -> Self {
        FilterReport {
            outcomes: measures
                .iter()
                .map(|&m| filter_sets(&table.records, m, thresholds.threshold(m)))
                .collect(),
        }
    }

    pub fn outcome(&self, measure: Measure) -> Option<&FilterOutcome> {
        self.outcomes.iter().find(|o| o.measure == measure)
    }
}

/// Precision grids: the unfiltered one first, then one per filter outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub k: usize,
    pub reports: Vec<PrecisionReport>,
}

impl EvalReport {
    pub fn compute(
        catalog: &RunCatalog,
        dataset: &Dataset,
        filters: Option<&FilterReport>,
        k: usize,
    ) -> Result<Self> {
        let mut reports = vec![per_topic_precision(
            catalog,
            dataset,
            None,
            k,
            Variant::Unfiltered,
        )?];
        for outcome in filters.map(|f| f.outcomes.as_slice()).unwrap_or_default() {
            let kept = outcome.kept();
            reports.push(per_topic_precision(
                catalog,
                dataset,
                Some(&kept),
                k,
                Variant::filtered(outcome.measure),
            )?);
        }
        Ok(EvalReport { k, reports })
    }

    /// Fills every filtered grid's RMS row against the unfiltered grid.
    pub fn diff(mut self) -> Result<Self> {
        let original = self
            .reports
            .iter()
            .find(|r| r.variant == Variant::Unfiltered)
            .cloned()
            .ok_or_else(|| Error::invalid("no unfiltered precision grid to compare against"))?;
        for report in &mut self.reports {
            if report.variant != Variant::Unfiltered {
                if report.k != original.k {
                    return Err(Error::invalid("precision grids use different cutoffs"));
                }
                report.compare_with(&original);
            }
        }
        Ok(self)
    }

    pub fn variant(&self, variant: Variant) -> Option<&PrecisionReport> {
        self.reports.iter().find(|r| r.variant == variant)
    }
}

/// Everything the pipeline produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub thresholds: ReliabilityThresholds,
    pub k: usize,
    pub cleaning: Option<CleaningReport>,
    pub agreement: AgreementTable,
    pub filters: FilterReport,
    pub precision: Option<EvalReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub topics: Vec<TopicEntry>,
}

impl StudyReport {
    /// Assembles a report from the stepwise outputs.
    pub fn assemble(
        cleaning: Option<CleaningReport>,
        agreement: AgreementTable,
        filters: FilterReport,
        precision: Option<EvalReport>,
    ) -> Self {
        let mut thresholds = ReliabilityThresholds::default();
        if let Some(c) = &cleaning {
            thresholds.max_missing_rate = c.max_missing_rate;
            thresholds.pool_depth = c.pool_depth;
        }
        for outcome in &filters.outcomes {
            match outcome.measure {
                Measure::Kappa => thresholds.kappa_min = outcome.threshold,
                Measure::Alpha => thresholds.alpha_min = outcome.threshold,
            }
        }
        let k = precision
            .as_ref()
            .map_or(crate::reliability::DEFAULT_K, |p| p.k);
        StudyReport {
            thresholds,
            k,
            cleaning,
            agreement,
            filters,
            precision,
            topics: Vec::new(),
        }
    }

    /// Attaches topic titles, listed in the rendered report.
    pub fn with_topics(mut self, topics: Vec<TopicEntry>) -> Self {
        self.topics = topics;
        self
    }
}

/// Clean → score → filter → precision → RMS, in one pass.
pub fn run_study(
    dataset: &Dataset,
    catalog: &RunCatalog,
    thresholds: &ReliabilityThresholds,
    measures: &[Measure],
    k: usize,
) -> Result<StudyReport> {
    thresholds.validate()?;
    if dataset.is_empty() {
        return Err(Error::invalid("no assessment sets to study"));
    }
    let (cleaned, cleaning) = clean_assessors(
        dataset,
        catalog,
        thresholds.max_missing_rate,
        thresholds.pool_depth,
    )?;
    let agreement = AgreementTable::from_dataset(&cleaned);
    let filters = FilterReport::from_table(&agreement, measures, thresholds);
    let precision = EvalReport::compute(catalog, &cleaned, Some(&filters), k)?.diff()?;
    Ok(StudyReport::assemble(
        Some(cleaning),
        agreement,
        filters,
        Some(precision),
    ))
}
