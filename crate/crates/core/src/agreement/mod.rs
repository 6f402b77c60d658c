//! Agreement coefficients over assessor × document judgment grids.

mod bands;
mod coefficients;
mod dataset;
mod table;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::{Error, Id, Result};

pub use bands::{
    interpret_alpha, interpret_kappa, AlphaBand, GreveWentura, KappaBands, LandisKoch,
};
pub use coefficients::{
    alpha_2x2, cohen_kappa_2x2, decompose, fleiss_kappa, jaccard_mean, krippendorff_alpha,
    pearson_correlation, percent_agreement, Disagreement, FleissOutcome,
};
pub use dataset::{Dataset, SetKey};
pub use table::{AgreementRecord, AgreementTable, Averages, Correlation, AVERAGE_SCOPE};

/// A judgment label. The relevance data this crate was built for uses
/// `0` (not relevant) and `1` (relevant).
pub type Category = u32;

/// The two chance-corrected measures used for filtering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    Kappa,
    Alpha,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Kappa => "kappa",
            Measure::Alpha => "alpha",
        }
    }
}

impl std::str::FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kappa" => Ok(Measure::Kappa),
            "alpha" => Ok(Measure::Alpha),
            other => Err(Error::invalid(format!(
                "unknown measure {other:?} (expected kappa or alpha)"
            ))),
        }
    }
}

/// Why a coefficient could not be computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UndefinedReason {
    /// Expected disagreement is zero: every label in play is the same.
    NoVariation,
    /// Fewer than two assessors.
    SingleAssessor,
    /// No document carries two or more comparable judgments.
    NoPairableValues,
    /// The measure only exists for binary relevance.
    NonBinaryCategories,
}

impl UndefinedReason {
    pub fn code(self) -> &'static str {
        match self {
            UndefinedReason::NoVariation => "no-variation",
            UndefinedReason::SingleAssessor => "single-assessor",
            UndefinedReason::NoPairableValues => "no-pairable-values",
            UndefinedReason::NonBinaryCategories => "non-binary-categories",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        [
            UndefinedReason::NoVariation,
            UndefinedReason::SingleAssessor,
            UndefinedReason::NoPairableValues,
            UndefinedReason::NonBinaryCategories,
        ]
        .into_iter()
        .find(|r| r.code() == code)
    }
}

/// A coefficient value, or the reason it does not exist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Score {
    Defined(f64),
    Undefined(UndefinedReason),
}

impl Score {
    pub fn value(self) -> Option<f64> {
        match self {
            Score::Defined(v) => Some(v),
            Score::Undefined(_) => None,
        }
    }

    pub fn reason(self) -> Option<UndefinedReason> {
        match self {
            Score::Defined(_) => None,
            Score::Undefined(r) => Some(r),
        }
    }

    pub fn is_defined(self) -> bool {
        matches!(self, Score::Defined(_))
    }

    /// Unwraps a defined value; panics otherwise. Test convenience.
    #[track_caller]
    pub fn unwrap(self) -> f64 {
        match self {
            Score::Defined(v) => v,
            Score::Undefined(r) => panic!("score is undefined: {}", r.code()),
        }
    }
}

impl From<UndefinedReason> for Score {
    fn from(r: UndefinedReason) -> Self {
        Score::Undefined(r)
    }
}

/// All judgments of all assessors for one `(session, topic)` pair.
///
/// Assessors and documents are kept in [`Id`] order, so two sets built from
/// the same judgments compare equal regardless of input order.
#[derive(Debug, Clone, PartialEq)]
pub struct AssessmentSet {
    session: Id,
    topic: Id,
    assessors: Vec<Id>,
    documents: Vec<Id>,
    /// Row-major, `assessors.len() × documents.len()`.
    cells: Vec<Option<Category>>,
    categories: BTreeSet<Category>,
}

impl AssessmentSet {
    /// Builds a set from `(assessor, document, label)` triples.
    pub fn from_judgments<I, A, D>(
        session: impl Into<Id>,
        topic: impl Into<Id>,
        categories: impl IntoIterator<Item = Category>,
        judgments: I,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = (A, D, Category)>,
        A: Into<Id>,
        D: Into<Id>,
    {
        let session = session.into();
        let topic = topic.into();
        let mut lookup: BTreeMap<(Id, Id), Category> = BTreeMap::new();
        for (a, d, label) in judgments {
            let key = (a.into(), d.into());
            if lookup.contains_key(&key) {
                return Err(Error::DuplicateCell(format!(
                    "session {session}, topic {topic}, assessor {}, document {}",
                    key.0, key.1
                )));
            }
            lookup.insert(key, label);
        }
        let assessors = lookup.keys().map(|(a, _)| a.clone()).collect();
        let documents = lookup.keys().map(|(_, d)| d.clone()).collect();
        Self::assemble(session, topic, assessors, documents, &lookup, categories)
    }

    /// Builds a set from an explicit grid, `grid[assessor][document]`.
    /// Rows and columns without any judgment still belong to the set.
    pub fn from_grid(
        session: impl Into<Id>,
        topic: impl Into<Id>,
        assessors: Vec<Id>,
        documents: Vec<Id>,
        grid: Vec<Vec<Option<Category>>>,
        categories: impl IntoIterator<Item = Category>,
    ) -> Result<Self> {
        if grid.len() != assessors.len() || grid.iter().any(|r| r.len() != documents.len()) {
            return Err(Error::invalid(
                "grid shape does not match assessor/document lists",
            ));
        }
        let assessor_set: BTreeSet<Id> = assessors.iter().cloned().collect();
        let document_set: BTreeSet<Id> = documents.iter().cloned().collect();
        if assessor_set.len() != assessors.len() || document_set.len() != documents.len() {
            return Err(Error::invalid(
                "assessor and document identifiers must be unique",
            ));
        }
        let mut lookup = BTreeMap::new();
        for (row, a) in grid.into_iter().zip(&assessors) {
            for (cell, d) in row.into_iter().zip(&documents) {
                if let Some(label) = cell {
                    lookup.insert((a.clone(), d.clone()), label);
                }
            }
        }
        Self::assemble(
            session.into(),
            topic.into(),
            assessor_set,
            document_set,
            &lookup,
            categories,
        )
    }

    fn assemble(
        session: Id,
        topic: Id,
        assessors: BTreeSet<Id>,
        documents: BTreeSet<Id>,
        lookup: &BTreeMap<(Id, Id), Category>,
        categories: impl IntoIterator<Item = Category>,
    ) -> Result<Self> {
        let assessors: Vec<Id> = assessors.into_iter().collect();
        let documents: Vec<Id> = documents.into_iter().collect();
        let mut cells = Vec::with_capacity(assessors.len() * documents.len());
        for a in &assessors {
            for d in &documents {
                cells.push(lookup.get(&(a.clone(), d.clone())).copied());
            }
        }
        Self::validated(session, topic, assessors, documents, cells, categories)
    }

    fn validated(
        session: Id,
        topic: Id,
        assessors: Vec<Id>,
        documents: Vec<Id>,
        cells: Vec<Option<Category>>,
        categories: impl IntoIterator<Item = Category>,
    ) -> Result<Self> {
        let categories: BTreeSet<Category> = categories.into_iter().collect();
        if assessors.is_empty() || documents.is_empty() {
            return Err(Error::invalid(format!(
                "assessment set (session {session}, topic {topic}) needs at least one assessor and one document"
            )));
        }
        if categories.len() < 2 {
            return Err(Error::invalid("a category set needs at least two labels"));
        }
        if let Some(bad) = cells.iter().flatten().find(|l| !categories.contains(l)) {
            return Err(Error::invalid(format!(
                "label {bad} in set (session {session}, topic {topic}) is not a declared category"
            )));
        }
        Ok(AssessmentSet {
            session,
            topic,
            assessors,
            documents,
            cells,
            categories,
        })
    }

    pub fn session(&self) -> &Id {
        &self.session
    }

    pub fn topic(&self) -> &Id {
        &self.topic
    }

    pub fn assessors(&self) -> &[Id] {
        &self.assessors
    }

    pub fn documents(&self) -> &[Id] {
        &self.documents
    }

    pub fn categories(&self) -> &BTreeSet<Category> {
        &self.categories
    }

    pub fn assessor_count(&self) -> usize {
        self.assessors.len()
    }

    pub fn is_binary(&self) -> bool {
        self.categories.len() == 2 && self.categories.contains(&0) && self.categories.contains(&1)
    }

    pub fn cell(&self, assessor: usize, document: usize) -> Option<Category> {
        self.cells[assessor * self.documents.len() + document]
    }

    /// The judgments of one assessor, indexed like [`documents`](Self::documents).
    pub fn row(&self, assessor: usize) -> &[Option<Category>] {
        let w = self.documents.len();
        &self.cells[assessor * w..(assessor + 1) * w]
    }

    /// Non-missing labels of one document across all assessors.
    pub fn column(&self, document: usize) -> impl Iterator<Item = Category> + '_ {
        (0..self.assessors.len()).filter_map(move |a| self.cell(a, document))
    }

    pub fn judgments(&self) -> impl Iterator<Item = (&Id, &Id, Category)> + '_ {
        self.assessors.iter().enumerate().flat_map(move |(ai, a)| {
            self.documents
                .iter()
                .enumerate()
                .filter_map(move |(di, d)| self.cell(ai, di).map(|l| (a, d, l)))
        })
    }

    /// Documents an assessor labelled with a non-zero (relevant) category.
    pub fn relevant_documents(&self, assessor: usize) -> BTreeSet<&Id> {
        self.row(assessor)
            .iter()
            .zip(&self.documents)
            .filter(|(c, _)| matches!(c, Some(l) if *l != 0))
            .map(|(_, d)| d)
            .collect()
    }

    pub fn judged_documents(&self, assessor: usize) -> BTreeSet<&Id> {
        self.row(assessor)
            .iter()
            .zip(&self.documents)
            .filter(|(c, _)| c.is_some())
            .map(|(_, d)| d)
            .collect()
    }

    /// A copy without the named assessors, keeping only documents someone
    /// still judged; `None` if no judgment would remain.
    pub fn without_assessors(&self, drop: &BTreeSet<&Id>) -> Option<AssessmentSet> {
        let judgments: Vec<(Id, Id, Category)> = self
            .judgments()
            .filter(|(a, _, _)| !drop.contains(a))
            .map(|(a, d, l)| (a.clone(), d.clone(), l))
            .collect();
        if judgments.is_empty() {
            return None;
        }
        AssessmentSet::from_judgments(
            self.session.clone(),
            self.topic.clone(),
            self.categories.iter().copied(),
            judgments,
        )
        .ok()
    }
}

/// Two-assessor, two-category contingency table of proportions.
///
/// Columns are assessor A, rows assessor B:
///
/// ```text
///            A=0   A=1
///   B=0       a     b    p_b
///   B=1       c     d    q_b
///            p_a   q_a    1
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContingencyTable2x2 {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    n_values: u64,
}

impl ContingencyTable2x2 {
    pub const SUM_TOLERANCE: f64 = 1e-9;

    /// `n_values` is the number of 0s and 1s used jointly, i.e. twice the
    /// number of documents for two complete assessors.
    pub fn new(a: f64, b: f64, c: f64, d: f64, n_values: u64) -> Result<Self> {
        if [a, b, c, d].iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::invalid(
                "contingency proportions must be finite and non-negative",
            ));
        }
        if ((a + b + c + d) - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::invalid(format!(
                "contingency proportions sum to {}, not 1",
                a + b + c + d
            )));
        }
        if n_values < 2 {
            return Err(Error::invalid(
                "a contingency table needs at least two values",
            ));
        }
        Ok(ContingencyTable2x2 {
            a,
            b,
            c,
            d,
            n_values,
        })
    }

    /// Cross-tabulates a complete binary two-assessor set. The first assessor
    /// is A (columns), the second B (rows).
    pub fn from_set(set: &AssessmentSet) -> Result<Self> {
        if set.assessor_count() != 2 || !set.is_binary() {
            return Err(Error::invalid(
                "contingency tables need a binary set with exactly two assessors",
            ));
        }
        let mut counts = [[0u64; 2]; 2];
        for doc in 0..set.documents().len() {
            match (set.cell(0, doc), set.cell(1, doc)) {
                (Some(x), Some(y)) => counts[y as usize][x as usize] += 1,
                _ => return Err(Error::invalid("contingency tables need complete judgments")),
            }
        }
        let total = set.documents().len() as f64;
        Self::new(
            counts[0][0] as f64 / total,
            counts[0][1] as f64 / total,
            counts[1][0] as f64 / total,
            counts[1][1] as f64 / total,
            2 * set.documents().len() as u64,
        )
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }
    pub fn n_values(&self) -> u64 {
        self.n_values
    }
    pub fn p_a(&self) -> f64 {
        self.a + self.c
    }
    pub fn q_a(&self) -> f64 {
        self.b + self.d
    }
    pub fn p_b(&self) -> f64 {
        self.a + self.b
    }
    pub fn q_b(&self) -> f64 {
        self.c + self.d
    }
    /// Pooled proportion of 0s.
    pub fn p_bar(&self) -> f64 {
        (self.p_a() + self.p_b()) / 2.0
    }
    pub fn q_bar(&self) -> f64 {
        1.0 - self.p_bar()
    }
    pub fn disagreement(&self) -> f64 {
        self.b + self.c
    }
}
