use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use crate::agreement::{AssessmentSet, Category, Dataset, SetKey};
use crate::{Error, Id, Result};

/// `(assessor, doc, label)`.
type Judgment = (Id, Id, Category);

pub const ASSESSMENTS_HEADER: &str = "session\ttopic\tassessor\tdoc\trelevance";

/// Parses the tab-separated judgment format:
///
/// ```text
/// session  topic  assessor  doc  relevance
/// 2010  83  s01  GIRT-1234  1
/// ```
///
/// Every set shares one category set: `{0, 1}` plus any other label seen.
pub fn parse_assessments(text: &str) -> Result<Dataset> {
    let mut lines = super::lines(text);
    match lines.next() {
        Some((_, header)) if header == ASSESSMENTS_HEADER => {}
        Some((n, other)) => {
            return Err(Error::parse(
                n,
                format!("expected header {ASSESSMENTS_HEADER:?}, found {other:?}"),
            ))
        }
        None => return Err(Error::parse(1, "empty file, expected a header")),
    }
    let mut grouped: BTreeMap<SetKey, Vec<Judgment>> = BTreeMap::new();
    let mut seen: BTreeMap<(Id, Id, Id, Id), usize> = BTreeMap::new();
    let mut categories: BTreeSet<Category> = [0, 1].into_iter().collect();
    for (n, line) in lines {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(Error::parse(
                n,
                format!("expected 5 tab-separated fields, found {}", fields.len()),
            ));
        }
        if let Some(i) = fields.iter().position(|f| f.trim().is_empty()) {
            return Err(Error::parse(n, format!("field {} is empty", i + 1)));
        }
        let label: Category = fields[4].trim().parse().map_err(|_| {
            Error::parse(
                n,
                format!("relevance {:?} is not a non-negative integer", fields[4]),
            )
        })?;
        let [session, topic, assessor, doc] = [0, 1, 2, 3].map(|i| Id::from(fields[i].trim()));
        let key = (
            session.clone(),
            topic.clone(),
            assessor.clone(),
            doc.clone(),
        );
        if let Some(first) = seen.insert(key, n) {
            return Err(Error::parse(
                n,
                format!(
                    "duplicate judgment (session {session}, topic {topic}, assessor {assessor}, doc {doc}); first given on line {first}"
                ),
            ));
        }
        categories.insert(label);
        grouped
            .entry(SetKey { session, topic })
            .or_default()
            .push((assessor, doc, label));
    }
    let sets = grouped
        .into_iter()
        .map(|(key, judgments)| {
            AssessmentSet::from_judgments(
                key.session,
                key.topic,
                categories.iter().copied(),
                judgments,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::from_sets(sets)
}

/// Writes judgments in set, assessor, document order.
pub fn write_assessments(dataset: &Dataset, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "{ASSESSMENTS_HEADER}")?;
    for set in dataset.sets() {
        for (assessor, doc, label) in set.judgments() {
            writeln!(
                out,
                "{}\t{}\t{assessor}\t{doc}\t{label}",
                set.session(),
                set.topic()
            )?;
        }
    }
    Ok(())
}
