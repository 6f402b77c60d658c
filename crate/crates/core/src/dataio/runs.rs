use std::collections::BTreeMap;
use std::io::Write;

use crate::evalmetrics::{RankedDoc, RankedRun};
use crate::{Error, Id, Result};

/// Parses six-column TREC run lines: `topic Q0 doc rank score tag`.
/// The second column is ignored. Runs come back ordered by tag (first
/// appearance) and then topic.
pub fn parse_runs(text: &str) -> Result<Vec<RankedRun>> {
    let mut tags: Vec<String> = Vec::new();
    let mut grouped: BTreeMap<(usize, Id), Vec<(usize, RankedDoc)>> = BTreeMap::new();
    for (n, line) in super::lines(text) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(Error::parse(
                n,
                format!(
                    "expected 6 whitespace-separated fields, found {}",
                    fields.len()
                ),
            ));
        }
        let rank: u32 = fields[3].parse().map_err(|_| {
            Error::parse(n, format!("rank {:?} is not a positive integer", fields[3]))
        })?;
        let score: f64 = fields[4]
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite())
            .ok_or_else(|| Error::parse(n, format!("score {:?} is not a number", fields[4])))?;
        let tag = fields[5];
        let tag_index = match tags.iter().position(|t| t == tag) {
            Some(i) => i,
            None => {
                tags.push(tag.to_owned());
                tags.len() - 1
            }
        };
        grouped
            .entry((tag_index, Id::from(fields[0])))
            .or_default()
            .push((
                n,
                RankedDoc {
                    doc: fields[2].into(),
                    rank,
                    score,
                },
            ));
    }
    let mut runs = Vec::with_capacity(grouped.len());
    for ((tag_index, topic), mut entries) in grouped {
        entries.sort_by_key(|(n, e)| (e.rank, *n));
        let mut seen: BTreeMap<&Id, usize> = BTreeMap::new();
        for (i, (n, entry)) in entries.iter().enumerate() {
            let expected = i as u32 + 1;
            if entry.rank != expected {
                return Err(Error::parse(
                    *n,
                    format!(
                        "run {} topic {topic}: ranks must run 1..{} without gaps or repeats, found rank {} where {expected} was expected",
                        tags[tag_index],
                        entries.len(),
                        entry.rank
                    ),
                ));
            }
            if let Some(first) = seen.insert(&entry.doc, *n) {
                return Err(Error::parse(
                    *n,
                    format!(
                        "run {} topic {topic}: document {} already ranked on line {first}",
                        tags[tag_index], entry.doc
                    ),
                ));
            }
        }
        let ranking = entries.into_iter().map(|(_, e)| e).collect();
        runs.push(RankedRun::new(tags[tag_index].clone(), topic, ranking)?);
    }
    Ok(runs)
}

pub fn write_runs(runs: &[RankedRun], out: &mut dyn Write) -> std::io::Result<()> {
    for run in runs {
        for entry in run.ranking() {
            writeln!(
                out,
                "{} Q0 {} {} {} {}",
                run.topic(),
                entry.doc,
                entry.rank,
                entry.score,
                run.service()
            )?;
        }
    }
    Ok(())
}
