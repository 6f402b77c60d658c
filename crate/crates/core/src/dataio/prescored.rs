use std::collections::BTreeSet;
use std::io::Write;

use crate::agreement::{AgreementRecord, Score, UndefinedReason};
use crate::{Error, Id, Result};

pub const PRESCORED_HEADER: &str = "session\ttopic\tassessors\talpha\tkappa";

/// Parses externally computed agreement scores, one set per line:
///
/// ```text
/// session  topic  assessors  alpha  kappa
/// 2010  83  13  .120  .535
/// 2012  96  1  single-assessor  single-assessor
/// ```
///
/// A score is either a number or an undefined-reason code.
pub fn parse_prescored(text: &str) -> Result<Vec<AgreementRecord>> {
    let mut lines = super::lines(text);
    match lines.next() {
        Some((_, header)) if header == PRESCORED_HEADER => {}
        Some((n, other)) => {
            return Err(Error::parse(
                n,
                format!("expected header {PRESCORED_HEADER:?}, found {other:?}"),
            ))
        }
        None => return Err(Error::parse(1, "empty file, expected a header")),
    }
    let mut seen = BTreeSet::new();
    let mut records = Vec::new();
    for (n, line) in lines {
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(Error::parse(
                n,
                format!("expected 5 tab-separated fields, found {}", fields.len()),
            ));
        }
        if let Some(i) = fields.iter().position(|f| f.is_empty()) {
            return Err(Error::parse(n, format!("field {} is empty", i + 1)));
        }
        let (session, topic) = (Id::from(fields[0]), Id::from(fields[1]));
        if !seen.insert((session.clone(), topic.clone())) {
            return Err(Error::parse(
                n,
                format!("session {session}, topic {topic} scored twice"),
            ));
        }
        let assessors: usize = fields[2].parse().map_err(|_| {
            Error::parse(
                n,
                format!("assessor count {:?} is not an integer", fields[2]),
            )
        })?;
        let alpha = parse_score(fields[3])
            .ok_or_else(|| Error::parse(n, format!("bad alpha {:?}", fields[3])))?;
        let kappa = parse_score(fields[4])
            .ok_or_else(|| Error::parse(n, format!("bad kappa {:?}", fields[4])))?;
        if kappa.value().is_some_and(|k| !(-1.0..=1.0).contains(&k)) {
            return Err(Error::parse(n, "kappa must lie in [-1, 1]"));
        }
        if alpha.value().is_some_and(|a| a > 1.0) {
            return Err(Error::parse(n, "alpha cannot exceed 1"));
        }
        records.push(AgreementRecord::prescored(
            session, topic, assessors, kappa, alpha,
        ));
    }
    Ok(records)
}

fn parse_score(token: &str) -> Option<Score> {
    if let Some(reason) = UndefinedReason::from_code(token) {
        return Some(reason.into());
    }
    token
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(Score::Defined)
}

fn score_token(score: Score) -> String {
    match score {
        Score::Defined(v) => v.to_string(),
        Score::Undefined(r) => r.code().to_owned(),
    }
}

pub fn write_prescored(records: &[AgreementRecord], out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "{PRESCORED_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            r.session,
            r.topic,
            r.assessor_count,
            score_token(r.alpha),
            score_token(r.kappa)
        )?;
    }
    Ok(())
}
