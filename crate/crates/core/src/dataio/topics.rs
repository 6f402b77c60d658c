use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Id, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicEntry {
    pub id: Id,
    pub title: String,
    pub description: String,
}

const TOPICS_HEADER: &str = "id\ttitle\tdescription";

const SAMPLE_TOPICS: &str = include_str!("../../data/topics.tsv");

/// Parses `id<TAB>title<TAB>description` lines after a header.
pub fn parse_topics(text: &str) -> Result<Vec<TopicEntry>> {
    let mut lines = super::lines(text);
    match lines.next() {
        Some((_, h)) if h == TOPICS_HEADER => {}
        Some((n, h)) => {
            return Err(Error::parse(
                n,
                format!("expected header {TOPICS_HEADER:?}, found {h:?}"),
            ))
        }
        None => return Err(Error::parse(1, "empty file, expected a header")),
    }
    let mut ids = BTreeSet::new();
    let mut topics = Vec::new();
    for (n, line) in lines {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 || fields[0].trim().is_empty() {
            return Err(Error::parse(
                n,
                "expected id, title and description separated by tabs",
            ));
        }
        let id = Id::from(fields[0].trim());
        if !ids.insert(id.clone()) {
            return Err(Error::parse(n, format!("topic {id} listed twice")));
        }
        topics.push(TopicEntry {
            id,
            title: fields[1].trim().to_owned(),
            description: fields[2].trim().to_owned(),
        });
    }
    Ok(topics)
}

/// The ten CLEF topics used in the student assessment campaigns.
pub fn sample_topics() -> Vec<TopicEntry> {
    parse_topics(SAMPLE_TOPICS).expect("bundled topic list parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_topics() {
        let topics = sample_topics();
        assert_eq!(topics.len(), 10);
        assert_eq!(topics[0].id, Id::from("83"));
        assert_eq!(topics[0].title, "Media and War");
        assert_eq!(topics[9].id, Id::from("173"));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = parse_topics("id\ttitle\tdescription\n1\ta\tb\n1\tc\td\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }
}
