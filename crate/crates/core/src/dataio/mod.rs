//! File formats: judgments, runs, pre-scored agreement, topics, and reports.

mod assessments;
mod prescored;
mod render;
mod runs;
mod topics;

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use serde::de::DeserializeOwned;

use crate::{Error, Result};

pub use assessments::{parse_assessments, write_assessments, ASSESSMENTS_HEADER};
pub use prescored::{parse_prescored, write_prescored, PRESCORED_HEADER};
pub use render::{display_decimal, round_half_away, write_report, CsvRow, Format, Render};
pub use runs::{parse_runs, write_runs};
pub use topics::{parse_topics, sample_topics, TopicEntry};

/// Reads a whole UTF-8 file, attaching the path to any failure.
pub fn read_to_string(path: &Path) -> Result<String> {
    let mut text = String::new();
    File::open(path)
        .and_then(|f| BufReader::new(f).read_to_string(&mut text))
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
    Ok(text)
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

/// Splits text into lines, accepting LF and CRLF endings.
pub(crate) fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
}
