//! Synthetic assessment campaigns with symmetric label noise.
//!
//! Every topic has a hidden binary truth vector. Each assessor copies it,
//! flipping every label independently with probability `error_rate` and
//! leaving cells empty with probability `missing_rate`.
//!
//! Randomness is split into independent ChaCha streams keyed by what they
//! produce (truth of a topic, one assessor of one set, one service ranking),
//! so adding assessors, sessions or services never shifts existing draws.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agreement::{AssessmentSet, Category, Dataset};
use crate::evalmetrics::RankedRun;
use crate::{Error, Id, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub assessors: usize,
    pub documents: usize,
    /// Probability that a document is truly relevant.
    pub prevalence: f64,
    /// Probability that an assessor flips the true label.
    pub error_rate: f64,
    /// Probability that a cell is left unjudged.
    pub missing_rate: f64,
    pub seed: u64,
    pub sessions: usize,
    pub topics: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            assessors: 5,
            documents: 40,
            prevalence: 0.3,
            error_rate: 0.1,
            missing_rate: 0.0,
            seed: 42,
            sessions: 1,
            topics: 1,
        }
    }
}

const MAX_INDEX: usize = (1 << 20) - 1;

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("prevalence", self.prevalence),
            ("error rate", self.error_rate),
            ("missing rate", self.missing_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        for (name, n) in [
            ("assessor count", self.assessors),
            ("document count", self.documents),
            ("session count", self.sessions),
            ("topic count", self.topics),
        ] {
            if n == 0 || n > MAX_INDEX {
                return Err(Error::Config(format!(
                    "{name} must lie in 1..={MAX_INDEX}, got {n}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Stream {
    Truth,
    Assessor,
    Ranking,
}

fn rng(seed: u64, kind: Stream, a: usize, b: usize, c: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = ((kind as u64) << 60) | ((a as u64) << 40) | ((b as u64) << 20) | c as u64;
    rng.set_stream(id);
    rng
}

fn padded(prefix: &str, index: usize, count: usize) -> Id {
    let width = count.to_string().len().max(2);
    Id::new(format!("{prefix}{:0width$}", index + 1))
}

pub fn session_id(index: usize) -> Id {
    Id::new(format!("s{}", index + 1))
}

pub fn topic_id(index: usize) -> Id {
    Id::new(format!("t{}", index + 1))
}

fn document_ids(config: &SimulationConfig) -> Vec<Id> {
    (0..config.documents)
        .map(|d| Id::new(format!("d{:04}", d + 1)))
        .collect()
}

/// The hidden truth of one topic.
pub fn truth(config: &SimulationConfig, topic: usize) -> Vec<Category> {
    let mut rng = rng(config.seed, Stream::Truth, 0, topic, 0);
    (0..config.documents)
        .map(|_| Category::from(rng.random_bool(config.prevalence)))
        .collect()
}

/// One `(session, topic)` set, with every assessor and document present even
/// if some rows or columns end up unjudged.
pub fn generate_set(
    config: &SimulationConfig,
    session: usize,
    topic: usize,
) -> Result<AssessmentSet> {
    config.validate()?;
    let truth = truth(config, topic);
    let grid: Vec<Vec<Option<Category>>> = (0..config.assessors)
        .map(|a| {
            let mut rng = rng(config.seed, Stream::Assessor, session, topic, a);
            truth
                .iter()
                .map(|&label| {
                    let flip = rng.random_bool(config.error_rate);
                    let missing = rng.random_bool(config.missing_rate);
                    (!missing).then_some(if flip { 1 - label } else { label })
                })
                .collect()
        })
        .collect();
    let assessors = (0..config.assessors)
        .map(|a| padded("a", a, config.assessors))
        .collect();
    AssessmentSet::from_grid(
        session_id(session),
        topic_id(topic),
        assessors,
        document_ids(config),
        grid,
        [0, 1],
    )
}

/// All `sessions × topics` sets.
pub fn generate(config: &SimulationConfig) -> Result<Dataset> {
    config.validate()?;
    let mut sets = Vec::with_capacity(config.sessions * config.topics);
    for s in 0..config.sessions {
        for t in 0..config.topics {
            sets.push(generate_set(config, s, t)?);
        }
    }
    Dataset::from_sets(sets)
}

/// One random ranking of all documents per service and topic.
pub fn generate_runs(config: &SimulationConfig, services: &[&str]) -> Result<Vec<RankedRun>> {
    config.validate()?;
    let docs = document_ids(config);
    let mut runs = Vec::new();
    for (s, service) in services.iter().enumerate() {
        for t in 0..config.topics {
            let mut rng = rng(config.seed, Stream::Ranking, 0, t, s);
            let mut ranking = docs.clone();
            ranking.shuffle(&mut rng);
            runs.push(RankedRun::from_docs(*service, topic_id(t), ranking)?);
        }
    }
    Ok(runs)
}
