use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::AssessmentSet;
use crate::{Error, Id, Result};

/// Identifies one assessment set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SetKey {
    pub session: Id,
    pub topic: Id,
}

impl SetKey {
    pub fn new(session: impl Into<Id>, topic: impl Into<Id>) -> Self {
        SetKey {
            session: session.into(),
            topic: topic.into(),
        }
    }
}

impl fmt::Display for SetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "session {}, topic {}", self.session, self.topic)
    }
}

/// A whole campaign: every assessment set keyed by `(session, topic)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    sets: BTreeMap<SetKey, AssessmentSet>,
}

impl Dataset {
    pub fn from_sets(sets: impl IntoIterator<Item = AssessmentSet>) -> Result<Self> {
        let mut out = BTreeMap::new();
        for set in sets {
            let key = SetKey::new(set.session().clone(), set.topic().clone());
            if out.contains_key(&key) {
                return Err(Error::invalid(format!(
                    "assessment set ({key}) given twice"
                )));
            }
            out.insert(key, set);
        }
        Ok(Dataset { sets: out })
    }

    /// Sets in `(session, topic)` order.
    pub fn sets(&self) -> impl Iterator<Item = &AssessmentSet> + '_ {
        self.sets.values()
    }

    pub fn keys(&self) -> impl Iterator<Item = &SetKey> + '_ {
        self.sets.keys()
    }

    pub fn get(&self, key: &SetKey) -> Option<&AssessmentSet> {
        self.sets.get(key)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn topics(&self) -> BTreeSet<&Id> {
        self.sets.keys().map(|k| &k.topic).collect()
    }

    pub fn sessions(&self) -> BTreeSet<&Id> {
        self.sets.keys().map(|k| &k.session).collect()
    }

    pub fn sets_for_topic<'a>(
        &'a self,
        topic: &'a Id,
    ) -> impl Iterator<Item = &'a AssessmentSet> + 'a {
        self.sets.values().filter(move |s| s.topic() == topic)
    }
}
