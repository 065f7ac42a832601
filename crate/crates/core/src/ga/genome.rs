use std::fmt;

use serde::{Deserialize, Serialize};

use super::vocab::ModifierVocabulary;
use crate::error::{Error, Result};

pub const MIN_LEN: usize = 3;
pub const MAX_LEN: usize = 12;

/// An ordered modifier list of length `MIN_LEN..=MAX_LEN`. Modifiers are
/// atomic genes; repeats are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Genome(Vec<String>);

impl Genome {
    pub fn new(modifiers: Vec<String>, vocab: &ModifierVocabulary) -> Result<Self> {
        let g = Self(modifiers);
        g.validate(vocab)?;
        Ok(g)
    }

    pub(crate) fn from_vec_unchecked(modifiers: Vec<String>) -> Self {
        debug_assert!((MIN_LEN..=MAX_LEN).contains(&modifiers.len()));
        Self(modifiers)
    }

    pub fn validate(&self, vocab: &ModifierVocabulary) -> Result<()> {
        if !(MIN_LEN..=MAX_LEN).contains(&self.0.len()) {
            return Err(Error::invalid(format!(
                "genome length {} outside {MIN_LEN}..={MAX_LEN}",
                self.0.len()
            )));
        }
        if let Some(m) = self.0.iter().find(|m| !vocab.is_usable(m)) {
            return Err(Error::invalid(format!("{m:?} is not a usable modifier")));
        }
        Ok(())
    }

    pub fn modifiers(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `"prefix, m1, m2, ..."`; just the prefix when there are no modifiers.
    pub fn prompt(&self, prefix: &str) -> String {
        assemble_prompt(prefix, &self.0)
    }
}

pub fn assemble_prompt(prefix: &str, modifiers: &[String]) -> String {
    std::iter::once(prefix)
        .chain(modifiers.iter().map(String::as_str))
        .collect::<Vec<_>>()
        .join(", ")
}

impl fmt::Display for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0.join(", "))
    }
}
