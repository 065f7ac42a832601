use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabEntry {
    pub modifier: String,
    /// Share of training prompts containing the modifier.
    pub frequency: f64,
}

/// Candidate prompt modifiers. Only entries at or above the frequency
/// threshold are usable as genes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModifierVocabulary {
    entries: Vec<VocabEntry>,
    threshold: f64,
    #[serde(skip)]
    usable: Vec<String>,
}

impl ModifierVocabulary {
    pub fn new(entries: Vec<VocabEntry>, threshold: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::Config(format!("threshold {threshold} outside [0, 1]")));
        }
        let mut seen = HashSet::new();
        for e in &entries {
            if e.modifier.trim().is_empty() {
                return Err(Error::Config("empty modifier string".into()));
            }
            if !(0.0..=1.0).contains(&e.frequency) {
                return Err(Error::Config(format!(
                    "frequency {} of {:?} outside [0, 1]",
                    e.frequency, e.modifier
                )));
            }
            if !seen.insert(e.modifier.as_str()) {
                return Err(Error::Config(format!("duplicate modifier {:?}", e.modifier)));
            }
        }
        let usable = entries
            .iter()
            .filter(|e| e.frequency >= threshold)
            .map(|e| e.modifier.clone())
            .collect();
        Ok(Self {
            entries,
            threshold,
            usable,
        })
    }

    /// Every modifier with frequency 1.
    pub fn from_modifiers<S: Into<String>>(mods: impl IntoIterator<Item = S>) -> Result<Self> {
        let entries = mods
            .into_iter()
            .map(|m| VocabEntry {
                modifier: m.into(),
                frequency: 1.0,
            })
            .collect();
        Self::new(entries, DEFAULT_THRESHOLD)
    }

    /// Reads `modifier,frequency` rows (header required).
    pub fn from_csv(path: &Path, threshold: f64) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
        let entries = reader
            .deserialize::<VocabEntry>()
            .map(|r| {
                r.map_err(|e| Error::Csv {
                    line: e.position().map_or(0, |p| p.line()),
                    reason: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if entries.is_empty() {
            return Err(Error::Csv {
                line: 1,
                reason: "no data rows".into(),
            });
        }
        Self::new(entries, threshold)
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn usable(&self) -> &[String] {
        &self.usable
    }

    pub fn is_usable(&self, modifier: &str) -> bool {
        self.usable.iter().any(|m| m == modifier)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_filters_usable_entries() {
        let v = ModifierVocabulary::new(
            vec![
                VocabEntry {
                    modifier: "a".into(),
                    frequency: 0.5,
                },
                VocabEntry {
                    modifier: "b".into(),
                    frequency: 0.01,
                },
                VocabEntry {
                    modifier: "c".into(),
                    frequency: 0.009,
                },
            ],
            DEFAULT_THRESHOLD,
        )
        .unwrap();
        assert_eq!(v.usable(), ["a", "b"]);
        assert!(!v.is_usable("c"));
    }

    #[test]
    fn duplicates_and_bad_frequencies_rejected() {
        assert!(ModifierVocabulary::from_modifiers(["x", "x"]).is_err());
        let bad = VocabEntry {
            modifier: "x".into(),
            frequency: 1.5,
        };
        assert!(ModifierVocabulary::new(vec![bad], 0.01).is_err());
    }

    #[test]
    fn csv_loading() {
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), "modifier,frequency\nhighly detailed,0.2\ntrending,0.001\n").unwrap();
        let v = ModifierVocabulary::from_csv(f.path(), 0.01).unwrap();
        assert_eq!(v.usable(), ["highly detailed"]);
        std::fs::write(f.path(), "modifier,frequency\nx,notanumber\n").unwrap();
        assert!(matches!(
            ModifierVocabulary::from_csv(f.path(), 0.01),
            Err(Error::Csv { line: 2, .. })
        ));
    }
}
