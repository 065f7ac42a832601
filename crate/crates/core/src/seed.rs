use std::fmt;

use serde::{Deserialize, Serialize};

/// A generation seed as handed to the framework.
///
/// Only the low 32 bits reach the Mersenne Twister; `Seed(s)` and
/// `Seed(s + a * 2^32)` produce identical noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    pub fn raw(self) -> u64 {
        self.0
    }

    /// The 32-bit value the generator is actually seeded with.
    pub fn effective(self) -> u32 {
        (self.0 & 0xffff_ffff) as u32
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

impl From<u32> for Seed {
    fn from(v: u32) -> Self {
        Seed(v as u64)
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncates_to_low_word() {
        assert_eq!(Seed(0).effective(), 0);
        assert_eq!(Seed(0xFFFF_FFFF_0000_002A).effective(), 42);
        assert_eq!(Seed(5 + (1 << 32)).effective(), 5);
        assert_eq!(Seed(u64::MAX).effective(), u32::MAX);
    }
}
