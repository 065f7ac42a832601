use serde::{Serialize, Serializer};

use super::topk::Entry;
use crate::seed::Seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoredSeed {
    pub seed: Seed,
    /// Full-vector MSE.
    pub loss: f64,
}

impl From<Entry> for ScoredSeed {
    fn from(e: Entry) -> Self {
        Self {
            seed: Seed(e.seed),
            loss: e.loss,
        }
    }
}

impl From<&Candidate> for ScoredSeed {
    fn from(c: &Candidate) -> Self {
        Self {
            seed: c.seed,
            loss: c.full_loss,
        }
    }
}

/// A retained seed with the loss it received at each stage it reached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate {
    pub seed: Seed,
    pub stage1_loss: Option<f64>,
    pub stage2_loss: Option<f64>,
    pub full_loss: f64,
}

impl Candidate {
    pub(crate) fn entry(&self) -> Entry {
        Entry {
            loss: self.full_loss,
            seed: self.seed.raw(),
        }
    }
}

/// Work counters and timings. Reads count target elements compared per
/// target, summed over seeds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SearchStats {
    pub seeds_evaluated: u64,
    pub stage1_reads: u64,
    pub stage2_reads: u64,
    pub full_reads: u64,
    pub stage1_seconds: f64,
    pub stage2_seconds: f64,
    pub full_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedRanking {
    pub best: ScoredSeed,
    pub second_best: ScoredSeed,
    /// Mean full-vector loss of the evaluated (range scan) or sampled
    /// (two-stage) seeds.
    pub mean_loss: f64,
    /// Population standard deviation matching `mean_loss`.
    pub loss_std: f64,
    /// Range scan: lowest full losses, ascending. Two-stage: finalists in
    /// stage-2 order.
    pub top_k: Vec<Candidate>,
    pub evaluated: u64,
    pub stats: SearchStats,
}

/// `(second_best / best, (mean - best) / std)`.
///
/// The ratio is `+inf` for an exact match (`best == 0`) and `1` when the two
/// leaders tie. The z-score is `0` when the mean equals the best loss and
/// `+inf` when the spread is zero but the mean is higher.
pub fn confidence_gap(r: &SeedRanking) -> (f64, f64) {
    let (best, second) = (r.best.loss, r.second_best.loss);
    let gap = if second == best {
        1.0
    } else if best == 0.0 {
        f64::INFINITY
    } else {
        second / best
    };
    let diff = r.mean_loss - best;
    let z = if diff == 0.0 {
        0.0
    } else if r.loss_std == 0.0 {
        f64::INFINITY.copysign(diff)
    } else {
        diff / r.loss_std
    };
    (gap, z)
}

/// Serializes non-finite floats as the strings `"inf"`, `"-inf"` and `"nan"`,
/// which JSON numbers cannot express.
pub(crate) fn float_or_sentinel<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

/// The machine-readable summary of one search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchReport {
    pub best_seed: Seed,
    pub best_loss: f64,
    pub second_best_seed: Seed,
    pub second_best_loss: f64,
    pub mean_loss: f64,
    #[serde(serialize_with = "float_or_sentinel")]
    pub gap_ratio: f64,
    #[serde(serialize_with = "float_or_sentinel")]
    pub z_score: f64,
    pub evaluated: u64,
    pub wall_seconds: f64,
}

impl SeedRanking {
    pub fn report(&self, wall_seconds: f64) -> SearchReport {
        let (gap_ratio, z_score) = confidence_gap(self);
        SearchReport {
            best_seed: self.best.seed,
            best_loss: self.best.loss,
            second_best_seed: self.second_best.seed,
            second_best_loss: self.second_best.loss,
            mean_loss: self.mean_loss,
            gap_ratio,
            z_score,
            evaluated: self.evaluated,
            wall_seconds,
        }
    }
}
