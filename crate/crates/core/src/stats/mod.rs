//! Paired-loss comparisons and seed-distribution analysis.

mod io;
mod wilcoxon;

pub use io::{read_pairs_csv, read_seeds_csv, write_pairs_csv, SeedRecords};
pub use wilcoxon::{
    wilcoxon_signed_rank, wilcoxon_signed_rank_using, WilcoxonMethod, WilcoxonResult, EXACT_LIMIT, EXACT_MAX_N,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::Seed;

/// Loss of one image against same-seed (`ssdm`) and different-seed (`dssm`)
/// noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    pub label: String,
    pub ssdm: f64,
    pub dssm: f64,
}

impl PairedSample {
    pub fn new(label: impl Into<String>, ssdm: f64, dssm: f64) -> Self {
        Self {
            label: label.into(),
            ssdm,
            dssm,
        }
    }

    pub fn delta(&self) -> f64 {
        self.dssm - self.ssdm
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedSummary {
    pub n: usize,
    pub median_ssdm: f64,
    pub median_dssm: f64,
    pub median_delta: f64,
    pub wilcoxon: WilcoxonResult,
}

/// Lower medians of both losses and of their difference, plus the
/// signed-rank test on the differences.
pub fn ssdm_dssm_summary(pairs: &[PairedSample]) -> Result<PairedSummary> {
    let deltas: Vec<f64> = pairs.iter().map(PairedSample::delta).collect();
    let wilcoxon = wilcoxon_signed_rank(&deltas)?;
    let ssdm: Vec<f64> = pairs.iter().map(|p| p.ssdm).collect();
    let dssm: Vec<f64> = pairs.iter().map(|p| p.dssm).collect();
    Ok(PairedSummary {
        n: pairs.len(),
        median_ssdm: wilcoxon::lower_median(&ssdm),
        median_dssm: wilcoxon::lower_median(&dssm),
        median_delta: wilcoxon.median_delta,
        wilcoxon,
    })
}

/// Synthetic losses in the measured regime: same-seed losses around 0.25,
/// different-seed losses around 1.0, each with Gaussian jitter.
pub fn synthetic_pairs(n: usize, rng_seed: u64) -> Vec<PairedSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let ssdm = Normal::new(0.25, 0.05).expect("valid parameters");
    let dssm = Normal::new(1.0, 0.1).expect("valid parameters");
    (0..n)
        .map(|i| {
            let s: f64 = ssdm.sample(&mut rng);
            let d: f64 = dssm.sample(&mut rng);
            PairedSample::new(format!("img{i:04}"), s.max(0.0), d.max(0.0))
        })
        .collect()
}

/// Number of buckets: `floor(log2(seed + 1))` ranges over `0..=64`.
pub const HISTOGRAM_BUCKETS: usize = 65;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedHistogram {
    /// `buckets[b]` counts seeds with `floor(log2(seed + 1)) == b`.
    pub buckets: Vec<u64>,
    pub total: u64,
    /// Share of seeds whose noise depends on at most 32 bits.
    pub effective32_fraction: f64,
}

pub fn log2_bucket(seed: Seed) -> usize {
    (u128::from(seed.raw()) + 1).ilog2() as usize
}

/// Buckets `seeds` by magnitude. A seed counts as effectively 32-bit when it
/// is below `2^32` or, if `cpu_flags` is given, flagged as CPU-generated
/// (the generator truncates it regardless of magnitude).
pub fn seed_histogram(seeds: &[Seed], cpu_flags: Option<&[bool]>) -> Result<SeedHistogram> {
    if seeds.is_empty() {
        return Err(Error::InsufficientData("no seeds".into()));
    }
    if let Some(flags) = cpu_flags {
        if flags.len() != seeds.len() {
            return Err(Error::invalid(format!(
                "{} cpu flags for {} seeds",
                flags.len(),
                seeds.len()
            )));
        }
    }
    let mut buckets = vec![0u64; HISTOGRAM_BUCKETS];
    let mut effective = 0u64;
    for (i, &s) in seeds.iter().enumerate() {
        buckets[log2_bucket(s)] += 1;
        let flagged = cpu_flags.is_some_and(|f| f[i]);
        if s.raw() < 1 << 32 || flagged {
            effective += 1;
        }
    }
    Ok(SeedHistogram {
        buckets,
        total: seeds.len() as u64,
        effective32_fraction: effective as f64 / seeds.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn buckets_by_magnitude() {
        assert_eq!(log2_bucket(Seed(0)), 0);
        assert_eq!(log2_bucket(Seed(1)), 1);
        assert_eq!(log2_bucket(Seed(2)), 1);
        assert_eq!(log2_bucket(Seed(3)), 2);
        assert_eq!(log2_bucket(Seed((1 << 32) - 1)), 32);
        assert_eq!(log2_bucket(Seed(u64::MAX)), 64);
    }

    #[test]
    fn single_zero_seed() {
        let h = seed_histogram(&[Seed(0)], None).unwrap();
        assert_eq!(h.buckets[0], 1);
        assert_eq!(h.effective32_fraction, 1.0);
        assert!(seed_histogram(&[], None).is_err());
        assert!(seed_histogram(&[Seed(1)], Some(&[true, false])).is_err());
    }

    #[test]
    fn cpu_flag_overrides_magnitude() {
        let seeds = [Seed(1 << 40), Seed(1 << 40), Seed(5)];
        let h = seed_histogram(&seeds, Some(&[true, false, false])).unwrap();
        assert!((h.effective32_fraction - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn identical_losses_are_insufficient() {
        let pairs: Vec<_> = (0..10).map(|i| PairedSample::new(i.to_string(), 0.5, 0.5)).collect();
        assert!(matches!(ssdm_dssm_summary(&pairs), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn lower_median_convention() {
        let pairs: Vec<_> = [(1.0, 2.0), (4.0, 3.0), (2.0, 9.0), (3.0, 3.5), (0.5, 0.0), (6.0, 1.0)]
            .iter()
            .map(|&(s, d)| PairedSample::new("", s, d))
            .collect();
        let s = ssdm_dssm_summary(&pairs).unwrap();
        assert_eq!(s.median_ssdm, 2.0);
        assert_eq!(s.median_dssm, 2.0);
        assert_eq!(s.median_delta, -0.5);
    }
}
