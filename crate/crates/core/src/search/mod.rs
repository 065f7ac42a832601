//! Seed recovery from a target latent: exhaustive range scans, the two-stage
//! prefix filter for the full 32-bit space, confidence statistics, and the
//! gradient-based noise approximation baseline.

mod approx;
mod kernel;
mod ranking;
mod topk;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::Seed;
use crate::tensor::Tensor;

pub use approx::{approximate_noise, random_seed_baseline, ApproxConfig, ApproxResult};
pub use ranking::{confidence_gap, Candidate, ScoredSeed, SearchReport, SearchStats, SeedRanking};

use kernel::{Scorer, TargetSet};
use topk::{Entry, TopK};

/// Number of 32-bit seeds.
pub const FULL32: u64 = 1 << 32;

/// Mean squared error over the first `n` elements, accumulated in `f64` in
/// element order.
pub fn mse_prefix(a: &Tensor, b: &Tensor, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("prefix length must be positive"));
    }
    if n > a.len() || n > b.len() {
        return Err(Error::invalid(format!(
            "prefix {n} exceeds tensor lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let sum: f64 = a.data()[..n]
        .iter()
        .zip(&b.data()[..n])
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    Ok(sum / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchMode {
    /// Seeds `lo..hi`.
    Range { lo: u64, hi: u64 },
    /// Every 32-bit seed.
    Full32,
}

impl SearchMode {
    pub fn bounds(self) -> (u64, u64) {
        match self {
            SearchMode::Range { lo, hi } => (lo, hi),
            SearchMode::Full32 => (0, FULL32),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub mode: SearchMode,
    pub chunk_size: u64,
    pub stage1_len: usize,
    pub stage1_keep: usize,
    pub stage2_len: usize,
    /// Stage-2 leaders re-scored on the full latent.
    pub finalists: usize,
    /// Seeds sampled uniformly from the range to estimate the loss of
    /// incorrect seeds.
    pub baseline_sample: usize,
    pub workers: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            mode: SearchMode::Full32,
            chunk_size: 1 << 16,
            stage1_len: 1 << 13,
            stage1_keep: 1 << 13,
            stage2_len: 1 << 15,
            finalists: 32,
            baseline_sample: 256,
            workers: default_workers(),
        }
    }
}

/// Available hardware threads, at least one.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl SearchConfig {
    pub fn validate(&self, target_len: usize) -> Result<()> {
        let (lo, hi) = self.mode.bounds();
        if lo >= hi {
            return Err(Error::invalid(format!("empty seed range {lo}..{hi}")));
        }
        if self.stage1_len == 0 || self.stage1_len > self.stage2_len {
            return Err(Error::invalid(format!(
                "need 0 < stage1_len ({}) <= stage2_len ({})",
                self.stage1_len, self.stage2_len
            )));
        }
        if self.stage2_len > target_len {
            return Err(Error::invalid(format!(
                "target has {target_len} elements, fewer than stage2_len {}",
                self.stage2_len
            )));
        }
        for (name, v) in [
            ("chunk_size", self.chunk_size as usize),
            ("stage1_keep", self.stage1_keep),
            ("finalists", self.finalists),
            ("baseline_sample", self.baseline_sample),
            ("workers", self.workers),
        ] {
            if v == 0 {
                return Err(Error::invalid(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

fn check_targets(targets: &[&Tensor]) -> Result<usize> {
    let first = targets.first().ok_or_else(|| Error::invalid("no targets"))?;
    let n = first.len();
    if n == 0 {
        return Err(Error::invalid("target is empty"));
    }
    if let Some(t) = targets.iter().find(|t| t.len() != n) {
        return Err(Error::invalid(format!(
            "batched targets differ in length: {n} vs {}",
            t.len()
        )));
    }
    Ok(n)
}

pub(crate) fn build_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} worker threads: {e}")))
}

/// Runs `work` over consecutive chunks of `lo..hi` on the pool and feeds the
/// results to `fold` strictly in chunk order, a few waves at a time so memory
/// stays bounded. The outcome is therefore independent of the worker count.
fn for_each_chunk<R, W, F>(pool: &rayon::ThreadPool, lo: u64, hi: u64, chunk: u64, work: W, mut fold: F)
where
    R: Send,
    W: Fn(&mut Scorer, u64, u64) -> R + Sync,
    F: FnMut(R),
{
    let chunks = (hi - lo).div_ceil(chunk);
    let wave = (pool.current_num_threads() as u64 * 4).max(1);
    let mut start = 0;
    while start < chunks {
        let end = (start + wave).min(chunks);
        let results: Vec<R> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map_init(Scorer::new, |scorer, i| {
                    let a = lo + i * chunk;
                    let b = hi.min(a.saturating_add(chunk));
                    work(scorer, a, b)
                })
                .collect()
        });
        results.into_iter().for_each(&mut fold);
        start = end;
    }
}

/// Scores an explicit seed list against `targets` in parallel, preserving order.
fn score_seeds(pool: &rayon::ThreadPool, targets: &TargetSet, limit: usize, seeds: &[Seed]) -> (Vec<Vec<f64>>, u64) {
    const SLICE: usize = 256;
    let parts: Vec<(Vec<Vec<f64>>, u64)> = pool.install(|| {
        seeds
            .par_chunks(SLICE)
            .map_init(Scorer::new, |scorer, part| {
                let before = scorer.reads;
                let mut out = vec![Vec::with_capacity(part.len()); targets.count()];
                scorer.score(targets, limit, part, &mut out);
                (out, scorer.reads - before)
            })
            .collect()
    });
    let mut merged = vec![Vec::with_capacity(seeds.len()); targets.count()];
    let mut reads = 0;
    for (part, r) in parts {
        for (m, p) in merged.iter_mut().zip(part) {
            m.extend(p);
        }
        reads += r;
    }
    (merged, reads)
}

/// Count, mean and sum of squared deviations, combined pairwise.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn of(xs: &[f64]) -> Self {
        let mut m = Moments::default();
        for &x in xs {
            m.n += 1;
            let d = x - m.mean;
            m.mean += d / m.n as f64;
            m.m2 += d * (x - m.mean);
        }
        m
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n as f64 / n as f64,
            m2: self.m2 + o.m2 + d * d * (self.n as f64 * o.n as f64) / n as f64,
        }
    }

    fn std(self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.m2 / self.n as f64).sqrt()
        }
    }
}

const SCAN_KEEP: usize = 32;

/// Scores every seed in `lo..hi` on the full target. See [`scan_range_batch`].
pub fn scan_range(target: &Tensor, lo: Seed, hi: Seed, workers: usize) -> Result<SeedRanking> {
    Ok(scan_range_batch(&[target], lo, hi, workers)?.remove(0))
}

/// Full-vector MSE of every seed in `lo..hi` against each target, sharing the
/// noise generation between targets. Rankings are ascending by loss with ties
/// broken by the smaller seed; mean and spread cover every evaluated seed.
pub fn scan_range_batch(targets: &[&Tensor], lo: Seed, hi: Seed, workers: usize) -> Result<Vec<SeedRanking>> {
    let n = check_targets(targets)?;
    let (lo, hi) = (lo.raw(), hi.raw());
    if lo >= hi {
        return Err(Error::invalid(format!("empty seed range {lo}..{hi}")));
    }
    if hi - lo < 2 {
        return Err(Error::invalid("a ranking needs at least two seeds"));
    }
    if workers == 0 {
        return Err(Error::invalid("workers must be positive"));
    }
    let pool = build_pool(workers)?;
    let set = TargetSet::new(targets);
    let t_count = targets.len();
    let started = Instant::now();

    let mut tops: Vec<TopK> = (0..t_count).map(|_| TopK::new(SCAN_KEEP)).collect();
    let mut moments = vec![Moments::default(); t_count];
    let mut reads = 0u64;
    for_each_chunk(
        &pool,
        lo,
        hi,
        1 << 16,
        |scorer, a, b| {
            let seeds: Vec<Seed> = (a..b).map(Seed).collect();
            let before = scorer.reads;
            let mut out = vec![Vec::with_capacity(seeds.len()); t_count];
            scorer.score(&set, n, &seeds, &mut out);
            let parts: Vec<(TopK, Moments)> = out
                .iter()
                .map(|losses| {
                    let mut top = TopK::new(SCAN_KEEP);
                    for (&loss, s) in losses.iter().zip(a..b) {
                        top.push(Entry { loss, seed: s });
                    }
                    (top, Moments::of(losses))
                })
                .collect();
            (parts, scorer.reads - before)
        },
        |(parts, r)| {
            for ((top, m), (gtop, gm)) in parts.into_iter().zip(tops.iter_mut().zip(moments.iter_mut())) {
                gtop.merge(top);
                *gm = gm.merge(m);
            }
            reads += r;
        },
    );
    let seconds = started.elapsed().as_secs_f64();

    Ok(tops
        .into_iter()
        .zip(moments)
        .map(|(top, m)| {
            let top_k: Vec<Candidate> = top
                .into_sorted()
                .into_iter()
                .map(|e| Candidate {
                    seed: Seed(e.seed),
                    stage1_loss: None,
                    stage2_loss: None,
                    full_loss: e.loss,
                })
                .collect();
            SeedRanking {
                best: ScoredSeed::from(&top_k[0]),
                second_best: ScoredSeed::from(&top_k[1]),
                mean_loss: m.mean,
                loss_std: m.std(),
                top_k,
                evaluated: hi - lo,
                stats: SearchStats {
                    seeds_evaluated: hi - lo,
                    full_reads: reads,
                    full_seconds: seconds,
                    ..SearchStats::default()
                },
            }
        })
        .collect())
}

/// Two-stage search for one target. See [`two_stage_search_batch`].
pub fn two_stage_search(target: &Tensor, cfg: &SearchConfig) -> Result<SeedRanking> {
    Ok(two_stage_search_batch(&[target], cfg)?.remove(0))
}

/// Two-stage search over `cfg.mode`, batched over targets of equal length.
///
/// Stage 1 scores every seed on the first `stage1_len` elements chunk by
/// chunk and retains the global `stage1_keep` best. Stage 2 re-scores those
/// on `stage2_len` elements; the `finalists` best are then scored on the full
/// target. A uniform sample of `baseline_sample` seeds, scored on the full
/// target, supplies the incorrect-seed loss distribution (`mean_loss`,
/// `loss_std`). `best` and `second_best` are the two lowest full losses over
/// finalists and sample.
pub fn two_stage_search_batch(targets: &[&Tensor], cfg: &SearchConfig) -> Result<Vec<SeedRanking>> {
    let n = check_targets(targets)?;
    cfg.validate(n)?;
    let (lo, hi) = cfg.mode.bounds();
    if hi - lo < 2 {
        return Err(Error::invalid("a ranking needs at least two seeds"));
    }
    let pool = build_pool(cfg.workers)?;
    let set = TargetSet::new(targets);
    let t_count = targets.len();

    // Stage 1.
    let started = Instant::now();
    let keep = cfg.stage1_keep;
    let mut kept: Vec<TopK> = (0..t_count).map(|_| TopK::new(keep)).collect();
    let mut stage1_reads = 0u64;
    for_each_chunk(
        &pool,
        lo,
        hi,
        cfg.chunk_size,
        |scorer, a, b| {
            let seeds: Vec<Seed> = (a..b).map(Seed).collect();
            let before = scorer.reads;
            let mut out = vec![Vec::with_capacity(seeds.len()); t_count];
            scorer.score(&set, cfg.stage1_len, &seeds, &mut out);
            let tops: Vec<TopK> = out
                .iter()
                .map(|losses| {
                    let mut top = TopK::new(keep);
                    for (&loss, s) in losses.iter().zip(a..b) {
                        top.push(Entry { loss, seed: s });
                    }
                    top
                })
                .collect();
            (tops, scorer.reads - before)
        },
        |(tops, r)| {
            for (g, t) in kept.iter_mut().zip(tops) {
                g.merge(t);
            }
            stage1_reads += r;
        },
    );
    let stage1_seconds = started.elapsed().as_secs_f64();

    // Baseline sample, shared by all targets.
    let started = Instant::now();
    let sample = baseline_seeds(lo, hi, cfg.baseline_sample);
    let (sample_losses, sample_reads) = score_seeds(&pool, &set, n, &sample);

    let mut rankings = Vec::with_capacity(t_count);
    let mut stage2_seconds = 0.0;
    for (t, top) in kept.into_iter().enumerate() {
        let stage1 = top.into_sorted();

        // Stage 2.
        let s2_started = Instant::now();
        let single = TargetSet::new(&[targets[t]]);
        let seeds: Vec<Seed> = stage1.iter().map(|e| Seed(e.seed)).collect();
        let (s2, stage2_reads) = score_seeds(&pool, &single, cfg.stage2_len, &seeds);
        let mut s2_ranked: Vec<(Entry, f64)> = stage1
            .iter()
            .zip(&s2[0])
            .map(|(e1, &loss)| (Entry { loss, seed: e1.seed }, e1.loss))
            .collect();
        s2_ranked.sort_unstable_by_key(|e| e.0);
        s2_ranked.truncate(cfg.finalists);
        stage2_seconds += s2_started.elapsed().as_secs_f64();

        // Full-length rescoring of the finalists.
        let finalist_seeds: Vec<Seed> = s2_ranked.iter().map(|(e, _)| Seed(e.seed)).collect();
        let (full, finalist_reads) = score_seeds(&pool, &single, n, &finalist_seeds);
        let top_k: Vec<Candidate> = s2_ranked
            .iter()
            .zip(&full[0])
            .map(|((e2, l1), &loss)| Candidate {
                seed: Seed(e2.seed),
                stage1_loss: Some(*l1),
                stage2_loss: Some(e2.loss),
                full_loss: loss,
            })
            .collect();

        let mut pool_entries: Vec<Entry> = top_k.iter().map(Candidate::entry).collect();
        pool_entries.extend(
            sample
                .iter()
                .zip(&sample_losses[t])
                .map(|(s, &loss)| Entry { loss, seed: s.raw() }),
        );
        pool_entries.sort_unstable();
        pool_entries.dedup_by_key(|e| e.seed);
        if pool_entries.len() < 2 {
            return Err(Error::invalid(
                "finalists and baseline sample cover fewer than two seeds",
            ));
        }
        let m = Moments::of(&sample_losses[t]);
        rankings.push(SeedRanking {
            best: ScoredSeed::from(pool_entries[0]),
            second_best: ScoredSeed::from(pool_entries[1]),
            mean_loss: m.mean,
            loss_std: m.std(),
            top_k,
            evaluated: hi - lo,
            stats: SearchStats {
                seeds_evaluated: hi - lo,
                stage1_reads,
                stage2_reads,
                full_reads: finalist_reads + sample_reads,
                stage1_seconds,
                stage2_seconds: 0.0,
                full_seconds: 0.0,
            },
        });
    }
    let rest = started.elapsed().as_secs_f64();
    for r in &mut rankings {
        r.stats.stage2_seconds = stage2_seconds / t_count as f64;
        r.stats.full_seconds = (rest - stage2_seconds) / t_count as f64;
    }
    Ok(rankings)
}

/// A deterministic uniform sample without replacement from `lo..hi`, sorted.
fn baseline_seeds(lo: u64, hi: u64, amount: usize) -> Vec<Seed> {
    let span = hi - lo;
    if span <= amount as u64 {
        return (lo..hi).map(Seed).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(lo ^ hi.rotate_left(32) ^ 0x5eed_5ca9);
    let mut picked: Vec<u64> = if let Ok(span) = usize::try_from(span) {
        rand::seq::index::sample(&mut rng, span, amount)
            .into_iter()
            .map(|i| lo + i as u64)
            .collect()
    } else {
        let mut set = std::collections::BTreeSet::new();
        while set.len() < amount {
            set.insert(lo + rand::Rng::random_range(&mut rng, 0..span));
        }
        set.into_iter().collect()
    };
    picked.sort_unstable();
    picked.into_iter().map(Seed).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prng::randn;

    #[test]
    fn mse_prefix_basics() {
        let v = randn(Seed(1), &[64]).unwrap();
        assert_eq!(mse_prefix(&v, &v, 64).unwrap(), 0.0);
        let ones = Tensor::from_vec(vec![1.0; 8]).unwrap();
        let zeros = Tensor::from_vec(vec![0.0; 8]).unwrap();
        assert_eq!(mse_prefix(&ones, &zeros, 8).unwrap(), 1.0);
        assert!(mse_prefix(&ones, &zeros, 0).is_err());
        assert!(mse_prefix(&ones, &zeros, 9).is_err());
    }

    #[test]
    fn kernel_matches_mse_prefix_bitwise() {
        for n in [7usize, 16, 40, 300] {
            let targets: Vec<Tensor> = (0..3).map(|i| randn(Seed(1000 + i), &[n]).unwrap()).collect();
            let refs: Vec<&Tensor> = targets.iter().collect();
            let set = TargetSet::new(&refs);
            let seeds: Vec<Seed> = (0..37).map(|s| Seed(s * 7919)).collect();
            for limit in [1, n / 2 + 1, n] {
                let mut out = vec![Vec::new(); 3];
                let mut scorer = Scorer::new();
                scorer.score(&set, limit, &seeds, &mut out);
                assert_eq!(scorer.reads, (limit * seeds.len()) as u64);
                for (t, target) in targets.iter().enumerate() {
                    for (i, &s) in seeds.iter().enumerate() {
                        let want = mse_prefix(target, &randn(s, &[n]).unwrap(), limit).unwrap();
                        assert_eq!(out[t][i].to_bits(), want.to_bits(), "n {n} limit {limit} seed {s}");
                    }
                }
            }
        }
    }

    #[test]
    fn scan_finds_planted_seed() {
        let target = randn(Seed(1234), &[256]).unwrap();
        let r = scan_range(&target, Seed(1000), Seed(1500), 2).unwrap();
        assert_eq!(r.best.seed, Seed(1234));
        assert_eq!(r.best.loss, 0.0);
        assert!(r.mean_loss > r.best.loss);
        assert_eq!(r.evaluated, 500);
    }

    #[test]
    fn two_stage_finds_planted_seed() {
        let target = randn(Seed(777), &[512]).unwrap();
        let cfg = SearchConfig {
            mode: SearchMode::Range { lo: 0, hi: 5000 },
            chunk_size: 1000,
            stage1_len: 32,
            stage1_keep: 50,
            stage2_len: 128,
            finalists: 8,
            baseline_sample: 64,
            workers: 2,
        };
        let r = two_stage_search(&target, &cfg).unwrap();
        assert_eq!(r.best.seed, Seed(777));
        assert_eq!(r.stats.stage1_reads, 5000 * 32);
        assert_eq!(r.stats.stage2_reads, 50 * 128);
        assert!(r.mean_loss >= r.best.loss);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SearchConfig::default();
        assert!(cfg.validate(1 << 16).is_ok());
        assert!(cfg.validate(1 << 14).is_err());
        cfg.stage1_len = cfg.stage2_len + 1;
        assert!(cfg.validate(1 << 16).is_err());
    }

    #[test]
    fn baseline_sample_is_deterministic_and_in_range() {
        let a = baseline_seeds(10, 1_000_000, 100);
        assert_eq!(a, baseline_seeds(10, 1_000_000, 100));
        assert_eq!(a.len(), 100);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert!(a.iter().all(|s| (10..1_000_000).contains(&s.raw())));
        assert_eq!(baseline_seeds(0, 5, 100).len(), 5);
    }
}
