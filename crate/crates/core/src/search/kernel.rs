//! Vectorized scoring of many seeds against many targets.
//!
//! Seeds are processed `LANES` at a time with one generator per lane; each
//! position's noise values are compared against every target before moving
//! on, so a batch of targets shares one pass of noise generation. Squared
//! differences are accumulated in `f64` in position order, which makes every
//! loss bitwise equal to [`super::mse_prefix`] on the materialized noise.

use crate::prng::lanes::{stream_normal_lanes, LaneSink, MtLanes, LANES};
use crate::prng::{self, normal::BLOCK};
use crate::seed::Seed;
use crate::simd::{dispatch, Simd, WithSimd};
use crate::tensor::Tensor;

/// Targets stored position-major (`data[p * count + t]`).
pub(crate) struct TargetSet {
    data: Vec<f32>,
    count: usize,
    len: usize,
}

impl TargetSet {
    /// All targets must have the same element count.
    pub fn new(targets: &[&Tensor]) -> Self {
        let count = targets.len();
        let len = targets.first().map_or(0, |t| t.len());
        debug_assert!(targets.iter().all(|t| t.len() == len));
        let mut data = vec![0f32; count * len];
        for (t, target) in targets.iter().enumerate() {
            for (p, &v) in target.data().iter().enumerate() {
                data[p * count + t] = v;
            }
        }
        Self { data, count, len }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn len(&self) -> usize {
        self.len
    }

    fn column(&self, t: usize) -> impl Iterator<Item = f32> + '_ {
        self.data.iter().skip(t).step_by(self.count).copied()
    }
}

/// Per-thread scoring scratch.
pub(crate) struct Scorer {
    lanes: MtLanes,
    acc: Vec<[f64; LANES]>,
    /// Target elements read, summed over all valid lanes.
    pub reads: u64,
}

impl Scorer {
    pub fn new() -> Self {
        Self {
            lanes: MtLanes::new(),
            acc: Vec::new(),
            reads: 0,
        }
    }

    /// Mean squared error over the first `limit` positions for each seed and
    /// target: `out[t][i]` belongs to `seeds[i]` and target `t`. Noise is the
    /// length-`targets.len()` tensor of each seed.
    pub fn score(&mut self, targets: &TargetSet, limit: usize, seeds: &[Seed], out: &mut [Vec<f64>]) {
        debug_assert!(limit >= 1 && limit <= targets.len());
        debug_assert_eq!(out.len(), targets.count());
        for o in out.iter_mut() {
            o.clear();
        }
        if targets.len() < BLOCK {
            self.score_scalar(targets, limit, seeds, out);
        } else {
            dispatch(ScoreGroups {
                scorer: self,
                targets,
                limit,
                seeds,
                out,
            });
        }
    }

    fn score_scalar(&mut self, targets: &TargetSet, limit: usize, seeds: &[Seed], out: &mut [Vec<f64>]) {
        for &seed in seeds {
            let noise = prng::randn(seed, &[targets.len()]).expect("nonempty target");
            for (t, o) in out.iter_mut().enumerate() {
                let sum: f64 = targets
                    .column(t)
                    .zip(noise.data())
                    .take(limit)
                    .map(|(a, &b)| {
                        let d = a as f64 - b as f64;
                        d * d
                    })
                    .sum();
                o.push(sum / limit as f64);
            }
            self.reads += limit as u64;
        }
    }
}

struct ScoreGroups<'a> {
    scorer: &'a mut Scorer,
    targets: &'a TargetSet,
    limit: usize,
    seeds: &'a [Seed],
    out: &'a mut [Vec<f64>],
}

impl WithSimd for ScoreGroups<'_> {
    type Output = ();

    #[inline(always)]
    fn run<S: Simd>(self, s: S) {
        let Self {
            scorer,
            targets,
            limit,
            seeds,
            out,
        } = self;
        for group in seeds.chunks(LANES) {
            let mut lane_seeds = [group[0].effective(); LANES];
            for (slot, sd) in lane_seeds.iter_mut().zip(group) {
                *slot = sd.effective();
            }
            scorer.acc.clear();
            scorer.acc.resize(targets.count(), [0f64; LANES]);
            if targets.count() == 1 {
                // Keeps the accumulator in registers.
                let mut sink = AccumulateOne {
                    data: &targets.data,
                    acc: s.d_splat(0.0),
                };
                stream_normal_lanes(s, &mut scorer.lanes, &lane_seeds, targets.len(), limit, &mut sink);
                s.d_store(sink.acc, &mut scorer.acc[0]);
            } else {
                let mut sink = Accumulate {
                    data: &targets.data,
                    count: targets.count,
                    acc: &mut scorer.acc,
                };
                stream_normal_lanes(s, &mut scorer.lanes, &lane_seeds, targets.len(), limit, &mut sink);
            }
            for (o, acc) in out.iter_mut().zip(&scorer.acc) {
                o.extend(acc[..group.len()].iter().map(|v| v / limit as f64));
            }
            scorer.reads += (limit * group.len()) as u64;
        }
    }
}

struct Accumulate<'a> {
    data: &'a [f32],
    count: usize,
    acc: &'a mut [[f64; LANES]],
}

impl<S: Simd> LaneSink<S> for Accumulate<'_> {
    #[inline(always)]
    fn emit(&mut self, s: S, p: usize, values: S::F) {
        let wide = s.d_widen(values);
        let tgt = &self.data[p * self.count..(p + 1) * self.count];
        for (a, &z) in self.acc.iter_mut().zip(tgt) {
            let d = s.d_sub(wide, s.d_splat(z as f64));
            s.d_store(s.d_add(s.d_load(a), s.d_mul(d, d)), a);
        }
    }
}

struct AccumulateOne<'a, S: Simd> {
    data: &'a [f32],
    acc: S::D,
}

impl<S: Simd> LaneSink<S> for AccumulateOne<'_, S> {
    #[inline(always)]
    fn emit(&mut self, s: S, p: usize, values: S::F) {
        let d = s.d_sub(s.d_widen(values), s.d_splat(self.data[p] as f64));
        self.acc = s.d_add(self.acc, s.d_mul(d, d));
    }
}
