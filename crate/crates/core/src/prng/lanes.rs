//! Sixteen MT19937 generators advanced in lockstep, and the normal transform
//! applied across them, written against [`Simd`] so one source serves every
//! vector backend. Each step mirrors the scalar code in `mt` and `cephes`
//! operation for operation, so lane `l` produces exactly what the scalar
//! path produces for seed `l`.

use super::cephes::{
    COSCOF, DP1, DP2, DP3, FOPI, INV_MANT_MASK, LOG_P, LOG_Q1, LOG_Q2, MIN_NORM_POS, SINCOF, SQRTHF, TWO_PI,
};
use super::mt::{INIT_MULT, LOWER_MASK, MATRIX_A, SHIFT, STATE_WORDS, UPPER_MASK};
use super::normal::BLOCK;
use crate::simd::{Simd, WIDTH};

pub(crate) const LANES: usize = WIDTH;
const HALF: usize = BLOCK / 2;
const SIGN: u32 = 0x8000_0000;

/// Word-interleaved state (`state[word][lane]`).
///
/// Twisting is lazy: only as many words as will still be drawn (`remaining`)
/// are regenerated, which saves most of the last twist of a short prefix.
pub(crate) struct MtLanes {
    state: Box<[[u32; LANES]; STATE_WORDS]>,
    index: usize,
    remaining: usize,
}

impl MtLanes {
    pub fn new() -> Self {
        Self {
            state: Box::new([[0u32; LANES]; STATE_WORDS]),
            index: STATE_WORDS,
            remaining: 0,
        }
    }

    /// Re-seeds every lane; `words` is the total number of draws that will follow.
    #[inline(always)]
    pub fn reseed<S: Simd>(&mut self, s: S, seeds: &[u32; LANES], words: usize) {
        let st = &mut *self.state;
        let mult = s.u_splat(INIT_MULT);
        let one = s.u_splat(1);
        let mut prev = s.u_load(seeds);
        let mut i = s.u_splat(0);
        st[0] = *seeds;
        for row in st[1..].iter_mut() {
            i = s.u_add(i, one);
            prev = s.u_add(s.u_mul_lo(mult, s.u_xor(prev, s.u_shr(prev, 30))), i);
            s.u_store(prev, row);
        }
        self.index = STATE_WORDS;
        self.remaining = words;
    }

    #[inline(always)]
    fn twist<S: Simd>(&mut self, s: S) {
        debug_assert!(self.remaining > 0, "drawing past the declared word budget");
        let k = self.remaining.min(STATE_WORDS);
        let st = &mut *self.state;
        let (upper, lower, matrix, one, zero) = (
            s.u_splat(UPPER_MASK),
            s.u_splat(LOWER_MASK),
            s.u_splat(MATRIX_A),
            s.u_splat(1),
            s.u_splat(0),
        );
        // A partial twist of `k` words only reads words that are still valid:
        // indices below 227 read old values at i + 1 and i + 397.
        let mut cur = s.u_load(&st[0]);
        for i in 0..k {
            let next = s.u_load(&st[(i + 1) % STATE_WORDS]);
            let far = s.u_load(&st[(i + SHIFT) % STATE_WORDS]);
            let y = s.u_or(s.u_and(cur, upper), s.u_and(next, lower));
            let mag = s.u_and(s.u_sub(zero, s.u_and(y, one)), matrix);
            s.u_store(s.u_xor(s.u_xor(far, s.u_shr(y, 1)), mag), &mut st[i]);
            cur = next;
        }
        self.index = 0;
    }

    /// The next tempered word of every lane.
    #[inline(always)]
    pub fn next<S: Simd>(&mut self, s: S) -> S::U {
        if self.index >= STATE_WORDS {
            self.twist(s);
        }
        let mut y = s.u_load(&self.state[self.index]);
        self.index += 1;
        self.remaining = self.remaining.saturating_sub(1);
        y = s.u_xor(y, s.u_shr(y, 11));
        y = s.u_xor(y, s.u_and(s.u_shl(y, 7), s.u_splat(0x9d2c_5680)));
        y = s.u_xor(y, s.u_and(s.u_shl(y, 15), s.u_splat(0xefc6_0000)));
        s.u_xor(y, s.u_shr(y, 18))
    }

    /// Discards `n` draws.
    #[inline(always)]
    pub fn skip<S: Simd>(&mut self, s: S, mut n: usize) {
        while n > 0 {
            if self.index >= STATE_WORDS {
                self.twist(s);
            }
            let take = n.min(STATE_WORDS - self.index);
            self.index += take;
            self.remaining = self.remaining.saturating_sub(take);
            n -= take;
        }
    }
}

#[inline(always)]
fn neg<S: Simd>(s: S, a: S::F) -> S::F {
    s.f_from_bits(s.u_xor(s.f_to_bits(a), s.u_splat(SIGN)))
}

#[inline(always)]
fn log<S: Simd>(s: S, v: S::F) -> S::F {
    let zero = s.f_splat(0.0);
    let one = s.f_splat(1.0);
    let valid = s.f_gt(v, zero);
    let bits = s.f_to_bits(s.f_max(v, s.f_from_bits(s.u_splat(MIN_NORM_POS))));
    let mut e = s.f_from_i32(s.u_sub(s.u_shr(bits, 23), s.u_splat(0x7f)));
    e = s.f_add(e, one);
    let m = s.f_from_bits(s.u_or(s.u_and(bits, s.u_splat(INV_MANT_MASK)), s.u_splat(0.5f32.to_bits())));
    let below = s.f_lt(m, s.f_splat(SQRTHF));
    let tmp = s.f_select(below, m, zero);
    let mut x = s.f_sub(m, one);
    e = s.f_sub(e, s.f_select(below, one, zero));
    x = s.f_add(x, tmp);

    let z = s.f_mul(x, x);
    let mut y = s.f_splat(LOG_P[0]);
    for &p in &LOG_P[1..] {
        y = s.f_fma(y, x, s.f_splat(p));
    }
    y = s.f_mul(y, x);
    y = s.f_fma(y, z, s.f_mul(e, s.f_splat(LOG_Q1)));
    y = s.f_fma(neg(s, z), s.f_splat(0.5), y);
    x = s.f_add(x, y);
    x = s.f_fma(e, s.f_splat(LOG_Q2), x);
    s.f_select(valid, x, s.f_splat(f32::NAN))
}

/// Returns `(sin, cos)`.
#[inline(always)]
fn sincos<S: Simd>(s: S, v: S::F) -> (S::F, S::F) {
    let bits = s.f_to_bits(v);
    let sign_in = s.u_and(bits, s.u_splat(SIGN));
    let mut x = s.f_from_bits(s.u_and(bits, s.u_splat(!SIGN)));
    let mut j = s.f_trunc_i32(s.f_mul(x, s.f_splat(FOPI)));
    j = s.u_and(s.u_add(j, s.u_splat(1)), s.u_splat(!1));
    let y = s.f_from_i32(j);
    let swap_sin = s.u_shl(s.u_and(j, s.u_splat(4)), 29);
    let poly_sin = s.u_eq(s.u_and(j, s.u_splat(2)), s.u_splat(0));
    x = s.f_fma(y, s.f_splat(DP1), x);
    x = s.f_fma(y, s.f_splat(DP2), x);
    x = s.f_fma(y, s.f_splat(DP3), x);
    let sign_cos = s.u_shl(s.u_andnot(s.u_sub(j, s.u_splat(2)), s.u_splat(4)), 29);
    let sign_sin = s.u_xor(sign_in, swap_sin);

    let z = s.f_mul(x, x);
    let mut yc = s.f_fma(s.f_splat(COSCOF[0]), z, s.f_splat(COSCOF[1]));
    yc = s.f_fma(yc, z, s.f_splat(COSCOF[2]));
    yc = s.f_mul(yc, z);
    yc = s.f_fma(yc, z, neg(s, s.f_mul(z, s.f_splat(0.5))));
    yc = s.f_add(yc, s.f_splat(1.0));

    let mut ys = s.f_fma(s.f_splat(SINCOF[0]), z, s.f_splat(SINCOF[1]));
    ys = s.f_fma(ys, z, s.f_splat(SINCOF[2]));
    ys = s.f_mul(ys, z);
    ys = s.f_fma(ys, x, x);

    let zero = s.f_splat(0.0);
    let ysin2 = s.f_select(poly_sin, ys, zero);
    let ysin1 = s.f_select(poly_sin, zero, yc);
    let sn = s.f_add(ysin1, ysin2);
    let cs = s.f_add(s.f_sub(yc, ysin1), s.f_sub(ys, ysin2));
    (
        s.f_from_bits(s.u_xor(s.f_to_bits(sn), sign_sin)),
        s.f_from_bits(s.u_xor(s.f_to_bits(cs), sign_cos)),
    )
}

/// Draws one block of 16 uniforms per lane and turns it into normals.
#[inline(always)]
fn load_block<S: Simd>(s: S, lanes: &mut MtLanes) -> [S::F; BLOCK] {
    let mask = s.u_splat(0x00ff_ffff);
    let unit = s.f_splat(1.0 / (1u32 << 24) as f32);
    let mut block = [unit; BLOCK];
    for v in block.iter_mut() {
        *v = s.f_mul(s.f_from_i32(s.u_and(lanes.next(s), mask)), unit);
    }
    let (one, zero) = (s.f_splat(1.0), s.f_splat(0.0));
    for j in 0..HALF {
        let radius = s.f_sqrt(s.f_mul(s.f_splat(-2.0), log(s, s.f_sub(one, block[j]))));
        let (sn, cs) = sincos(s, s.f_mul(s.f_splat(TWO_PI), block[j + HALF]));
        block[j] = s.f_add(s.f_mul(radius, cs), zero);
        block[j + HALF] = s.f_add(s.f_mul(radius, sn), zero);
    }
    block
}

/// Receives streamed noise values, one position at a time.
pub(crate) trait LaneSink<S: Simd> {
    fn emit(&mut self, s: S, position: usize, values: S::F);
}

impl<S: Simd, F: FnMut(usize, &[f32; LANES])> LaneSink<S> for F {
    #[inline(always)]
    fn emit(&mut self, s: S, position: usize, values: S::F) {
        let mut row = [0f32; LANES];
        s.f_store(values, &mut row);
        self(position, &row)
    }
}

/// Streams the first `limit` normals of `randn(seed, n)` for 16 seeds at
/// once, block by block, without materializing them. Positions `0..limit`
/// reach `sink` in increasing order. Requires `16 <= n` and `limit <= n`.
#[inline(always)]
pub(crate) fn stream_normal_lanes<S: Simd, K: LaneSink<S>>(
    s: S,
    lanes: &mut MtLanes,
    seeds: &[u32; LANES],
    n: usize,
    limit: usize,
    sink: &mut K,
) {
    debug_assert!(n >= BLOCK && limit <= n);
    let ragged = !n.is_multiple_of(BLOCK);
    let main_limit = if ragged { n - BLOCK } else { n };
    let main_end = limit.min(main_limit);
    let main_blocks = main_end.div_ceil(BLOCK);
    let needs_tail = ragged && limit > main_limit;
    let words = if needs_tail { n + BLOCK } else { main_blocks * BLOCK };
    lanes.reseed(s, seeds, words);

    for b in 0..main_blocks {
        let block = load_block(s, lanes);
        let base = b * BLOCK;
        for (p, &v) in block.iter().enumerate().take(main_end - base) {
            sink.emit(s, base + p, v);
        }
    }
    if needs_tail {
        // The reference pipeline draws every word up to n, but the values fed
        // by the words after the last main block are overwritten by the tail.
        lanes.skip(s, n - main_blocks * BLOCK);
        let block = load_block(s, lanes);
        for (p, &v) in block.iter().enumerate().take(limit - main_limit) {
            sink.emit(s, main_limit + p, v);
        }
    }
}
