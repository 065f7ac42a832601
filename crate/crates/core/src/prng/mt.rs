//! MT19937 as used by the framework's CPU generator.
//!
//! The seeding recurrence, twist and tempering are the canonical ones; the
//! only framework-specific detail is that the 64-bit seed is masked to its
//! low 32 bits before it is written into state word 0.

use crate::seed::Seed;

pub const STATE_WORDS: usize = 624;
pub(super) const SHIFT: usize = 397;
pub(super) const MATRIX_A: u32 = 0x9908_b0df;
pub(super) const UPPER_MASK: u32 = 0x8000_0000;
pub(super) const LOWER_MASK: u32 = 0x7fff_ffff;
pub(super) const INIT_MULT: u32 = 1_812_433_253;

#[inline(always)]
fn seed_step(prev: u32, i: u32) -> u32 {
    INIT_MULT.wrapping_mul(prev ^ (prev >> 30)).wrapping_add(i)
}

#[inline(always)]
fn twist_word(cur: u32, next: u32, far: u32) -> u32 {
    let y = (cur & UPPER_MASK) | (next & LOWER_MASK);
    far ^ (y >> 1) ^ ((y & 1).wrapping_neg() & MATRIX_A)
}

#[inline(always)]
pub(crate) fn temper(mut y: u32) -> u32 {
    y ^= y >> 11;
    y ^= (y << 7) & 0x9d2c_5680;
    y ^= (y << 15) & 0xefc6_0000;
    y ^ (y >> 18)
}

/// Generator state: 624 words, a read position, and the spare normal cached
/// by the double-precision Box–Muller path.
#[derive(Clone)]
pub struct RngState {
    state: [u32; STATE_WORDS],
    index: usize,
    pub(crate) cached_normal: Option<f64>,
}

impl std::fmt::Debug for RngState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RngState")
            .field("state[0]", &self.state[0])
            .field("index", &self.index)
            .field("cached_normal", &self.cached_normal)
            .finish()
    }
}

impl RngState {
    /// Seeds the generator. Only `seed.effective()` is used.
    pub fn new(seed: Seed) -> Self {
        let mut state = [0u32; STATE_WORDS];
        state[0] = seed.effective();
        for i in 1..STATE_WORDS {
            state[i] = seed_step(state[i - 1], i as u32);
        }
        Self {
            state,
            index: STATE_WORDS,
            cached_normal: None,
        }
    }

    pub fn words(&self) -> &[u32; STATE_WORDS] {
        &self.state
    }

    pub fn index(&self) -> usize {
        self.index
    }

    fn twist(&mut self) {
        let s = &mut self.state;
        for i in 0..STATE_WORDS {
            let next = s[(i + 1) % STATE_WORDS];
            s[i] = twist_word(s[i], next, s[(i + SHIFT) % STATE_WORDS]);
        }
        self.index = 0;
    }

    #[inline]
    pub fn next_u32(&mut self) -> u32 {
        if self.index >= STATE_WORDS {
            self.twist();
        }
        let y = self.state[self.index];
        self.index += 1;
        temper(y)
    }

    /// Two consecutive draws, the first one in the high half.
    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let hi = self.next_u32() as u64;
        let lo = self.next_u32() as u64;
        (hi << 32) | lo
    }
}
