//! Bit-exact reimplementation of the reference CPU noise pipeline: MT19937
//! seeded from the low 32 bits of a 64-bit seed, followed by the framework's
//! Box–Muller normal transform.

mod cephes;
pub(crate) mod lanes;
mod mt;
pub(crate) mod normal;

pub use mt::{RngState, STATE_WORDS};

use crate::error::Result;
use crate::seed::Seed;
use crate::tensor::{element_count, NoiseVector, Tensor};

/// Seeds a fresh generator. Only the low 32 bits of `seed` matter.
pub fn mt_init(seed: Seed) -> RngState {
    RngState::new(seed)
}

/// Draws the next tempered 32-bit word.
pub fn next_u32(state: &mut RngState) -> u32 {
    state.next_u32()
}

/// Standard-normal noise of the given shape, identical to what the reference
/// CPU pipeline produces for a freshly seeded generator.
pub fn randn(seed: Seed, shape: &[usize]) -> Result<NoiseVector> {
    let n = element_count(shape)?;
    let mut state = mt_init(seed);
    let mut data = vec![0f32; n];
    normal::fill_normal(&mut state, &mut data);
    Ok(Tensor::from_parts_unchecked(data, shape.to_vec()))
}

/// Like [`randn`] but continues from an existing generator state, so that
/// successive calls on one state reproduce successive draws.
pub fn randn_from(state: &mut RngState, shape: &[usize]) -> Result<NoiseVector> {
    let n = element_count(shape)?;
    let mut data = vec![0f32; n];
    normal::fill_normal(state, &mut data);
    Ok(Tensor::from_parts_unchecked(data, shape.to_vec()))
}
