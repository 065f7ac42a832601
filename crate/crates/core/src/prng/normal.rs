//! Uniform-to-normal transforms reproducing the reference CPU pipeline.
//!
//! Two paths exist, selected by element count:
//!
//! * `n >= 16`: every element first receives a 24-bit float uniform (one
//!   32-bit draw each). Blocks of 16 are then transformed in place by a
//!   single-precision Box–Muller: `u[j]` supplies the radius and `u[j + 8]`
//!   the angle for `j < 8`. When `n` is not a multiple of 16, 16 *fresh*
//!   uniforms overwrite positions `n - 16 .. n` and that window is transformed
//!   again, so the tail comes entirely from the extra draws.
//! * `n < 16`: each element is a double-precision Box–Muller normal narrowed
//!   to `f32`. Uniforms take 53 bits of a 64-bit draw built from two words
//!   (first word high). Each pair yields `r cos θ`; `r sin θ` is cached and
//!   returned by the next call, so an odd count leaves a spare in the state.

use super::cephes;
use super::mt::RngState;

pub(crate) const BLOCK: usize = 16;
const F32_UNIT: f32 = 1.0 / (1u32 << 24) as f32;
const F64_UNIT: f64 = 1.0 / (1u64 << 53) as f64;

#[inline(always)]
pub(crate) fn uniform_f32(word: u32) -> f32 {
    (word & 0x00ff_ffff) as f32 * F32_UNIT
}

#[inline]
fn uniform_f64(state: &mut RngState) -> f64 {
    (state.next_u64() & ((1u64 << 53) - 1)) as f64 * F64_UNIT
}

/// One double-precision normal, consuming the cached spare first.
pub(crate) fn normal_f64(state: &mut RngState) -> f64 {
    if let Some(spare) = state.cached_normal.take() {
        return spare;
    }
    let u1 = uniform_f64(state);
    let u2 = uniform_f64(state);
    let r = (-2.0 * (-u2).ln_1p()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u1;
    state.cached_normal = Some(r * theta.sin());
    r * theta.cos() + 0.0
}

#[inline(always)]
fn transform_blocks_generic(data: &mut [f32]) {
    let n = data.len();
    let mut chunks = data[..n - n % BLOCK].chunks_exact_mut(BLOCK);
    for chunk in &mut chunks {
        let block: &mut [f32; BLOCK] = chunk.try_into().expect("exact chunk");
        cephes::box_muller_16(block);
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2,fma")]
unsafe fn transform_blocks_avx2(data: &mut [f32]) {
    transform_blocks_generic(data)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f,avx512dq,avx2,fma")]
unsafe fn transform_blocks_avx512(data: &mut [f32]) {
    transform_blocks_generic(data)
}

/// Transforms every complete 16-block of `data` in place.
fn transform_blocks(data: &mut [f32]) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx512f") && std::arch::is_x86_feature_detected!("avx512dq") {
            // SAFETY: the required features were detected at runtime.
            return unsafe { transform_blocks_avx512(data) };
        }
        if std::arch::is_x86_feature_detected!("avx2") && std::arch::is_x86_feature_detected!("fma") {
            // SAFETY: as above.
            return unsafe { transform_blocks_avx2(data) };
        }
    }
    transform_blocks_generic(data)
}

/// Fills `out` with the normals the reference pipeline produces from `state`.
pub(crate) fn fill_normal(state: &mut RngState, out: &mut [f32]) {
    let n = out.len();
    if n < BLOCK {
        for v in out.iter_mut() {
            *v = normal_f64(state) as f32;
        }
        return;
    }
    for v in out.iter_mut() {
        *v = uniform_f32(state.next_u32());
    }
    transform_blocks(out);
    if !n.is_multiple_of(BLOCK) {
        let tail = &mut out[n - BLOCK..];
        for v in tail.iter_mut() {
            *v = uniform_f32(state.next_u32());
        }
        transform_blocks(tail);
    }
}
