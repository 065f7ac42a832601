//! A 16-lane vector vocabulary with AVX-512, AVX2 and portable backends.
//!
//! Kernels are written once against [`Simd`] and instantiated per backend
//! inside a `target_feature` function by [`dispatch`], so every operation
//! inlines to native instructions. Backend values are zero-sized tokens that
//! can only be obtained after runtime feature detection.

pub(crate) const WIDTH: usize = 16;

pub(crate) trait Simd: Copy {
    /// 16 × f32.
    type F: Copy;
    /// 16 × u32 (also read as i32 by the conversions).
    type U: Copy;
    /// 16 lane predicates.
    type M: Copy;
    /// 16 × f64.
    type D: Copy;

    fn u_splat(self, x: u32) -> Self::U;
    fn u_load(self, x: &[u32; WIDTH]) -> Self::U;
    fn u_add(self, a: Self::U, b: Self::U) -> Self::U;
    fn u_sub(self, a: Self::U, b: Self::U) -> Self::U;
    fn u_mul_lo(self, a: Self::U, b: Self::U) -> Self::U;
    fn u_and(self, a: Self::U, b: Self::U) -> Self::U;
    fn u_or(self, a: Self::U, b: Self::U) -> Self::U;
    fn u_xor(self, a: Self::U, b: Self::U) -> Self::U;
    /// `!a & b`.
    fn u_andnot(self, a: Self::U, b: Self::U) -> Self::U;
    fn u_shr(self, a: Self::U, n: u32) -> Self::U;
    fn u_shl(self, a: Self::U, n: u32) -> Self::U;
    fn u_eq(self, a: Self::U, b: Self::U) -> Self::M;
    fn u_store(self, a: Self::U, out: &mut [u32; WIDTH]);

    fn f_splat(self, x: f32) -> Self::F;
    fn f_add(self, a: Self::F, b: Self::F) -> Self::F;
    fn f_sub(self, a: Self::F, b: Self::F) -> Self::F;
    fn f_mul(self, a: Self::F, b: Self::F) -> Self::F;
    /// `a * b + c` with a single rounding.
    fn f_fma(self, a: Self::F, b: Self::F, c: Self::F) -> Self::F;
    fn f_sqrt(self, a: Self::F) -> Self::F;
    fn f_max(self, a: Self::F, b: Self::F) -> Self::F;
    fn f_lt(self, a: Self::F, b: Self::F) -> Self::M;
    fn f_gt(self, a: Self::F, b: Self::F) -> Self::M;
    /// `m ? a : b` per lane.
    fn f_select(self, m: Self::M, a: Self::F, b: Self::F) -> Self::F;
    fn f_from_bits(self, a: Self::U) -> Self::F;
    fn f_to_bits(self, a: Self::F) -> Self::U;
    /// Signed integer to float.
    fn f_from_i32(self, a: Self::U) -> Self::F;
    /// Float to signed integer, truncating.
    fn f_trunc_i32(self, a: Self::F) -> Self::U;
    fn f_store(self, a: Self::F, out: &mut [f32; WIDTH]);

    fn d_splat(self, x: f64) -> Self::D;
    fn d_widen(self, a: Self::F) -> Self::D;
    fn d_add(self, a: Self::D, b: Self::D) -> Self::D;
    fn d_sub(self, a: Self::D, b: Self::D) -> Self::D;
    fn d_mul(self, a: Self::D, b: Self::D) -> Self::D;
    fn d_load(self, x: &[f64; WIDTH]) -> Self::D;
    fn d_store(self, a: Self::D, out: &mut [f64; WIDTH]);
}

/// A computation that can run on any backend.
pub(crate) trait WithSimd {
    type Output;
    fn run<S: Simd>(self, s: S) -> Self::Output;
}

/// Runs `w` on the widest backend the CPU supports.
pub(crate) fn dispatch<W: WithSimd>(w: W) -> W::Output {
    #[cfg(target_arch = "x86_64")]
    {
        if x86::Avx512::detect() {
            // SAFETY: the features were detected at runtime.
            return unsafe { x86::run_avx512(w) };
        }
        if x86::Avx2::detect() {
            // SAFETY: as above.
            return unsafe { x86::run_avx2(w) };
        }
    }
    w.run(Portable)
}

/// Name of the backend [`dispatch`] selects.
pub fn backend_name() -> &'static str {
    #[cfg(target_arch = "x86_64")]
    {
        if x86::Avx512::detect() {
            return "avx512";
        }
        if x86::Avx2::detect() {
            return "avx2";
        }
    }
    "portable"
}

/// Plain arrays; correct everywhere, fast nowhere.
#[derive(Clone, Copy)]
pub(crate) struct Portable;

macro_rules! lanes {
    ($i:ident => $e:expr) => {
        std::array::from_fn(|$i: usize| $e)
    };
}

impl Simd for Portable {
    type F = [f32; WIDTH];
    type U = [u32; WIDTH];
    type M = [bool; WIDTH];
    type D = [f64; WIDTH];

    fn u_splat(self, x: u32) -> Self::U {
        [x; WIDTH]
    }
    fn u_load(self, x: &[u32; WIDTH]) -> Self::U {
        *x
    }
    fn u_add(self, a: Self::U, b: Self::U) -> Self::U {
        lanes!(i => a[i].wrapping_add(b[i]))
    }
    fn u_sub(self, a: Self::U, b: Self::U) -> Self::U {
        lanes!(i => a[i].wrapping_sub(b[i]))
    }
    fn u_mul_lo(self, a: Self::U, b: Self::U) -> Self::U {
        lanes!(i => a[i].wrapping_mul(b[i]))
    }
    fn u_and(self, a: Self::U, b: Self::U) -> Self::U {
        lanes!(i => a[i] & b[i])
    }
    fn u_or(self, a: Self::U, b: Self::U) -> Self::U {
        lanes!(i => a[i] | b[i])
    }
    fn u_xor(self, a: Self::U, b: Self::U) -> Self::U {
        lanes!(i => a[i] ^ b[i])
    }
    fn u_andnot(self, a: Self::U, b: Self::U) -> Self::U {
        lanes!(i => !a[i] & b[i])
    }
    fn u_shr(self, a: Self::U, n: u32) -> Self::U {
        lanes!(i => a[i] >> n)
    }
    fn u_shl(self, a: Self::U, n: u32) -> Self::U {
        lanes!(i => a[i] << n)
    }
    fn u_eq(self, a: Self::U, b: Self::U) -> Self::M {
        lanes!(i => a[i] == b[i])
    }
    fn u_store(self, a: Self::U, out: &mut [u32; WIDTH]) {
        *out = a;
    }

    fn f_splat(self, x: f32) -> Self::F {
        [x; WIDTH]
    }
    fn f_add(self, a: Self::F, b: Self::F) -> Self::F {
        lanes!(i => a[i] + b[i])
    }
    fn f_sub(self, a: Self::F, b: Self::F) -> Self::F {
        lanes!(i => a[i] - b[i])
    }
    fn f_mul(self, a: Self::F, b: Self::F) -> Self::F {
        lanes!(i => a[i] * b[i])
    }
    fn f_fma(self, a: Self::F, b: Self::F, c: Self::F) -> Self::F {
        lanes!(i => a[i].mul_add(b[i], c[i]))
    }
    fn f_sqrt(self, a: Self::F) -> Self::F {
        lanes!(i => a[i].sqrt())
    }
    fn f_max(self, a: Self::F, b: Self::F) -> Self::F {
        // The x86 rule: the second operand wins unless a > b.
        lanes!(i => if a[i] > b[i] { a[i] } else { b[i] })
    }
    fn f_lt(self, a: Self::F, b: Self::F) -> Self::M {
        lanes!(i => a[i] < b[i])
    }
    fn f_gt(self, a: Self::F, b: Self::F) -> Self::M {
        lanes!(i => a[i] > b[i])
    }
    fn f_select(self, m: Self::M, a: Self::F, b: Self::F) -> Self::F {
        lanes!(i => if m[i] { a[i] } else { b[i] })
    }
    fn f_from_bits(self, a: Self::U) -> Self::F {
        lanes!(i => f32::from_bits(a[i]))
    }
    fn f_to_bits(self, a: Self::F) -> Self::U {
        lanes!(i => a[i].to_bits())
    }
    fn f_from_i32(self, a: Self::U) -> Self::F {
        lanes!(i => a[i] as i32 as f32)
    }
    fn f_trunc_i32(self, a: Self::F) -> Self::U {
        lanes!(i => a[i] as i32 as u32)
    }
    fn f_store(self, a: Self::F, out: &mut [f32; WIDTH]) {
        *out = a;
    }

    fn d_splat(self, x: f64) -> Self::D {
        [x; WIDTH]
    }
    fn d_widen(self, a: Self::F) -> Self::D {
        lanes!(i => a[i] as f64)
    }
    fn d_add(self, a: Self::D, b: Self::D) -> Self::D {
        lanes!(i => a[i] + b[i])
    }
    fn d_sub(self, a: Self::D, b: Self::D) -> Self::D {
        lanes!(i => a[i] - b[i])
    }
    fn d_mul(self, a: Self::D, b: Self::D) -> Self::D {
        lanes!(i => a[i] * b[i])
    }
    fn d_load(self, x: &[f64; WIDTH]) -> Self::D {
        *x
    }
    fn d_store(self, a: Self::D, out: &mut [f64; WIDTH]) {
        *out = a;
    }
}

#[cfg(target_arch = "x86_64")]
mod x86 {
    use super::{Simd, WithSimd, WIDTH};
    use std::arch::x86_64::*;

    #[target_feature(enable = "avx512f,avx512dq,avx2,fma")]
    pub(super) unsafe fn run_avx512<W: WithSimd>(w: W) -> W::Output {
        w.run(Avx512(()))
    }

    #[target_feature(enable = "avx2,fma")]
    pub(super) unsafe fn run_avx2<W: WithSimd>(w: W) -> W::Output {
        w.run(Avx2(()))
    }

    #[derive(Clone, Copy)]
    pub(crate) struct Avx512(());

    impl Avx512 {
        pub fn detect() -> bool {
            is_x86_feature_detected!("avx512f")
                && is_x86_feature_detected!("avx512dq")
                && is_x86_feature_detected!("fma")
        }
    }

    #[derive(Clone, Copy)]
    pub(crate) struct Avx2(());

    impl Avx2 {
        pub fn detect() -> bool {
            is_x86_feature_detected!("avx2") && is_x86_feature_detected!("fma")
        }
    }

    // SAFETY (both impls): a token exists only inside `run_avx512` /
    // `run_avx2`, which are entered after feature detection, and every method
    // is inlined into that context.
    impl Simd for Avx512 {
        type F = __m512;
        type U = __m512i;
        type M = __mmask16;
        type D = [__m512d; 2];

        #[inline(always)]
        fn u_splat(self, x: u32) -> Self::U {
            unsafe { _mm512_set1_epi32(x as i32) }
        }
        #[inline(always)]
        fn u_load(self, x: &[u32; WIDTH]) -> Self::U {
            unsafe { _mm512_loadu_epi32(x.as_ptr().cast()) }
        }
        #[inline(always)]
        fn u_add(self, a: Self::U, b: Self::U) -> Self::U {
            unsafe { _mm512_add_epi32(a, b) }
        }
        #[inline(always)]
        fn u_sub(self, a: Self::U, b: Self::U) -> Self::U {
            unsafe { _mm512_sub_epi32(a, b) }
        }
        #[inline(always)]
        fn u_mul_lo(self, a: Self::U, b: Self::U) -> Self::U {
            unsafe { _mm512_mullo_epi32(a, b) }
        }
        #[inline(always)]
        fn u_and(self, a: Self::U, b: Self::U) -> Self::U {
            unsafe { _mm512_and_si512(a, b) }
        }
        #[inline(always)]
        fn u_or(self, a: Self::U, b: Self::U) -> Self::U {
            unsafe { _mm512_or_si512(a, b) }
        }
        #[inline(always)]
        fn u_xor(self, a: Self::U, b: Self::U) -> Self::U {
            unsafe { _mm512_xor_si512(a, b) }
        }
        #[inline(always)]
        fn u_andnot(self, a: Self::U, b: Self::U) -> Self::U {
            unsafe { _mm512_andnot_si512(a, b) }
        }
        #[inline(always)]
        fn u_shr(self, a: Self::U, n: u32) -> Self::U {
            unsafe { _mm512_srl_epi32(a, _mm_cvtsi32_si128(n as i32)) }
        }
        #[inline(always)]
        fn u_shl(self, a: Self::U, n: u32) -> Self::U {
            unsafe { _mm512_sll_epi32(a, _mm_cvtsi32_si128(n as i32)) }
        }
        #[inline(always)]
        fn u_eq(self, a: Self::U, b: Self::U) -> Self::M {
            unsafe { _mm512_cmpeq_epi32_mask(a, b) }
        }
        #[inline(always)]
        fn u_store(self, a: Self::U, out: &mut [u32; WIDTH]) {
            unsafe { _mm512_storeu_epi32(out.as_mut_ptr().cast(), a) }
        }

        #[inline(always)]
        fn f_splat(self, x: f32) -> Self::F {
            unsafe { _mm512_set1_ps(x) }
        }
        #[inline(always)]
        fn f_add(self, a: Self::F, b: Self::F) -> Self::F {
            unsafe { _mm512_add_ps(a, b) }
        }
        #[inline(always)]
        fn f_sub(self, a: Self::F, b: Self::F) -> Self::F {
            unsafe { _mm512_sub_ps(a, b) }
        }
        #[inline(always)]
        fn f_mul(self, a: Self::F, b: Self::F) -> Self::F {
            unsafe { _mm512_mul_ps(a, b) }
        }
        #[inline(always)]
        fn f_fma(self, a: Self::F, b: Self::F, c: Self::F) -> Self::F {
            unsafe { _mm512_fmadd_ps(a, b, c) }
        }
        #[inline(always)]
        fn f_sqrt(self, a: Self::F) -> Self::F {
            unsafe { _mm512_sqrt_ps(a) }
        }
        #[inline(always)]
        fn f_max(self, a: Self::F, b: Self::F) -> Self::F {
            unsafe { _mm512_max_ps(a, b) }
        }
        #[inline(always)]
        fn f_lt(self, a: Self::F, b: Self::F) -> Self::M {
            unsafe { _mm512_cmp_ps_mask::<_CMP_LT_OQ>(a, b) }
        }
        #[inline(always)]
        fn f_gt(self, a: Self::F, b: Self::F) -> Self::M {
            unsafe { _mm512_cmp_ps_mask::<_CMP_GT_OQ>(a, b) }
        }
        #[inline(always)]
        fn f_select(self, m: Self::M, a: Self::F, b: Self::F) -> Self::F {
            unsafe { _mm512_mask_blend_ps(m, b, a) }
        }
        #[inline(always)]
        fn f_from_bits(self, a: Self::U) -> Self::F {
            unsafe { _mm512_castsi512_ps(a) }
        }
        #[inline(always)]
        fn f_to_bits(self, a: Self::F) -> Self::U {
            unsafe { _mm512_castps_si512(a) }
        }
        #[inline(always)]
        fn f_from_i32(self, a: Self::U) -> Self::F {
            unsafe { _mm512_cvtepi32_ps(a) }
        }
        #[inline(always)]
        fn f_trunc_i32(self, a: Self::F) -> Self::U {
            unsafe { _mm512_cvttps_epi32(a) }
        }
        #[inline(always)]
        fn f_store(self, a: Self::F, out: &mut [f32; WIDTH]) {
            unsafe { _mm512_storeu_ps(out.as_mut_ptr(), a) }
        }

        #[inline(always)]
        fn d_splat(self, x: f64) -> Self::D {
            unsafe { [_mm512_set1_pd(x); 2] }
        }
        #[inline(always)]
        fn d_widen(self, a: Self::F) -> Self::D {
            unsafe {
                [
                    _mm512_cvtps_pd(_mm512_castps512_ps256(a)),
                    _mm512_cvtps_pd(_mm512_extractf32x8_ps::<1>(a)),
                ]
            }
        }
        #[inline(always)]
        fn d_add(self, a: Self::D, b: Self::D) -> Self::D {
            unsafe { [_mm512_add_pd(a[0], b[0]), _mm512_add_pd(a[1], b[1])] }
        }
        #[inline(always)]
        fn d_sub(self, a: Self::D, b: Self::D) -> Self::D {
            unsafe { [_mm512_sub_pd(a[0], b[0]), _mm512_sub_pd(a[1], b[1])] }
        }
        #[inline(always)]
        fn d_mul(self, a: Self::D, b: Self::D) -> Self::D {
            unsafe { [_mm512_mul_pd(a[0], b[0]), _mm512_mul_pd(a[1], b[1])] }
        }
        #[inline(always)]
        fn d_load(self, x: &[f64; WIDTH]) -> Self::D {
            unsafe { [_mm512_loadu_pd(x.as_ptr()), _mm512_loadu_pd(x.as_ptr().add(8))] }
        }
        #[inline(always)]
        fn d_store(self, a: Self::D, out: &mut [f64; WIDTH]) {
            unsafe {
                _mm512_storeu_pd(out.as_mut_ptr(), a[0]);
                _mm512_storeu_pd(out.as_mut_ptr().add(8), a[1]);
            }
        }
    }

    macro_rules! pair {
        ($f:ident, $a:expr) => {
            [$f($a[0]), $f($a[1])]
        };
        ($f:ident, $a:expr, $b:expr) => {
            [$f($a[0], $b[0]), $f($a[1], $b[1])]
        };
    }

    impl Simd for Avx2 {
        type F = [__m256; 2];
        type U = [__m256i; 2];
        type M = [__m256; 2];
        type D = [__m256d; 4];

        #[inline(always)]
        fn u_splat(self, x: u32) -> Self::U {
            unsafe { [_mm256_set1_epi32(x as i32); 2] }
        }
        #[inline(always)]
        fn u_load(self, x: &[u32; WIDTH]) -> Self::U {
            let p = x.as_ptr().cast::<__m256i>();
            unsafe { [_mm256_loadu_si256(p), _mm256_loadu_si256(p.add(1))] }
        }
        #[inline(always)]
        fn u_add(self, a: Self::U, b: Self::U) -> Self::U {
            unsafe { pair!(_mm256_add_epi32, a, b) }
        }
        #[inline(always)]
        fn u_sub(self, a: Self::U, b: Self::U) -> Self::U {
            unsafe { pair!(_mm256_sub_epi32, a, b) }
        }
        #[inline(always)]
        fn u_mul_lo(self, a: Self::U, b: Self::U) -> Self::U {
            unsafe { pair!(_mm256_mullo_epi32, a, b) }
        }
        #[inline(always)]
        fn u_and(self, a: Self::U, b: Self::U) -> Self::U {
            unsafe { pair!(_mm256_and_si256, a, b) }
        }
        #[inline(always)]
        fn u_or(self, a: Self::U, b: Self::U) -> Self::U {
            unsafe { pair!(_mm256_or_si256, a, b) }
        }
        #[inline(always)]
        fn u_xor(self, a: Self::U, b: Self::U) -> Self::U {
            unsafe { pair!(_mm256_xor_si256, a, b) }
        }
        #[inline(always)]
        fn u_andnot(self, a: Self::U, b: Self::U) -> Self::U {
            unsafe { pair!(_mm256_andnot_si256, a, b) }
        }
        #[inline(always)]
        fn u_shr(self, a: Self::U, n: u32) -> Self::U {
            unsafe {
                let c = _mm_cvtsi32_si128(n as i32);
                [_mm256_srl_epi32(a[0], c), _mm256_srl_epi32(a[1], c)]
            }
        }
        #[inline(always)]
        fn u_shl(self, a: Self::U, n: u32) -> Self::U {
            unsafe {
                let c = _mm_cvtsi32_si128(n as i32);
                [_mm256_sll_epi32(a[0], c), _mm256_sll_epi32(a[1], c)]
            }
        }
        #[inline(always)]
        fn u_eq(self, a: Self::U, b: Self::U) -> Self::M {
            unsafe {
                [
                    _mm256_castsi256_ps(_mm256_cmpeq_epi32(a[0], b[0])),
                    _mm256_castsi256_ps(_mm256_cmpeq_epi32(a[1], b[1])),
                ]
            }
        }
        #[inline(always)]
        fn u_store(self, a: Self::U, out: &mut [u32; WIDTH]) {
            let p = out.as_mut_ptr().cast::<__m256i>();
            unsafe {
                _mm256_storeu_si256(p, a[0]);
                _mm256_storeu_si256(p.add(1), a[1]);
            }
        }

        #[inline(always)]
        fn f_splat(self, x: f32) -> Self::F {
            unsafe { [_mm256_set1_ps(x); 2] }
        }
        #[inline(always)]
        fn f_add(self, a: Self::F, b: Self::F) -> Self::F {
            unsafe { pair!(_mm256_add_ps, a, b) }
        }
        #[inline(always)]
        fn f_sub(self, a: Self::F, b: Self::F) -> Self::F {
            unsafe { pair!(_mm256_sub_ps, a, b) }
        }
        #[inline(always)]
        fn f_mul(self, a: Self::F, b: Self::F) -> Self::F {
            unsafe { pair!(_mm256_mul_ps, a, b) }
        }
        #[inline(always)]
        fn f_fma(self, a: Self::F, b: Self::F, c: Self::F) -> Self::F {
            unsafe { [_mm256_fmadd_ps(a[0], b[0], c[0]), _mm256_fmadd_ps(a[1], b[1], c[1])] }
        }
        #[inline(always)]
        fn f_sqrt(self, a: Self::F) -> Self::F {
            unsafe { pair!(_mm256_sqrt_ps, a) }
        }
        #[inline(always)]
        fn f_max(self, a: Self::F, b: Self::F) -> Self::F {
            unsafe { pair!(_mm256_max_ps, a, b) }
        }
        #[inline(always)]
        fn f_lt(self, a: Self::F, b: Self::F) -> Self::M {
            unsafe {
                [
                    _mm256_cmp_ps::<_CMP_LT_OQ>(a[0], b[0]),
                    _mm256_cmp_ps::<_CMP_LT_OQ>(a[1], b[1]),
                ]
            }
        }
        #[inline(always)]
        fn f_gt(self, a: Self::F, b: Self::F) -> Self::M {
            unsafe {
                [
                    _mm256_cmp_ps::<_CMP_GT_OQ>(a[0], b[0]),
                    _mm256_cmp_ps::<_CMP_GT_OQ>(a[1], b[1]),
                ]
            }
        }
        #[inline(always)]
        fn f_select(self, m: Self::M, a: Self::F, b: Self::F) -> Self::F {
            unsafe { [_mm256_blendv_ps(b[0], a[0], m[0]), _mm256_blendv_ps(b[1], a[1], m[1])] }
        }
        #[inline(always)]
        fn f_from_bits(self, a: Self::U) -> Self::F {
            unsafe { pair!(_mm256_castsi256_ps, a) }
        }
        #[inline(always)]
        fn f_to_bits(self, a: Self::F) -> Self::U {
            unsafe { pair!(_mm256_castps_si256, a) }
        }
        #[inline(always)]
        fn f_from_i32(self, a: Self::U) -> Self::F {
            unsafe { pair!(_mm256_cvtepi32_ps, a) }
        }
        #[inline(always)]
        fn f_trunc_i32(self, a: Self::F) -> Self::U {
            unsafe { pair!(_mm256_cvttps_epi32, a) }
        }
        #[inline(always)]
        fn f_store(self, a: Self::F, out: &mut [f32; WIDTH]) {
            unsafe {
                _mm256_storeu_ps(out.as_mut_ptr(), a[0]);
                _mm256_storeu_ps(out.as_mut_ptr().add(8), a[1]);
            }
        }

        #[inline(always)]
        fn d_splat(self, x: f64) -> Self::D {
            unsafe { [_mm256_set1_pd(x); 4] }
        }
        #[inline(always)]
        fn d_widen(self, a: Self::F) -> Self::D {
            unsafe {
                [
                    _mm256_cvtps_pd(_mm256_castps256_ps128(a[0])),
                    _mm256_cvtps_pd(_mm256_extractf128_ps::<1>(a[0])),
                    _mm256_cvtps_pd(_mm256_castps256_ps128(a[1])),
                    _mm256_cvtps_pd(_mm256_extractf128_ps::<1>(a[1])),
                ]
            }
        }
        #[inline(always)]
        fn d_add(self, a: Self::D, b: Self::D) -> Self::D {
            unsafe {
                [
                    _mm256_add_pd(a[0], b[0]),
                    _mm256_add_pd(a[1], b[1]),
                    _mm256_add_pd(a[2], b[2]),
                    _mm256_add_pd(a[3], b[3]),
                ]
            }
        }
        #[inline(always)]
        fn d_sub(self, a: Self::D, b: Self::D) -> Self::D {
            unsafe {
                [
                    _mm256_sub_pd(a[0], b[0]),
                    _mm256_sub_pd(a[1], b[1]),
                    _mm256_sub_pd(a[2], b[2]),
                    _mm256_sub_pd(a[3], b[3]),
                ]
            }
        }
        #[inline(always)]
        fn d_mul(self, a: Self::D, b: Self::D) -> Self::D {
            unsafe {
                [
                    _mm256_mul_pd(a[0], b[0]),
                    _mm256_mul_pd(a[1], b[1]),
                    _mm256_mul_pd(a[2], b[2]),
                    _mm256_mul_pd(a[3], b[3]),
                ]
            }
        }
        #[inline(always)]
        fn d_load(self, x: &[f64; WIDTH]) -> Self::D {
            let p = x.as_ptr();
            unsafe {
                [
                    _mm256_loadu_pd(p),
                    _mm256_loadu_pd(p.add(4)),
                    _mm256_loadu_pd(p.add(8)),
                    _mm256_loadu_pd(p.add(12)),
                ]
            }
        }
        #[inline(always)]
        fn d_store(self, a: Self::D, out: &mut [f64; WIDTH]) {
            let p = out.as_mut_ptr();
            unsafe {
                _mm256_storeu_pd(p, a[0]);
                _mm256_storeu_pd(p.add(4), a[1]);
                _mm256_storeu_pd(p.add(8), a[2]);
                _mm256_storeu_pd(p.add(12), a[3]);
            }
        }
    }
}
