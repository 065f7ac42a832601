//! Single-precision `log` and `sincos` in the Cephes formulation used by the
//! framework's AVX2 normal-fill kernel.
//!
//! Bit-exactness depends on reproducing the exact operation sequence of that
//! kernel *as compiled*: the compiler contracts every multiply whose only use
//! is an add or subtract into a fused multiply-add, so those steps are written
//! here as `mul_add`. Every other step is a separately rounded `f32` op.
//!
//! All functions work on `[f32; N]` lane arrays and are `inline(always)` so
//! that the callers' target-feature context decides the vector width.

// Coefficients are quoted as published; they round to the intended f32.
#![allow(clippy::excessive_precision)]

pub(super) const SQRTHF: f32 = 0.707_106_77;
pub(super) const LOG_P: [f32; 9] = [
    7.037_683_6E-2,
    -1.151_461_031E-1,
    1.167_699_874E-1,
    -1.242_014_084_6E-1,
    1.424_932_278_7E-1,
    -1.666_805_766_5E-1,
    2.000_071_476_5E-1,
    -2.499_999_399_3E-1,
    3.333_333_117_4E-1,
];
pub(super) const LOG_Q1: f32 = -2.121_944_4e-4;
pub(super) const LOG_Q2: f32 = 0.693_359_4;
pub(super) const MIN_NORM_POS: u32 = 0x0080_0000;
pub(super) const INV_MANT_MASK: u32 = !0x7f80_0000;

pub(super) const DP1: f32 = -0.785_156_25;
pub(super) const DP2: f32 = -2.418_756_484_985_351_6e-4;
pub(super) const DP3: f32 = -3.774_894_977_445_941e-8;
pub(super) const SINCOF: [f32; 3] = [-1.951_529_589_1E-4, 8.332_160_873_6E-3, -1.666_665_461_1E-1];
pub(super) const COSCOF: [f32; 3] = [
    2.443_315_711_809_948E-5,
    -1.388_731_625_493_765E-3,
    4.166_664_568_298_827E-2,
];
pub(super) const FOPI: f32 = 1.273_239_5;

/// `2π` rounded once to `f32`, as the kernel broadcasts it.
pub(crate) const TWO_PI: f32 = (2.0 * std::f64::consts::PI) as f32;

#[inline(always)]
pub(crate) fn log<const N: usize>(input: [f32; N]) -> [f32; N] {
    let mut out = [0f32; N];
    for i in 0..N {
        let v = input[i];
        let invalid = v.is_nan() || v <= 0.0;
        let x = f32::from_bits(v.to_bits().max(MIN_NORM_POS));
        // For positive floats the integer max is the float max.
        let x = if v > 0.0 { x } else { f32::from_bits(MIN_NORM_POS) };
        let bits = x.to_bits();
        let mut e = ((bits >> 23) as i32 - 0x7f) as f32;
        e += 1.0;
        let m = f32::from_bits((bits & INV_MANT_MASK) | 0.5f32.to_bits());
        let below = m < SQRTHF;
        let tmp = if below { m } else { 0.0 };
        let mut x = m - 1.0;
        e -= if below { 1.0 } else { 0.0 };
        x += tmp;

        let z = x * x;
        let mut y = LOG_P[0];
        for &p in &LOG_P[1..] {
            y = y.mul_add(x, p);
        }
        y *= x;
        y = y.mul_add(z, e * LOG_Q1);
        y = (-z).mul_add(0.5, y);
        x += y;
        x = e.mul_add(LOG_Q2, x);
        out[i] = if invalid { f32::NAN } else { x };
    }
    out
}

/// Returns `(sin, cos)`.
#[inline(always)]
pub(crate) fn sincos<const N: usize>(input: [f32; N]) -> ([f32; N], [f32; N]) {
    let mut s_out = [0f32; N];
    let mut c_out = [0f32; N];
    for i in 0..N {
        let v = input[i];
        let sign_in = v.to_bits() & 0x8000_0000;
        let mut x = f32::from_bits(v.to_bits() & 0x7fff_ffff);
        let y = x * FOPI;
        // SAFETY: callers keep |x| well inside i32 range.
        let mut j = unsafe { y.to_int_unchecked::<i32>() };
        j = (j + 1) & !1;
        let y = j as f32;
        let swap_sin = ((j & 4) as u32) << 29;
        let poly_sin = (j & 2) == 0;
        x = y.mul_add(DP1, x);
        x = y.mul_add(DP2, x);
        x = y.mul_add(DP3, x);
        let sign_cos = ((!(j - 2) & 4) as u32) << 29;
        let sign_sin = sign_in ^ swap_sin;

        let z = x * x;
        let mut yc = COSCOF[0].mul_add(z, COSCOF[1]);
        yc = yc.mul_add(z, COSCOF[2]);
        yc *= z;
        yc = yc.mul_add(z, -(z * 0.5));
        yc += 1.0;

        let mut ys = SINCOF[0].mul_add(z, SINCOF[1]);
        ys = ys.mul_add(z, SINCOF[2]);
        ys *= z;
        ys = ys.mul_add(x, x);

        let ysin2 = if poly_sin { ys } else { 0.0 };
        let ysin1 = if poly_sin { 0.0 } else { yc };
        let s = ysin1 + ysin2;
        let c = (yc - ysin1) + (ys - ysin2);
        s_out[i] = f32::from_bits(s.to_bits() ^ sign_sin);
        c_out[i] = f32::from_bits(c.to_bits() ^ sign_cos);
    }
    (s_out, c_out)
}

/// Box–Muller over one 16-element block of uniforms, in place: element `j`
/// and `j + 8` become `r·cos θ` and `r·sin θ` with `r` from `u[j]` and `θ`
/// from `u[j + 8]`.
#[inline(always)]
pub(crate) fn box_muller_16(block: &mut [f32; 16]) {
    let mut u1 = [0f32; 8];
    let mut u2 = [0f32; 8];
    for j in 0..8 {
        u1[j] = 1.0 - block[j];
        u2[j] = block[j + 8];
    }
    let lg = log(u1);
    let mut theta = [0f32; 8];
    let mut radius = [0f32; 8];
    for j in 0..8 {
        radius[j] = (-2.0 * lg[j]).sqrt();
        theta[j] = TWO_PI * u2[j];
    }
    let (s, c) = sincos(theta);
    for j in 0..8 {
        // The kernel finishes with fma(n, std=1, mean=0), which maps -0 to +0.
        block[j] = (radius[j] * c[j]) + 0.0;
        block[j + 8] = (radius[j] * s[j]) + 0.0;
    }
}
