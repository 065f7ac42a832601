//! Standard-normal noise driven by ChaCha20 under a 256-bit key.
//!
//! Stream layout (part of the external contract):
//!
//! * RFC 7539 block function, 32-bit block counter starting at 0, 96-bit
//!   nonce `nonce_prefix ‖ 0u32`.
//! * Keystream bytes are read as consecutive little-endian `u64` words; each
//!   word gives the uniform `(w >> 11) · 2⁻⁵³`.
//! * Uniforms pair up as `(u₁, u₂)`; with `r = √(−2 ln(1 − u₂))` and
//!   `θ = 2π u₁` the pair yields `r cos θ` then `r sin θ`, computed in `f64`
//!   and narrowed to `f32`. An odd count drops the last sine.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use chacha20::cipher::{KeyIvInit, StreamCipher};
use chacha20::ChaCha20;

use crate::error::{Error, Result};
use crate::prng::randn;
use crate::seed::Seed;
use crate::tensor::{element_count, NoiseVector, Tensor};

pub const KEY_BYTES: usize = 32;
pub const NONCE_PREFIX_BYTES: usize = 8;

/// A 256-bit generator seed.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SecureSeed {
    key: [u8; KEY_BYTES],
    nonce_prefix: [u8; NONCE_PREFIX_BYTES],
}

impl SecureSeed {
    pub fn new(key: [u8; KEY_BYTES]) -> Self {
        Self {
            key,
            nonce_prefix: [0; NONCE_PREFIX_BYTES],
        }
    }

    /// Fails unless `key` is exactly 32 bytes.
    pub fn from_key_bytes(key: &[u8]) -> Result<Self> {
        let key: [u8; KEY_BYTES] = key
            .try_into()
            .map_err(|_| Error::invalid(format!("key must be {KEY_BYTES} bytes, got {}", key.len())))?;
        Ok(Self::new(key))
    }

    pub fn with_nonce_prefix(mut self, prefix: [u8; NONCE_PREFIX_BYTES]) -> Self {
        self.nonce_prefix = prefix;
        self
    }

    pub fn key(&self) -> &[u8; KEY_BYTES] {
        &self.key
    }

    pub fn nonce_prefix(&self) -> &[u8; NONCE_PREFIX_BYTES] {
        &self.nonce_prefix
    }

    /// The key with bit `bit` (0 = least significant bit of byte 0) flipped.
    pub fn flip_bit(&self, bit: usize) -> Self {
        let mut out = *self;
        out.key[bit / 8] ^= 1 << (bit % 8);
        out
    }

    fn cipher(&self) -> ChaCha20 {
        let mut nonce = [0u8; 12];
        nonce[..NONCE_PREFIX_BYTES].copy_from_slice(&self.nonce_prefix);
        ChaCha20::new(&self.key.into(), &nonce.into())
    }
}

/// Parses 64 hex characters into a key.
impl FromStr for SecureSeed {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.len() != 2 * KEY_BYTES {
            return Err(Error::invalid(format!(
                "key must be {} hex characters, got {}",
                2 * KEY_BYTES,
                s.len()
            )));
        }
        let bytes = hex::decode(s).map_err(|e| Error::invalid(format!("key is not hex: {e}")))?;
        Self::from_key_bytes(&bytes)
    }
}

impl fmt::Display for SecureSeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.key))
    }
}

/// The key is secret material; only its length is shown.
impl fmt::Debug for SecureSeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SecureSeed")
            .field("key", &"<32 bytes>")
            .field("nonce_prefix", &hex::encode(self.nonce_prefix))
            .finish()
    }
}

/// The first `len` keystream bytes for `seed` (block counter 0 onward).
pub fn keystream(seed: &SecureSeed, len: usize) -> Vec<u8> {
    let mut buf = vec![0u8; len];
    seed.cipher().apply_keystream(&mut buf);
    buf
}

/// Standard-normal noise of the given shape.
pub fn chacha_randn(seed: &SecureSeed, shape: &[usize]) -> Result<NoiseVector> {
    let n = element_count(shape)?;
    let pairs = n.div_ceil(2);
    let bytes = keystream(seed, pairs * 16);
    let mut data = Vec::with_capacity(pairs * 2);
    for pair in bytes.chunks_exact(16) {
        let word = |i: usize| u64::from_le_bytes(pair[i..i + 8].try_into().expect("8 bytes"));
        let u1 = (word(0) >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (word(8) >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let r = (-2.0 * (-u2).ln_1p()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * u1).sin_cos();
        data.push((r * c) as f32);
        data.push((r * s) as f32);
    }
    data.truncate(n);
    Tensor::new(data, shape.to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Overhead {
    pub elements: usize,
    pub mt_seconds: f64,
    pub chacha_seconds: f64,
    /// `chacha_seconds / mt_seconds`.
    pub ratio: f64,
}

/// Wall-clock cost of [`randn`] against [`chacha_randn`] on `n` elements,
/// each the best of a few repetitions.
pub fn bench_overhead(n: usize) -> Result<Overhead> {
    if n < 1 << 16 {
        return Err(Error::invalid("benchmark needs at least 2^16 elements"));
    }
    const REPS: usize = 3;
    let key = SecureSeed::new([7; KEY_BYTES]);
    let mut mt = f64::INFINITY;
    let mut cc = f64::INFINITY;
    for rep in 0..REPS {
        let t = Instant::now();
        std::hint::black_box(randn(Seed(rep as u64), &[n])?);
        mt = mt.min(t.elapsed().as_secs_f64());
        let t = Instant::now();
        std::hint::black_box(chacha_randn(&key.flip_bit(rep), &[n])?);
        cc = cc.min(t.elapsed().as_secs_f64());
    }
    // Timer resolution floor for very fast runs.
    let (mt, cc) = (mt.max(1e-9), cc.max(1e-9));
    Ok(Overhead {
        elements: n,
        mt_seconds: mt,
        chacha_seconds: cc,
        ratio: cc / mt,
    })
}
