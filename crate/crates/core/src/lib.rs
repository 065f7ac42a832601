//! Seed and prompt-modifier recovery against latent diffusion pipelines that
//! seed their CPU noise generator with a 32-bit-truncated seed, plus a
//! ChaCha20 noise source that removes the weakness.

pub mod codec;
pub mod error;
pub mod ga;
pub mod prng;
pub mod search;
pub mod secure;
pub mod seed;
mod simd;
pub mod stats;
pub mod tensor;

pub use codec::{read_npy, write_npy};
pub use error::{Error, Result};
pub use prng::{mt_init, next_u32, randn, RngState};
pub use secure::{chacha_randn, SecureSeed};
pub use seed::Seed;
pub use simd::backend_name;
pub use tensor::{LatentVector, NoiseVector, Tensor};
