use num_complex::Complex;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{CMatrix, Real};

/// Deterministic random stream identified by `(master_seed, stream_id)`.
///
/// Backed by ChaCha8 with the stream id mapped onto the cipher's stream
/// counter, so sequences are platform and thread-count independent.
#[derive(Clone, Debug)]
pub struct SeededRng {
    master_seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_id);
        Self {
            master_seed,
            stream_id,
            inner,
        }
    }

    /// Stream keyed by a tuple of identifiers, e.g. `(experiment, drop, purpose)`.
    pub fn for_parts(master_seed: u64, parts: &[u64]) -> Self {
        Self::new(master_seed, derive_stream(master_seed, parts))
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform sample in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        // 53 random mantissa bits.
        let u = (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        lo + (hi - lo) * u
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit hash of a seed and a tuple of identifiers.
pub fn derive_stream(master_seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(master_seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Matrix of i.i.d. circularly-symmetric `CN(0, 1)` entries.
pub fn sample_complex_gaussian<T: Real>(rng: &mut SeededRng, rows: usize, cols: usize) -> CMatrix<T> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re = rng.standard_normal() * s;
        let im = rng.standard_normal() * s;
        Complex::new(T::lit(re), T::lit(im))
    })
}
