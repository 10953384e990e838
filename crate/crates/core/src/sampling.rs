//! Reproducible random streams and uniform directions on the unit sphere.
//!
//! A stream is a ChaCha8 generator whose key is derived from the root seed and
//! whose 64-bit stream id is the stream index, so `(seed, index)` maps to a
//! distinct generator state with no collisions. Sample `i` of an estimate
//! always draws from stream `i`, whichever worker runs it.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::geometry::Point;

/// Below this norm a Gaussian draw is discarded and redrawn.
const UNDERFLOW_NORM: f64 = 1e-100;

#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
    root_seed: u64,
    stream_index: u64,
}

impl RngStream {
    pub fn root_seed(&self) -> u64 {
        self.root_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }
}

/// Deterministic stream for `(root_seed, index)`.
pub fn derive_stream(root_seed: u64, index: u64) -> RngStream {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&root_seed.to_le_bytes());
    // fixed tag in the remaining key bytes
    key[8..16].copy_from_slice(&0x6469_7269_6368_6c74u64.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    RngStream {
        rng,
        root_seed,
        stream_index: index,
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Uniform direction on the unit sphere of R^d (normalized Gaussian vector).
pub fn sample_unit_sphere<R: Rng + ?Sized>(stream: &mut R, d: usize) -> Result<Point> {
    if d == 0 {
        return Err(invalid("d", "dimension must be at least 1"));
    }
    let mut out = vec![0.0; d];
    fill_unit_sphere(stream, &mut out);
    Ok(Point::from_vec(out))
}

/// Writes a uniform unit vector into `out`; `out` must be nonempty.
pub(crate) fn fill_unit_sphere<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    loop {
        let mut sq = 0.0;
        for v in out.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *v = g;
            sq += g * g;
        }
        let n = sq.sqrt();
        if n >= UNDERFLOW_NORM {
            out.iter_mut().for_each(|v| *v /= n);
            return;
        }
    }
}
