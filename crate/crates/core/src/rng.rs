//! Reproducible random streams.
//!
//! A stream is a ChaCha8 generator keyed by `(seed, stream id)`. Identical
//! keys reproduce identical draws; distinct stream ids under one seed select
//! disjoint ChaCha streams.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            seed,
            stream,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    /// Derive `count` child streams. The children depend only on the state
    /// of `self` at the call, which advances by one draw.
    pub fn split(&mut self, count: usize) -> Vec<RngStream> {
        let key = self.inner.next_u64();
        (0..count as u64).map(|i| RngStream::new(key, i)).collect()
    }

    pub fn fork(&mut self) -> RngStream {
        self.split(1).pop().expect("one child")
    }
}

impl RngCore for RngStream {
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
