//! Named random streams. Every stream is a ChaCha8 generator keyed by the
//! drop seed with its own stream id, so draws in one stream never shift
//! another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const BS_PLACEMENT: u64 = 0;
const UE_PLACEMENT: u64 = 1;
const SHADOWING_BASE: u64 = 1 << 32;

#[derive(Clone, Copy, Debug)]
pub struct Streams {
    seed: u64,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    fn stream(&self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(id);
        rng
    }

    pub fn bs_placement(&self) -> ChaCha8Rng {
        self.stream(BS_PLACEMENT)
    }

    pub fn ue_placement(&self) -> ChaCha8Rng {
        self.stream(UE_PLACEMENT)
    }

    /// Standard-normal draws for UE `ue`, one per BS index in order.
    pub fn shadowing(&self, ue: usize) -> ChaCha8Rng {
        self.stream(SHADOWING_BASE + ue as u64)
    }
}
