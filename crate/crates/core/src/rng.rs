//! Reproducible random streams keyed by `(master_seed, realization_index)`.
//!
//! Every realization draws from its own ChaCha stream, so results do not
//! depend on evaluation order, worker count or how indices are partitioned.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifies one realization of a seeded ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RealizationKey {
    pub master_seed: u64,
    pub realization_index: u64,
}

impl RealizationKey {
    pub fn new(master_seed: u64, realization_index: u64) -> Self {
        Self {
            master_seed,
            realization_index,
        }
    }
}

/// Independent random quantities drawn for a single realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Speckle,
    /// Screen between the modulator and the object.
    ScreenSource,
    /// Screen between the object and the detector.
    ScreenDetector,
    RoughSurface,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Speckle => 0x5350_4543_4b4c_4531,
            Stream::ScreenSource => 0x5343_5245_454e_2d31,
            Stream::ScreenDetector => 0x5343_5245_454e_2d32,
            Stream::RoughSurface => 0x524f_5547_4853_5246,
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for one `(key, stream)` pair.
pub fn keyed_rng(key: RealizationKey, stream: Stream) -> ChaCha8Rng {
    let mut state = key.master_seed ^ stream.tag();
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(key.realization_index);
    rng
}
