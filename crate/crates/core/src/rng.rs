//! Deterministic counter-based random streams.
//!
//! Every random draw in a run comes from a ChaCha8 stream selected by
//! `(master_seed, purpose, index)`. The purpose separates Fourier-time draws
//! from kernel draws and shot noise, so switching the noise model never
//! changes the sampled times.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Purpose {
    FourierTime,
    Kernel,
    ShotReal,
    ShotImaginary,
    Trial,
    Matrix,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::FourierTime => 0x9e37_79b9_7f4a_7c15,
            Purpose::Kernel => 0xbf58_476d_1ce4_e5b9,
            Purpose::ShotReal => 0x94d0_49bb_1331_11eb,
            Purpose::ShotImaginary => 0x2545_f491_4f6c_dd1d,
            Purpose::Trial => 0xd6e8_feb8_6659_fd93,
            Purpose::Matrix => 0xa076_1d64_78bd_642f,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The stream for one `(purpose, index)` pair under `master_seed`.
pub fn stream(master_seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(master_seed ^ purpose.tag()));
    rng.set_stream(index);
    rng
}

/// Derives an independent master seed, e.g. one per trial.
pub fn derive_seed(master_seed: u64, purpose: Purpose, index: u64) -> u64 {
    splitmix64(splitmix64(master_seed ^ purpose.tag()) ^ splitmix64(index.wrapping_add(1)))
}
