//! Counter-based seed derivation. A trial's randomness depends only on
//! `(base seed, grid index, trial index, stream)`, never on scheduling.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random stream within a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Harvest(usize),
    Signal,
    Operator(usize),
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Signal => 0,
            Stream::Harvest(k) => 1 + 2 * k as u64,
            Stream::Operator(k) => 2 + 2 * k as u64,
        }
    }
}

pub fn derive_seed(base: u64, grid_index: usize, trial: usize, stream: Stream) -> u64 {
    let mut h = splitmix64(base);
    h = splitmix64(h ^ grid_index as u64);
    h = splitmix64(h ^ trial as u64);
    splitmix64(h ^ stream.tag())
}
