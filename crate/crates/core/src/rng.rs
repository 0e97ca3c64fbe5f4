//! Deterministic seed splitting.
//!
//! Every random stream in a run is derived from the master seed plus a list of
//! labels, never from scheduling order, so results do not depend on how many
//! worker threads execute the episodes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random generator used throughout the simulator.
pub type SimRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ *b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// A label folded into a derived seed.
#[derive(Clone, Copy, Debug)]
pub enum SeedPart<'a> {
    Str(&'a str),
    Num(u64),
}

impl<'a> From<&'a str> for SeedPart<'a> {
    fn from(s: &'a str) -> Self {
        SeedPart::Str(s)
    }
}

impl From<u64> for SeedPart<'_> {
    fn from(n: u64) -> Self {
        SeedPart::Num(n)
    }
}

impl From<usize> for SeedPart<'_> {
    fn from(n: usize) -> Self {
        SeedPart::Num(n as u64)
    }
}

pub fn derive_seed(master: u64, parts: &[SeedPart<'_>]) -> u64 {
    parts.iter().fold(splitmix64(master), |acc, part| {
        let v = match part {
            SeedPart::Str(s) => fnv1a(s.as_bytes()),
            SeedPart::Num(n) => splitmix64(*n),
        };
        splitmix64(acc ^ v)
    })
}

pub fn rng_from(master: u64, parts: &[SeedPart<'_>]) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, parts))
}
