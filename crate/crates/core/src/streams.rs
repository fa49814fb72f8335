//! Named random substreams derived from one root seed.
//!
//! Every source of randomness in a run draws from its own ChaCha stream, so
//! enabling or disabling a solution never shifts the draws seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Mobility,
    /// Shadowing on path 0 or 1.
    Shadowing(usize),
    Arrivals(usize),
    Queue(usize),
    /// GBR of a traffic type on a path.
    Gbr { traffic: usize, path: usize },
}

impl Stream {
    fn id(self) -> u64 {
        let (kind, traffic, path) = match self {
            Stream::Mobility => (1u64, 0usize, 0usize),
            Stream::Shadowing(p) => (2, 0, p),
            Stream::Arrivals(t) => (3, t, 0),
            Stream::Queue(t) => (4, t, 0),
            Stream::Gbr { traffic, path } => (5, traffic, path),
        };
        (kind << 48) | ((traffic as u64) << 8) | path as u64
    }
}

pub fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which.id());
    rng
}
