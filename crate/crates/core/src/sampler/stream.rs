use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Purpose tag used by [`replicate_streams`].
pub const REPLICATE: &str = "replicate";

/// A reproducible random stream addressed by `(seed, index, purpose)`.
///
/// The ChaCha key is built from the seed and a hash of the purpose tag and
/// the index selects the ChaCha stream, so distinct paths never share
/// keystream and the same path always replays the same draws.
#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    index: u64,
    purpose: &'static str,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, index: u64, purpose: &'static str) -> RandomStream {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&fnv1a(purpose.as_bytes()).to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index);
        RandomStream {
            seed,
            index,
            purpose,
            rng,
        }
    }

    /// The replicate stream `(seed, index)`.
    pub fn substream(seed: u64, index: u64) -> RandomStream {
        RandomStream::new(seed, index, REPLICATE)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn purpose(&self) -> &'static str {
        self.purpose
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

impl RngCore for RandomStream {
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

/// `k` replicate streams for `seed`; stream `i` is `(seed, i)` whatever the worker count.
pub fn replicate_streams(seed: u64, k: usize) -> Vec<RandomStream> {
    assert!(k >= 1, "at least one stream");
    (0..k as u64).map(|i| RandomStream::substream(seed, i)).collect()
}
