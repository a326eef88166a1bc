use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random source used by every sampling routine in the crate.
pub type SimRng = ChaCha8Rng;

/// Independent stream `index` of the generator family keyed by `master_seed`.
///
/// Streams depend only on `(master_seed, index)`, so work split into indexed
/// chunks reproduces bit-for-bit regardless of how chunks are scheduled.
pub fn stream(master_seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}
