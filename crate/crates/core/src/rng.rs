use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random streams derived from one user seed.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Domain {
    SpeakerHoldout = 1,
    PairSelection = 2,
    PoolSplit = 3,
    TrainSampling = 4,
    TrialSampling = 5,
    Init = 6,
    Shuffle = 7,
    Dropout = 8,
    Synthetic = 9,
}

pub(crate) fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    debug_assert!(index < 1 << 56);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << 56) | index);
    rng
}
