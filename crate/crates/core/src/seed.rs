//! Seed derivation for independent, order-free random streams.

/// SplitMix64 finalizer: a bijective 64-bit avalanche mix.
pub fn avalanche(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for stream `index` under `master`.
pub fn mix64(master: u64, index: u64) -> u64 {
    avalanche(master ^ avalanche(index.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}
