//! Deterministic substream derivation. Parallel ensemble runs and CLI
//! subcommands each get an independent RNG stream derived from
//! `(base seed, label, index)` so no two streams share state and results do
//! not depend on scheduling.
//!
//! Rule (fixed): FNV-1a over the label bytes, xored into the base seed, then
//! two rounds of the splitmix64 finalizer with the index xored in between.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Substream seed for `(base, label, index)`.
pub fn substream(base: u64, label: &str, index: u64) -> u64 {
    let mut h = FNV_OFFSET;
    for b in label.bytes() {
        h = (h ^ b as u64).wrapping_mul(FNV_PRIME);
    }
    splitmix64(splitmix64(base ^ h) ^ index)
}
