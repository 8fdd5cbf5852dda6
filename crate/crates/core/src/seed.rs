//! Splittable seed derivation. Every random stream in a run is derived
//! from the master seed and a path label, so results are reproducible and
//! independent of scheduling.

/// Derives a child seed from `master` and a path label such as
/// `"modified_swiss/size=4/rep=0/agent=2"`. The label is hashed with
/// FNV-1a and the combined value is finalized with the SplitMix64 mixer,
/// which is fixed and platform-independent.
pub fn child_seed(master: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &byte in label.as_bytes() {
        h ^= byte as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(master ^ h)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
