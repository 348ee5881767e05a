//! Counter-based seed derivation.
//!
//! `master -> arm -> run`: an arm seed mixes the master seed with a hash of
//! the arm label, and run `i` of an arm mixes the arm seed with `i`. Adding
//! or reordering arms never changes another arm's streams.

const SEARCH_TAG: u64 = u64::MAX;
const SAMPLE_TAG: u64 = u64::MAX - 1;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive(parent: u64, tag: u64) -> u64 {
    splitmix64(parent ^ splitmix64(tag))
}

/// 64-bit FNV-1a.
pub fn label_tag(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn arm_seed(master: u64, label: &str) -> u64 {
    derive(master, label_tag(label))
}

pub fn run_seed(arm: u64, index: usize) -> u64 {
    derive(arm, index as u64)
}

/// Seed for an arm's basis search.
pub fn search_seed(arm: u64) -> u64 {
    derive(arm, SEARCH_TAG)
}

/// Seed for the epistasis sample drawn to report a fixed basis.
pub fn sample_seed(arm: u64) -> u64 {
    derive(arm, SAMPLE_TAG)
}
