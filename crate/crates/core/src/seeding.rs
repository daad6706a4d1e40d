//! Stable seed derivation and counter-based uniform draws.
//!
//! Every derived value goes through the SplitMix64 output function
//! (`z += 0x9E3779B97F4A7C15; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9;
//! z = (z ^ z>>27) * 0x94D049BB133111EB; z ^ z>>31`). Chaining is
//! `h = mix(h ^ word)` starting from `h = mix(master)`, so any
//! implementation reproducing these two rules reproduces every seed and
//! every per-pair draw of this crate.
//!
//! * run seeds: `derive_seed(master, [cell, run, tag])`
//! * pair draw for ordered pair `(a, b)` under seed `s`:
//!   `unit(mix(mix(s) ^ (a << 32 | b)))` where `unit(x) = (x >> 11) · 2^-53`.

#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `words` into `master`.
pub fn derive_seed(master: u64, words: &[u64]) -> u64 {
    words.iter().fold(mix(master), |h, &w| mix(h ^ w))
}

/// Packs up to eight ASCII bytes of a purpose tag into a word.
pub const fn tag(name: &str) -> u64 {
    let bytes = name.as_bytes();
    let mut word = 0u64;
    let mut k = 0;
    while k < bytes.len() && k < 8 {
        word |= (bytes[k] as u64) << (8 * k);
        k += 1;
    }
    word
}

/// Maps 64 random bits to `[0, 1)` with 53-bit resolution.
#[inline]
pub fn unit(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// The uniform draw attached to the ordered pair `(from, to)` under `seed`.
#[inline]
pub fn pair_uniform(seed: u64, from: usize, to: usize) -> f64 {
    debug_assert!(from <= u32::MAX as usize && to <= u32::MAX as usize);
    let key = ((from as u64) << 32) | to as u64;
    unit(mix(mix(seed) ^ key))
}
