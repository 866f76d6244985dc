//! Counter-based randomness.
//!
//! Every variate is a pure function of its key `(seed, t, x, y, j)`:
//! one key per neighbor draw (`j < b`) plus one per cell-step for the
//! error flip (`j = b`). Nothing is stateful, so parallel and sequential
//! evaluation produce identical results.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline(always)]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Raw 64-bit value for one key. Packing limits: `x, y < 2^20`, `j < 2^8`.
#[inline(always)]
pub fn key_value(seed: u64, t: u32, x: u32, y: u32, j: u32) -> u64 {
    debug_assert!(x < 1 << 20 && y < 1 << 20 && j < 1 << 8);
    let cell = ((x as u64) << 28) | ((y as u64) << 8) | j as u64;
    let h = mix64(seed ^ GOLDEN ^ (t as u64).wrapping_mul(0xd134_2543_de82_ef95));
    mix64(h ^ cell)
}

/// Uniform integer in `[0, n)` by the multiply-shift reduction.
#[inline(always)]
pub fn uniform_below(raw: u64, n: u64) -> u64 {
    debug_assert!(n > 0);
    ((raw as u128 * n as u128) >> 64) as u64
}

/// Uniform f64 in `[0, 1)` built from the top 53 bits.
#[inline(always)]
pub fn unit_f64(raw: u64) -> f64 {
    (raw >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Stream seed for replica `r`; `r = 0` reproduces the base seed, so a
/// one-replica sweep matches a plain run with the same seed.
pub fn replica_seed(seed: u64, r: u64) -> u64 {
    seed.wrapping_add(r.wrapping_mul(GOLDEN))
}
