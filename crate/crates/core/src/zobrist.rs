//! Deterministic Zobrist keys. Keys come from a fixed mixing function rather
//! than an RNG so hashes are stable across processes and board sizes.

use crate::coord::Color;

const CELL_SALT: u64 = 0x51_75_61_6e_74_75_6d_47;
const PAIR_SALT: u64 = 0x45_6e_74_61_6e_67_6c_65;
const SIDE_SALT: u64 = 0x54_6f_4d_6f_76_65_00_01;

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn cell_key(index: usize, color: Color) -> u64 {
    splitmix64(CELL_SALT ^ ((index as u64) << 1 | color.index() as u64))
}

/// Key of an unordered pairing between two cells.
pub fn pair_key(a: usize, b: usize) -> u64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    splitmix64(PAIR_SALT ^ ((lo as u64) << 32 | hi as u64))
}

pub fn side_key(color: Color) -> u64 {
    splitmix64(SIDE_SALT ^ color.index() as u64)
}
