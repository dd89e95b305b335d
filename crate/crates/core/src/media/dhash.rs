//! Difference hash.
//!
//! The image is area-mean downsampled to a 9x8 grid using exact fractional
//! pixel coverage, then bit `(r, c)` is set iff `cell(r, c) > cell(r, c + 1)`.
//! Bits are scanned row-major with `(0, 0)` in the most significant bit.
//!
//! Every cell covers the same area, so comparisons run on the integer
//! coverage-weighted sums and the hash is bit-exact.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::pgm::LuminanceImage;

pub const GRID_W: u32 = 9;
pub const GRID_H: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PerceptualHash(pub u64);

impl PerceptualHash {
    pub fn bit(&self, row: usize, col: usize) -> bool {
        (self.0 >> (63 - (row * 8 + col))) & 1 == 1
    }
}

impl fmt::Display for PerceptualHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

/// Coverage of each source index over `cells` equal-width cells, in units of
/// `1/cells` of a pixel: `(cell, weight)` pairs per source index.
fn coverage(len: u32, cells: u32) -> Vec<Vec<(usize, u64)>> {
    let len = len as u64;
    let cells = cells as u64;
    (0..len)
        .map(|i| {
            let lo = i * cells;
            let hi = lo + cells;
            let first = lo / len;
            let last = ((hi - 1) / len).min(cells - 1);
            (first..=last)
                .filter_map(|c| {
                    let w = hi.min((c + 1) * len) - lo.max(c * len);
                    (w > 0).then_some((c as usize, w))
                })
                .collect()
        })
        .collect()
}

/// Coverage-weighted 9x8 cell sums (row-major, 8 rows of 9).
pub fn cell_sums(img: &LuminanceImage) -> [[u64; GRID_W as usize]; GRID_H as usize] {
    let xs = coverage(img.width(), GRID_W);
    let ys = coverage(img.height(), GRID_H);
    let mut cells = [[0u64; GRID_W as usize]; GRID_H as usize];
    let mut row_acc = [0u64; GRID_W as usize];
    for (y, ycov) in ys.iter().enumerate() {
        row_acc.fill(0);
        let row = &img.pixels()[y * img.width() as usize..(y + 1) * img.width() as usize];
        for (p, xcov) in row.iter().zip(&xs) {
            for &(c, w) in xcov {
                row_acc[c] += w * *p as u64;
            }
        }
        for &(r, w) in ycov {
            for c in 0..GRID_W as usize {
                cells[r][c] += w * row_acc[c];
            }
        }
    }
    cells
}

pub fn dhash(img: &LuminanceImage) -> PerceptualHash {
    let cells = cell_sums(img);
    let mut bits = 0u64;
    for row in &cells {
        for c in 0..8 {
            bits = (bits << 1) | u64::from(row[c] > row[c + 1]);
        }
    }
    PerceptualHash(bits)
}

pub fn hamming(a: PerceptualHash, b: PerceptualHash) -> u32 {
    (a.0 ^ b.0).count_ones()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_hashes_to_zero() {
        let img = LuminanceImage::from_fn(33, 17, |_, _| 128).unwrap();
        assert_eq!(dhash(&img), PerceptualHash(0));
    }

    #[test]
    fn strictly_decreasing_rows_hash_to_ones() {
        let img = LuminanceImage::from_fn(90, 8, |x, _| 255 - x as u8).unwrap();
        assert_eq!(dhash(&img), PerceptualHash(u64::MAX));
        // fewer columns than cells: fractional coverage still decreases
        let img = LuminanceImage::from_fn(3, 2, |x, _| 200 - 50 * x as u8).unwrap();
        let sums = cell_sums(&img);
        for row in &sums {
            for c in 0..8 {
                assert!(row[c] >= row[c + 1]);
            }
        }
    }

    #[test]
    fn checkerboard_matches_hand_downsample() {
        // 18x16 checkerboard of 2x2 blocks: each 9x8 cell is one block.
        let img = LuminanceImage::from_fn(18, 16, |x, y| {
            if ((x / 2) + (y / 2)) % 2 == 0 { 200 } else { 40 }
        })
        .unwrap();
        // Hand downsample: cell(r, c) = 200 when r + c even, else 40.
        // Bit (r, c) = cell(r, c) > cell(r, c + 1) = (r + c) even.
        // Even rows: 10101010 = 0xAA; odd rows: 01010101 = 0x55.
        let expected = 0xAA55_AA55_AA55_AA55u64;
        assert_eq!(dhash(&img), PerceptualHash(expected));
    }

    #[test]
    fn hamming_cases() {
        let a = PerceptualHash(0x1234_5678_9abc_def0);
        assert_eq!(hamming(a, a), 0);
        assert_eq!(hamming(PerceptualHash(0), PerceptualHash(u64::MAX)), 64);
        let b = PerceptualHash(a.0 ^ (1 << 0) ^ (1 << 17) ^ (1 << 63));
        assert_eq!(hamming(a, b), 3);
    }

    #[test]
    fn bit_accessor_is_row_major_msb_first() {
        let h = PerceptualHash(1 << 63);
        assert!(h.bit(0, 0));
        assert!(!h.bit(0, 1));
        let h = PerceptualHash(1);
        assert!(h.bit(7, 7));
    }
}
