//! Synthetic luminance images.
//!
//! Images are 72x64 so that every dHash cell covers exactly 8x8 pixels.
//! Photos: a random 9x8 grid of cell levels in 16..=240 plus independent
//! per-pixel noise in -12..=12. Non-photos: cells drawn from a six-level
//! palette, no noise. Near-duplicates copy an earlier image; photo copies get
//! fresh per-pixel noise in -3..=3, non-photo copies a uniform brightness
//! shift of 1..=3.

use crate::media::LuminanceImage;
use crate::rng::XorShift64Star;

pub const WIDTH: u32 = 72;
pub const HEIGHT: u32 = 64;
const CELL: u32 = 8;
const PALETTE: [u8; 6] = [0, 51, 102, 153, 204, 255];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageKind {
    Photo,
    NonPhoto,
}

fn clamp_u8(v: i32) -> u8 {
    v.clamp(0, 255) as u8
}

fn cell_grid(rng: &mut XorShift64Star, pick: impl Fn(&mut XorShift64Star) -> u8) -> Vec<u8> {
    (0..(WIDTH / CELL) * (HEIGHT / CELL)).map(|_| pick(rng)).collect()
}

pub fn photo(rng: &mut XorShift64Star) -> LuminanceImage {
    let cells = cell_grid(rng, |r| r.range(16, 240) as u8);
    let pixels = (0..HEIGHT)
        .flat_map(|y| (0..WIDTH).map(move |x| (x, y)))
        .map(|(x, y)| {
            let base = cells[((y / CELL) * (WIDTH / CELL) + x / CELL) as usize] as i32;
            clamp_u8(base + rng.range(0, 24) as i32 - 12)
        })
        .collect();
    LuminanceImage::new(WIDTH, HEIGHT, pixels).expect("fixed dimensions")
}

pub fn non_photo(rng: &mut XorShift64Star) -> LuminanceImage {
    let cells = cell_grid(rng, |r| PALETTE[r.below(PALETTE.len())]);
    LuminanceImage::from_fn(WIDTH, HEIGHT, |x, y| {
        cells[((y / CELL) * (WIDTH / CELL) + x / CELL) as usize]
    })
    .expect("fixed dimensions")
}

pub fn near_duplicate(rng: &mut XorShift64Star, src: &LuminanceImage, kind: ImageKind) -> LuminanceImage {
    let pixels = match kind {
        ImageKind::Photo => src
            .pixels()
            .iter()
            .map(|&p| clamp_u8(p as i32 + rng.range(0, 6) as i32 - 3))
            .collect(),
        ImageKind::NonPhoto => {
            let shift = rng.range(1, 3) as i32;
            src.pixels().iter().map(|&p| clamp_u8(p as i32 + shift)).collect()
        }
    };
    LuminanceImage::new(src.width(), src.height(), pixels).expect("same dimensions")
}
