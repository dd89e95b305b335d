//! Binary PGM (`P5`) luminance images, 8-bit samples only.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ImageError {
    #[error("not a binary PGM (P5) image")]
    BadMagic,
    #[error("malformed PGM header: {0}")]
    BadHeader(&'static str),
    #[error("unsupported maxval {0} (8-bit samples only)")]
    UnsupportedMaxval(u32),
    #[error("truncated pixel data: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("image dimensions must be positive")]
    Empty,
}

/// Row-major 8-bit luminance raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LuminanceImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl LuminanceImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::Empty);
        }
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(ImageError::Truncated {
                expected,
                found: pixels.len(),
            });
        }
        Ok(LuminanceImage {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> u8) -> Result<Self, ImageError> {
        let mut px = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                px.push(f(x, y));
            }
        }
        Self::new(width, height, px)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn decode_pgm(bytes: &[u8]) -> Result<Self, ImageError> {
        let mut pos = 0usize;
        if bytes.len() < 2 || &bytes[..2] != b"P5" {
            return Err(ImageError::BadMagic);
        }
        pos += 2;
        let mut fields = [0u32; 3];
        for slot in fields.iter_mut() {
            // whitespace and comments
            loop {
                match bytes.get(pos) {
                    Some(b) if b.is_ascii_whitespace() => pos += 1,
                    Some(b'#') => {
                        while let Some(&b) = bytes.get(pos) {
                            pos += 1;
                            if b == b'\n' || b == b'\r' {
                                break;
                            }
                        }
                    }
                    Some(_) => break,
                    None => return Err(ImageError::BadHeader("unexpected end of header")),
                }
            }
            let start = pos;
            while bytes.get(pos).is_some_and(|b| b.is_ascii_digit()) {
                pos += 1;
            }
            if start == pos {
                return Err(ImageError::BadHeader("expected a number"));
            }
            *slot = std::str::from_utf8(&bytes[start..pos])
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or(ImageError::BadHeader("number out of range"))?;
        }
        // exactly one whitespace byte before the raster
        match bytes.get(pos) {
            Some(b) if b.is_ascii_whitespace() => pos += 1,
            _ => return Err(ImageError::BadHeader("missing separator before raster")),
        }
        let [width, height, maxval] = fields;
        if maxval == 0 || maxval > 255 {
            return Err(ImageError::UnsupportedMaxval(maxval));
        }
        if width == 0 || height == 0 {
            return Err(ImageError::Empty);
        }
        let expected = (width as usize)
            .checked_mul(height as usize)
            .ok_or(ImageError::BadHeader("dimensions overflow"))?;
        let raster = &bytes[pos..];
        if raster.len() < expected {
            return Err(ImageError::Truncated {
                expected,
                found: raster.len(),
            });
        }
        let pixels = if maxval == 255 {
            raster[..expected].to_vec()
        } else {
            raster[..expected]
                .iter()
                .map(|&v| ((v.min(maxval as u8) as u32 * 255 + maxval / 2) / maxval) as u8)
                .collect()
        };
        Self::new(width, height, pixels)
    }

    pub fn encode_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    /// 256-bin luminance histogram.
    pub fn histogram(&self) -> [u64; 256] {
        let mut h = [0u64; 256];
        for &p in &self.pixels {
            h[p as usize] += 1;
        }
        h
    }
}
