//! Binary PGM (P5) images, 8 or 16 bits per sample.

use std::path::Path;

use thiserror::Error;
use wavelift_core::transform::Image;

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("not a binary PGM file (expected magic P5)")]
    BadMagic,
    #[error("malformed PGM header: {0}")]
    BadHeader(String),
    #[error("maxval {0} out of range 1..=65535")]
    BadMaxval(u32),
    #[error("truncated pixel data: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub pixels: Vec<u16>,
}

impl Pgm {
    fn bytes_per_sample(&self) -> usize {
        if self.maxval > 255 {
            2
        } else {
            1
        }
    }

    /// Samples scaled to `[0, 1)` by `v / (maxval + 1)`.
    pub fn to_image(&self) -> Image {
        let d = f64::from(self.maxval) + 1.0;
        let samples = self.pixels.iter().map(|v| f64::from(*v) / d).collect();
        Image::new(self.width, self.height, samples).expect("pixel count matches dimensions")
    }

    /// Inverse of [`Pgm::to_image`], rounding and clamping to `0..=maxval`.
    pub fn from_image(img: &Image, maxval: u16) -> Pgm {
        let d = f64::from(maxval) + 1.0;
        let pixels = img
            .samples
            .iter()
            .map(|v| (v * d).round().clamp(0.0, f64::from(maxval)) as u16)
            .collect();
        Pgm {
            width: img.width,
            height: img.height,
            maxval,
            pixels,
        }
    }
}

struct Header<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b == b'#' {
                while self.data.get(self.pos).is_some_and(|b| *b != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32, PgmError> {
        self.skip_space();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PgmError::BadHeader(format!("missing or invalid {what}")))
    }
}

pub fn parse(data: &[u8]) -> Result<Pgm, PgmError> {
    if !data.starts_with(b"P5") {
        return Err(PgmError::BadMagic);
    }
    let mut h = Header { data, pos: 2 };
    let width = h.number("width")? as usize;
    let height = h.number("height")? as usize;
    let maxval = h.number("maxval")?;
    if !(1..=65535).contains(&maxval) {
        return Err(PgmError::BadMaxval(maxval));
    }
    if width == 0 || height == 0 {
        return Err(PgmError::BadHeader("zero dimension".into()));
    }
    // exactly one whitespace byte separates the header from the raster
    if !data.get(h.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(PgmError::BadHeader("no whitespace after maxval".into()));
    }
    let raster = &data[h.pos + 1..];
    let mut pgm = Pgm {
        width,
        height,
        maxval: maxval as u16,
        pixels: Vec::new(),
    };
    let bps = pgm.bytes_per_sample();
    let expected = width * height * bps;
    if raster.len() < expected {
        return Err(PgmError::Truncated {
            expected,
            found: raster.len(),
        });
    }
    pgm.pixels = if bps == 1 {
        raster[..expected].iter().map(|b| u16::from(*b)).collect()
    } else {
        raster[..expected]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    };
    Ok(pgm)
}

pub fn encode(pgm: &Pgm) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{}\n", pgm.width, pgm.height, pgm.maxval).into_bytes();
    if pgm.bytes_per_sample() == 1 {
        out.extend(pgm.pixels.iter().map(|v| *v as u8));
    } else {
        out.extend(pgm.pixels.iter().flat_map(|v| v.to_be_bytes()));
    }
    out
}

pub fn read(path: &Path) -> Result<Pgm, PgmError> {
    parse(&std::fs::read(path)?)
}

pub fn write(path: &Path, pgm: &Pgm) -> Result<(), PgmError> {
    Ok(std::fs::write(path, encode(pgm))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_16_bit() {
        let mut data = b"P5\n# made by hand\n2 1\n# depth\n1000\n".to_vec();
        data.extend([0x03, 0xE8, 0x00, 0x01]);
        let p = parse(&data).unwrap();
        assert_eq!((p.width, p.height, p.maxval), (2, 1, 1000));
        assert_eq!(p.pixels, vec![1000, 1]);
        assert_eq!(parse(&encode(&p)).unwrap(), p);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse(b"P2\n1 1\n255\n0"), Err(PgmError::BadMagic)));
        assert!(matches!(parse(b"P5\n2 2\n255\n\x01"), Err(PgmError::Truncated { .. })));
        assert!(matches!(parse(b"P5\n2 2\n0\n"), Err(PgmError::BadMaxval(0))));
        assert!(matches!(parse(b"P5\nx 2\n255\n"), Err(PgmError::BadHeader(_))));
    }

    #[test]
    fn normalization() {
        let p = Pgm {
            width: 2,
            height: 1,
            maxval: 255,
            pixels: vec![0, 128],
        };
        let img = p.to_image();
        assert_eq!(img.samples, vec![0.0, 0.5]);
        assert_eq!(Pgm::from_image(&img, 255), p);
    }
}
