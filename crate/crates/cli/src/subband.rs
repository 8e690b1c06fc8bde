//! Subband container: an ASCII header followed by little-endian `f64` planes.
//!
//! ```text
//! WAVELIFT-SUBBANDS 1
//! wavelet cdf53
//! scheme monolithic
//! levels 2
//! boundary periodic
//! scaling 1
//! size 64 64
//! crop 63 63
//! data
//! ```
//!
//! The payload holds, for level 1 up to the coarsest level, the planes LL, HL,
//! LH and HH of that level, each row-major. Level `k` planes measure
//! `(width >> k) x (height >> k)`. The LL plane of a non-final level is the
//! input of the next level and is not needed for reconstruction.

use std::io::Write;
use std::path::Path;

use thiserror::Error;
use wavelift_core::schemes::SchemeKind;
use wavelift_core::transform::{BoundaryMode, Pyramid, QuadGrid};
use wavelift_core::wavelets::WaveletName;

pub const MAGIC: &str = "WAVELIFT-SUBBANDS 1";

#[derive(Debug, Error)]
pub enum SubbandError {
    #[error("not a subband file")]
    BadMagic,
    #[error("bad header field '{0}'")]
    BadField(String),
    #[error("missing header field '{0}'")]
    MissingField(&'static str),
    #[error("payload has {found} bytes, expected {expected}")]
    BadPayload { expected: usize, found: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubbandFile {
    pub wavelet: WaveletName,
    pub scheme: SchemeKind,
    pub boundary: BoundaryMode,
    pub scaling: bool,
    /// Dimensions of the transformed (possibly padded) image.
    pub width: usize,
    pub height: usize,
    /// Dimensions of the original image before padding.
    pub crop_width: usize,
    pub crop_height: usize,
    pub pyramid: Pyramid,
}

impl SubbandFile {
    pub fn levels(&self) -> usize {
        self.pyramid.levels.len()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        writeln!(out, "{MAGIC}").unwrap();
        writeln!(out, "wavelet {}", self.wavelet).unwrap();
        writeln!(out, "scheme {}", self.scheme).unwrap();
        writeln!(out, "levels {}", self.levels()).unwrap();
        writeln!(out, "boundary {}", self.boundary.as_str()).unwrap();
        writeln!(out, "scaling {}", u8::from(self.scaling)).unwrap();
        writeln!(out, "size {} {}", self.width, self.height).unwrap();
        writeln!(out, "crop {} {}", self.crop_width, self.crop_height).unwrap();
        writeln!(out, "data").unwrap();
        for q in &self.pyramid.levels {
            for plane in &q.planes {
                for v in plane {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        out
    }

    pub fn decode(data: &[u8]) -> Result<SubbandFile, SubbandError> {
        let mut lines = Vec::new();
        let mut pos = 0;
        loop {
            let end = data[pos..]
                .iter()
                .position(|b| *b == b'\n')
                .ok_or(SubbandError::MissingField("data"))?;
            let line = std::str::from_utf8(&data[pos..pos + end]).map_err(|_| SubbandError::BadMagic)?;
            pos += end + 1;
            if line == "data" {
                break;
            }
            lines.push(line.to_string());
            if lines.len() > 32 {
                return Err(SubbandError::MissingField("data"));
            }
        }
        if lines.first().map(String::as_str) != Some(MAGIC) {
            return Err(SubbandError::BadMagic);
        }
        let field = |key: &'static str| -> Result<&str, SubbandError> {
            lines[1..]
                .iter()
                .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(' ')))
                .ok_or(SubbandError::MissingField(key))
        };
        let bad = |s: &str| SubbandError::BadField(s.to_string());
        let pair = |key: &'static str| -> Result<(usize, usize), SubbandError> {
            let v = field(key)?;
            let mut it = v.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
                _ => Err(bad(v)),
            }
        };
        let wavelet = field("wavelet")?.parse().map_err(|_| bad(field("wavelet").unwrap()))?;
        let scheme = field("scheme")?.parse().map_err(|_| bad(field("scheme").unwrap()))?;
        let boundary = field("boundary")?.parse().map_err(|_| bad(field("boundary").unwrap()))?;
        let levels: usize = field("levels")?.parse().map_err(|_| bad(field("levels").unwrap()))?;
        let scaling = match field("scaling")? {
            "0" => false,
            "1" => true,
            s => return Err(bad(s)),
        };
        let (width, height) = pair("size")?;
        let (crop_width, crop_height) = pair("crop")?;
        if levels == 0 || levels > 30 || width % (1 << levels) != 0 || height % (1 << levels) != 0 {
            return Err(bad(&format!("levels {levels} for size {width}x{height}")));
        }

        let payload = &data[pos..];
        let expected: usize = (1..=levels).map(|k| 4 * (width >> k) * (height >> k) * 8).sum();
        if payload.len() != expected {
            return Err(SubbandError::BadPayload {
                expected,
                found: payload.len(),
            });
        }
        let mut values = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
        let mut out = Vec::with_capacity(levels);
        for k in 1..=levels {
            let (w, h) = (width >> k, height >> k);
            let mut q = QuadGrid::zeros(w, h);
            for plane in q.planes.iter_mut() {
                plane.iter_mut().for_each(|v| *v = values.next().expect("length checked"));
            }
            out.push(q);
        }
        Ok(SubbandFile {
            wavelet,
            scheme,
            boundary,
            scaling,
            width,
            height,
            crop_width,
            crop_height,
            pyramid: Pyramid { levels: out },
        })
    }

    pub fn read(path: &Path) -> Result<SubbandFile, SubbandError> {
        SubbandFile::decode(&std::fs::read(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<(), SubbandError> {
        Ok(std::fs::write(path, self.encode())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SubbandFile {
        let mut l1 = QuadGrid::zeros(4, 2);
        l1.planes[1][3] = -0.125;
        let mut l2 = QuadGrid::zeros(2, 1);
        l2.planes[0][1] = std::f64::consts::PI;
        SubbandFile {
            wavelet: WaveletName::Dd137,
            scheme: SchemeKind::ExplosiveStar,
            boundary: BoundaryMode::Symmetric,
            scaling: true,
            width: 8,
            height: 4,
            crop_width: 7,
            crop_height: 3,
            pyramid: Pyramid { levels: vec![l1, l2] },
        }
    }

    #[test]
    fn round_trip() {
        let f = sample();
        assert_eq!(SubbandFile::decode(&f.encode()).unwrap(), f);
    }

    #[test]
    fn truncated_payload() {
        let mut bytes = sample().encode();
        bytes.pop();
        assert!(matches!(SubbandFile::decode(&bytes), Err(SubbandError::BadPayload { .. })));
    }

    #[test]
    fn wrong_magic() {
        assert!(matches!(SubbandFile::decode(b"P5\ndata\n"), Err(SubbandError::BadMagic)));
    }
}
