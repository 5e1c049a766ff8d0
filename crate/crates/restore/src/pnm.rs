//! Image files: binary and plain PGM, and a raw little-endian float format.
//!
//! `f64le` files start with a 16-byte ASCII header holding `W H`, padded
//! with spaces and terminated by `\n`, followed by `W * H` row-major
//! little-endian `f64` values. They round-trip exactly.

use std::fs;
use std::path::Path;

use ppxa_core::Image;

#[derive(Debug, thiserror::Error)]
pub enum PnmError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed image: {0}")]
    Format(String),
    #[error("unsupported image extension for {0} (use .pgm or .f64le)")]
    Extension(String),
}

const F64_HEADER: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Pgm,
    F64le,
}

impl Format {
    pub fn from_path(path: &Path) -> Result<Format, PnmError> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("pgm") => Ok(Format::Pgm),
            Some("f64le") | Some("f64") => Ok(Format::F64le),
            _ => Err(PnmError::Extension(path.display().to_string())),
        }
    }
}

/// Splits a PNM header into tokens, skipping `#` comments.
struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn token(&mut self) -> Result<&'a str, PnmError> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PnmError::Format("unexpected end of header".into()));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| PnmError::Format("non-ASCII header".into()))
    }

    fn number(&mut self, what: &str) -> Result<usize, PnmError> {
        let t = self.token()?;
        t.parse()
            .map_err(|_| PnmError::Format(format!("bad {what} `{t}`")))
    }
}

fn decode_pgm(bytes: &[u8]) -> Result<Image, PnmError> {
    let mut h = Header { bytes, pos: 0 };
    let magic = h.token()?;
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval = h.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(PnmError::Format("empty image".into()));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(PnmError::Format(format!(
            "maxval {maxval} outside 1..=65535"
        )));
    }
    let n = width * height;
    let data: Vec<f64> = match magic {
        "P2" => {
            let mut v = Vec::with_capacity(n);
            for _ in 0..n {
                let x = h.number("sample")?;
                if x > maxval {
                    return Err(PnmError::Format(format!(
                        "sample {x} exceeds maxval {maxval}"
                    )));
                }
                v.push(x as f64);
            }
            v
        }
        "P5" => {
            // exactly one whitespace byte separates the header from the raster
            let start = h.pos + 1;
            let bps = if maxval > 255 { 2 } else { 1 };
            let raster = bytes
                .get(start..start + n * bps)
                .ok_or_else(|| PnmError::Format("truncated raster".into()))?;
            if bps == 1 {
                raster.iter().map(|&b| b as f64).collect()
            } else {
                raster
                    .chunks_exact(2)
                    .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64)
                    .collect()
            }
        }
        other => {
            return Err(PnmError::Format(format!(
                "unsupported magic `{other}` (expected P2 or P5)"
            )))
        }
    };
    Image::from_vec(height, width, data).map_err(|e| PnmError::Format(e.to_string()))
}

fn decode_f64le(bytes: &[u8]) -> Result<Image, PnmError> {
    let header = bytes
        .get(..F64_HEADER)
        .ok_or_else(|| PnmError::Format("truncated f64le header".into()))?;
    if header[F64_HEADER - 1] != b'\n' {
        return Err(PnmError::Format(
            "f64le header must end with a newline".into(),
        ));
    }
    let text = std::str::from_utf8(&header[..F64_HEADER - 1])
        .map_err(|_| PnmError::Format("non-ASCII header".into()))?;
    let dims: Vec<usize> = text
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| PnmError::Format(format!("bad dimension `{t}`")))
        })
        .collect::<Result<_, _>>()?;
    let [w, h] = dims[..] else {
        return Err(PnmError::Format("f64le header must hold `W H`".into()));
    };
    let body = &bytes[F64_HEADER..];
    if body.len() != w * h * 8 {
        return Err(PnmError::Format(format!(
            "expected {} bytes of samples, found {}",
            w * h * 8,
            body.len()
        )));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Image::from_vec(h, w, data).map_err(|e| PnmError::Format(e.to_string()))
}

/// Decodes PGM (`P2`/`P5`) or `f64le` bytes, recognized by their content.
pub fn decode(bytes: &[u8]) -> Result<Image, PnmError> {
    if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        decode_pgm(bytes)
    } else {
        decode_f64le(bytes)
    }
}

/// Samples are rounded and clipped to `[0, 65535]`. Binary 8-bit output is
/// used when every sample fits, plain text otherwise or when `ascii` is set.
pub fn encode_pgm(img: &Image, ascii: bool) -> Vec<u8> {
    let vals: Vec<u32> = img
        .as_slice()
        .iter()
        .map(|&v| v.round().clamp(0.0, 65535.0) as u32)
        .collect();
    let max = vals.iter().copied().max().unwrap_or(0);
    let (w, h) = (img.cols(), img.rows());
    if max <= 255 && !ascii {
        let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
        out.extend(vals.iter().map(|&v| v as u8));
        return out;
    }
    let maxval = max.max(255);
    let mut out = format!("P2\n{w} {h}\n{maxval}\n");
    for row in vals.chunks(w) {
        let line: Vec<String> = row.iter().map(u32::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out.into_bytes()
}

pub fn encode_f64le(img: &Image) -> Vec<u8> {
    let mut header = format!("{} {}", img.cols(), img.rows());
    while header.len() < F64_HEADER - 1 {
        header.push(' ');
    }
    header.push('\n');
    let mut out = header.into_bytes();
    for v in img.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn read_image(path: &Path) -> Result<Image, PnmError> {
    let bytes = fs::read(path).map_err(|source| PnmError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode(&bytes)
}

/// Writes in the format given by the extension (`.pgm` or `.f64le`).
pub fn write_image(path: &Path, img: &Image) -> Result<(), PnmError> {
    let bytes = match Format::from_path(path)? {
        Format::Pgm => encode_pgm(img, false),
        Format::F64le => encode_f64le(img),
    };
    fs::write(path, bytes).map_err(|source| PnmError::Io {
        path: path.display().to_string(),
        source,
    })
}
