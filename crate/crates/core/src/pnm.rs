//! Raw (binary) portable-anymap codecs: PBM (`P4`), PGM (`P5`), PPM (`P6`).
//!
//! Only the raw variants with maxval 255 are supported. The encoder emits
//! canonical single-whitespace headers (`P5\n<w> <h>\n255\n`), so encoding a
//! decoded canonical file is byte-identical.

use crate::bitpack;
use crate::image::{CodecError, Image, Pixels};

/// Decodes a raw PBM/PGM/PPM file.
pub fn decode(bytes: &[u8]) -> Result<Image, CodecError> {
    let mut parser = Parser { bytes, pos: 0 };
    let magic = parser.take(2, "magic number")?;
    let kind = match magic {
        b"P4" => Kind::Pbm,
        b"P5" => Kind::Pgm,
        b"P6" => Kind::Ppm,
        _ => {
            return Err(CodecError::Format {
                offset: 0,
                message: format!(
                    "unsupported magic {:?}; expected raw P4, P5, or P6",
                    String::from_utf8_lossy(magic)
                ),
            })
        }
    };
    let width = parser.ascii_number("width")?;
    let height = parser.ascii_number("height")?;
    if width == 0 || height == 0 {
        return Err(CodecError::Format {
            offset: parser.pos,
            message: format!("image dimensions must be positive, got {width}x{height}"),
        });
    }
    if !matches!(kind, Kind::Pbm) {
        let maxval_offset = parser.pos;
        let maxval = parser.ascii_number("maxval")?;
        if maxval != 255 {
            return Err(CodecError::Format {
                offset: maxval_offset,
                message: format!("unsupported maxval {maxval}; only 255 is accepted"),
            });
        }
    }
    parser.single_whitespace_before_payload()?;

    let payload_offset = parser.pos;
    let payload_len = match kind {
        Kind::Pbm => bitpack::packed_row_len(width) * height,
        Kind::Pgm => width * height,
        Kind::Ppm => 3 * width * height,
    };
    let payload = parser.take(payload_len, "pixel payload")?;
    if parser.pos != parser.bytes.len() {
        return Err(CodecError::Format {
            offset: parser.pos,
            message: format!(
                "{} trailing bytes after the pixel payload",
                parser.bytes.len() - parser.pos
            ),
        });
    }

    let pixels = match kind {
        Kind::Pbm => {
            let row_len = bitpack::packed_row_len(width);
            let mut flags = Vec::with_capacity(width * height);
            for row in payload.chunks_exact(row_len) {
                flags.extend(bitpack::unpack_row(row, width));
            }
            Pixels::BlackWhite(flags)
        }
        Kind::Pgm => Pixels::Gray(payload.to_vec()),
        Kind::Ppm => Pixels::Color(
            payload
                .chunks_exact(3)
                .map(|c| [c[0], c[1], c[2]])
                .collect(),
        ),
    };
    Image::new(width, height, pixels).map_err(|e| match e {
        CodecError::Domain(message) => CodecError::Format {
            offset: payload_offset,
            message,
        },
        other => other,
    })
}

/// Encodes an image in the raw format matching its depth.
pub fn encode(img: &Image) -> Vec<u8> {
    let mut out = Vec::new();
    match img.pixels() {
        Pixels::BlackWhite(flags) => {
            out.extend_from_slice(format!("P4\n{} {}\n", img.width(), img.height()).as_bytes());
            for row in flags.chunks_exact(img.width()) {
                bitpack::pack_row(row.iter().copied(), &mut out);
            }
        }
        Pixels::Gray(values) => {
            out.extend_from_slice(
                format!("P5\n{} {}\n255\n", img.width(), img.height()).as_bytes(),
            );
            out.extend_from_slice(values);
        }
        Pixels::Color(triples) => {
            out.extend_from_slice(
                format!("P6\n{} {}\n255\n", img.width(), img.height()).as_bytes(),
            );
            for t in triples {
                out.extend_from_slice(t);
            }
        }
    }
    out
}

/// File extension conventional for the raw format of `depth`.
pub fn extension(depth: crate::image::Depth) -> &'static str {
    match depth {
        crate::image::Depth::BlackWhite => "pbm",
        crate::image::Depth::Gray => "pgm",
        crate::image::Depth::Color => "ppm",
    }
}

enum Kind {
    Pbm,
    Pgm,
    Ppm,
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8], CodecError> {
        if self.pos + len > self.bytes.len() {
            return Err(CodecError::Format {
                offset: self.bytes.len(),
                message: format!(
                    "truncated file: {what} needs {len} bytes, {} remain",
                    self.bytes.len() - self.pos
                ),
            });
        }
        let slice = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(slice)
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    /// Skips whitespace and `#` comments (which run to end of line).
    fn skip_separators(&mut self, what: &str) -> Result<(), CodecError> {
        let mut skipped = false;
        loop {
            match self.peek() {
                Some(b' ' | b'\t' | b'\r' | b'\n') => {
                    self.pos += 1;
                    skipped = true;
                }
                Some(b'#') => {
                    while let Some(c) = self.peek() {
                        self.pos += 1;
                        if c == b'\n' {
                            break;
                        }
                    }
                    skipped = true;
                }
                _ => break,
            }
        }
        if !skipped {
            return Err(CodecError::Format {
                offset: self.pos,
                message: format!("expected whitespace before {what}"),
            });
        }
        Ok(())
    }

    fn ascii_number(&mut self, what: &str) -> Result<usize, CodecError> {
        self.skip_separators(what)?;
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(CodecError::Format {
                offset: start,
                message: format!("expected a decimal {what}"),
            });
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("digits are ASCII");
        text.parse().map_err(|_| CodecError::Format {
            offset: start,
            message: format!("{what} {text} out of range"),
        })
    }

    /// Exactly one whitespace byte separates the header from the payload.
    fn single_whitespace_before_payload(&mut self) -> Result<(), CodecError> {
        match self.peek() {
            Some(b' ' | b'\t' | b'\r' | b'\n') => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(CodecError::Format {
                offset: self.pos,
                message: "expected a single whitespace byte before the payload".into(),
            }),
        }
    }
}
