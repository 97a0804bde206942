//! Images as matrices over `Z_c`.
//!
//! A pixel becomes one cell: black/white maps to 1/0 over `Z_2`, gray to the
//! gray value over `Z_256`, and color to the packed value
//! `R*2^16 + G*2^8 + B` over `Z_(2^24)` (red in the high byte).

use thiserror::Error;

use crate::ca::CellMatrix;

/// Errors from image conversion and the PNM codecs.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    /// Malformed input; `offset` locates the offending byte (or pixel, where
    /// the message says so).
    #[error("{message} (at offset {offset})")]
    Format { offset: usize, message: String },
    /// A value does not fit the requested depth.
    #[error("{0}")]
    Domain(String),
}

/// Pixel depth in bits: 1 (black & white), 8 (gray), or 24 (RGB).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Depth {
    BlackWhite,
    Gray,
    Color,
}

impl Depth {
    pub fn bits(self) -> u8 {
        match self {
            Depth::BlackWhite => 1,
            Depth::Gray => 8,
            Depth::Color => 24,
        }
    }

    pub fn from_bits(bits: u8) -> Option<Depth> {
        match bits {
            1 => Some(Depth::BlackWhite),
            8 => Some(Depth::Gray),
            24 => Some(Depth::Color),
            _ => None,
        }
    }

    pub fn modulus(self) -> u32 {
        1u32 << self.bits()
    }
}

impl std::fmt::Display for Depth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Depth::BlackWhite => "black & white (1 bit)",
            Depth::Gray => "gray (8 bits)",
            Depth::Color => "color (24 bits)",
        };
        f.write_str(name)
    }
}

/// Pixel storage for the three supported depths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pixels {
    /// `true` = black, matching the PBM convention.
    BlackWhite(Vec<bool>),
    Gray(Vec<u8>),
    /// `[R, G, B]` triples.
    Color(Vec<[u8; 3]>),
}

impl Pixels {
    fn len(&self) -> usize {
        match self {
            Pixels::BlackWhite(p) => p.len(),
            Pixels::Gray(p) => p.len(),
            Pixels::Color(p) => p.len(),
        }
    }
}

/// A raster image of `height` rows by `width` columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Pixels,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Pixels) -> Result<Self, CodecError> {
        if width == 0 || height == 0 {
            return Err(CodecError::Domain(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(CodecError::Domain(format!(
                "expected {} pixels for {width}x{height}, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn depth(&self) -> Depth {
        match self.pixels {
            Pixels::BlackWhite(_) => Depth::BlackWhite,
            Pixels::Gray(_) => Depth::Gray,
            Pixels::Color(_) => Depth::Color,
        }
    }

    pub fn pixels(&self) -> &Pixels {
        &self.pixels
    }

    /// Packs the pixels into a configuration over `Z_(2^b)`; matrix cell
    /// `(i, j)` corresponds to pixel row `i`, column `j`.
    pub fn to_matrix(&self) -> CellMatrix {
        let cells: Vec<u32> = match &self.pixels {
            Pixels::BlackWhite(p) => p.iter().map(|&black| u32::from(black)).collect(),
            Pixels::Gray(p) => p.iter().map(|&g| u32::from(g)).collect(),
            Pixels::Color(p) => p
                .iter()
                .map(|&[r, g, b]| (u32::from(r) << 16) | (u32::from(g) << 8) | u32::from(b))
                .collect(),
        };
        CellMatrix::from_cells(self.height, self.width, self.depth().bits(), cells)
            .expect("image invariants imply a well-formed matrix")
    }

    /// Exact inverse of [`Image::to_matrix`]: every cell must be below
    /// `2^depth.bits()`.
    pub fn from_matrix(matrix: &CellMatrix, depth: Depth) -> Result<Image, CodecError> {
        let limit = 1u32 << depth.bits();
        if let Some(bad) = matrix.cells().iter().find(|&&c| c >= limit) {
            return Err(CodecError::Domain(format!(
                "cell value {bad} does not fit depth {} (must be < {limit})",
                depth.bits()
            )));
        }
        let pixels = match depth {
            Depth::BlackWhite => {
                Pixels::BlackWhite(matrix.cells().iter().map(|&c| c == 1).collect())
            }
            Depth::Gray => Pixels::Gray(matrix.cells().iter().map(|&c| c as u8).collect()),
            Depth::Color => Pixels::Color(
                matrix
                    .cells()
                    .iter()
                    .map(|&c| [(c >> 16) as u8, (c >> 8) as u8, c as u8])
                    .collect(),
            ),
        };
        Image::new(matrix.cols(), matrix.rows(), pixels)
    }

    /// Collapses an RGB image whose channels satisfy `R = G = B` everywhere
    /// to a gray image. A pixel with unequal channels is an error, never
    /// averaged; the reported offset is the pixel index.
    pub fn into_gray(self) -> Result<Image, CodecError> {
        match self.pixels {
            Pixels::Gray(_) => Ok(self),
            Pixels::BlackWhite(_) => Err(CodecError::Domain(
                "cannot collapse a black & white image to gray".into(),
            )),
            Pixels::Color(p) => {
                let mut gray = Vec::with_capacity(p.len());
                for (index, &[r, g, b]) in p.iter().enumerate() {
                    if r != g || g != b {
                        return Err(CodecError::Format {
                            offset: index,
                            message: format!(
                                "pixel {index} has unequal channels ({r},{g},{b}); not a gray image"
                            ),
                        });
                    }
                    gray.push(r);
                }
                Image::new(self.width, self.height, Pixels::Gray(gray))
            }
        }
    }
}
