//! Bit-exact serialization of shares: the `CAS1` container.
//!
//! A share file carries one configuration plus everything needed to recover
//! without the dealer: threshold parameters, the absolute time index, the
//! rule numbers, and a random scheme id that prevents mixing shares from
//! different splits. All multi-byte fields are big-endian; a CRC-32 (IEEE
//! polynomial) over every preceding byte closes the file.
//!
//! Layout:
//!
//! ```text
//! magic "CAS1" | version 0x01 | b | k | n | m:2 | i:2 | r:4 | s:4
//! | scheme id:16 | rule count (k-1) | rules: 2 each
//! | payload length:8 | payload | crc32:4
//! ```
//!
//! Payload packing is row-major: depth 1 packs eight cells per byte
//! MSB-first with each row padded to a byte boundary, depth 8 is one byte
//! per cell, depth 24 three bytes per cell with red high.

use std::fmt;

use rand::{CryptoRng, RngCore};
use thiserror::Error;

use crate::bitpack;
use crate::ca::{CellMatrix, RuleNumber};
use crate::image::Depth;

pub const MAGIC: [u8; 4] = *b"CAS1";
pub const FORMAT_VERSION: u8 = 1;

/// Suggested extension for share files.
pub const EXTENSION: &str = "cas";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShareError {
    /// Structurally malformed share file.
    #[error("{message} (at byte {offset})")]
    Format { offset: usize, message: String },
    /// The checksum does not match the file contents.
    #[error("crc mismatch: stored {stored:08x}, computed {computed:08x}")]
    Integrity { stored: u32, computed: u32 },
    /// A share violates the header invariants.
    #[error("{0}")]
    Encode(String),
    /// Shares from different splits were mixed.
    #[error("{0}")]
    MixedScheme(String),
    /// No run of `k` consecutive share indices exists.
    #[error("need {needed} consecutive shares; longest consecutive run: {longest_run}")]
    InsufficientShares { needed: usize, longest_run: usize },
}

/// Random 16-byte identifier tying the shares of one split together.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SchemeId([u8; 16]);

impl SchemeId {
    pub fn new(bytes: [u8; 16]) -> Self {
        Self(bytes)
    }

    pub fn random(rng: &mut (impl RngCore + CryptoRng)) -> Self {
        let mut bytes = [0u8; 16];
        rng.fill_bytes(&mut bytes);
        Self(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 16] {
        &self.0
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SchemeId({self})")
    }
}

/// Everything in a share file except the payload cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareHeader {
    pub depth: Depth,
    /// Threshold: consecutive shares needed for recovery.
    pub k: u8,
    /// Total number of shares produced by the split.
    pub n: u8,
    /// Time index of the first share (`S_0 = C^(m)`).
    pub m: u16,
    /// Absolute time index `i` of this share's configuration `C^(i)`.
    pub index: u16,
    pub rows: u32,
    pub cols: u32,
    pub scheme_id: SchemeId,
    /// The `k - 1` rule numbers; identical in every share of a split.
    pub rules: Vec<RuleNumber>,
}

impl ShareHeader {
    fn validate(&self) -> Result<(), ShareError> {
        if self.k < 2 {
            return Err(ShareError::Encode(format!(
                "threshold k must be at least 2, got {}",
                self.k
            )));
        }
        if self.n < self.k {
            return Err(ShareError::Encode(format!(
                "share count n = {} is below the threshold k = {}",
                self.n, self.k
            )));
        }
        if self.m < u16::from(self.k) {
            return Err(ShareError::Encode(format!(
                "offset m = {} must be at least k = {} to keep shares clear of the initial window",
                self.m, self.k
            )));
        }
        let last = u32::from(self.m) + u32::from(self.n) - 1;
        if last > u32::from(u16::MAX) {
            return Err(ShareError::Encode(format!(
                "m + n - 1 = {last} exceeds the 16-bit index field"
            )));
        }
        if u32::from(self.index) < u32::from(self.m) || u32::from(self.index) > last {
            return Err(ShareError::Encode(format!(
                "share index {} outside m..=m+n-1 = {}..={last}",
                self.index, self.m
            )));
        }
        if self.rows == 0 || self.cols == 0 {
            return Err(ShareError::Encode(format!(
                "share dimensions must be positive, got {}x{}",
                self.rows, self.cols
            )));
        }
        if self.rules.len() != usize::from(self.k) - 1 {
            return Err(ShareError::Encode(format!(
                "expected {} rules for k = {}, got {}",
                self.k - 1,
                self.k,
                self.rules.len()
            )));
        }
        Ok(())
    }

    /// True when two headers describe the same split.
    fn same_scheme(&self, other: &ShareHeader) -> bool {
        self.scheme_id == other.scheme_id
            && self.depth == other.depth
            && self.k == other.k
            && self.n == other.n
            && self.m == other.m
            && self.rows == other.rows
            && self.cols == other.cols
            && self.rules == other.rules
    }
}

/// One distributed share: header plus the configuration it carries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Share {
    header: ShareHeader,
    payload: CellMatrix,
}

/// Packed byte length of an `rows x cols` payload at `depth`.
pub fn payload_byte_len(rows: usize, cols: usize, depth: Depth) -> usize {
    match depth {
        Depth::BlackWhite => bitpack::packed_row_len(cols) * rows,
        Depth::Gray => rows * cols,
        Depth::Color => 3 * rows * cols,
    }
}

impl Share {
    pub fn new(header: ShareHeader, payload: CellMatrix) -> Result<Self, ShareError> {
        header.validate()?;
        if payload.rows() != header.rows as usize
            || payload.cols() != header.cols as usize
            || payload.bits() != header.depth.bits()
        {
            return Err(ShareError::Encode(format!(
                "payload is {}x{} over 2^{}, header says {}x{} over 2^{}",
                payload.rows(),
                payload.cols(),
                payload.bits(),
                header.rows,
                header.cols,
                header.depth.bits()
            )));
        }
        Ok(Self { header, payload })
    }

    pub fn header(&self) -> &ShareHeader {
        &self.header
    }

    pub fn payload(&self) -> &CellMatrix {
        &self.payload
    }

    pub fn into_payload(self) -> CellMatrix {
        self.payload
    }

    /// Serializes the share; equal shares produce identical byte strings.
    pub fn encode(&self) -> Vec<u8> {
        let h = &self.header;
        let payload_len = payload_byte_len(h.rows as usize, h.cols as usize, h.depth);
        let mut out = Vec::with_capacity(49 + 2 * h.rules.len() + payload_len);
        out.extend_from_slice(&MAGIC);
        out.push(FORMAT_VERSION);
        out.push(h.depth.bits());
        out.push(h.k);
        out.push(h.n);
        out.extend_from_slice(&h.m.to_be_bytes());
        out.extend_from_slice(&h.index.to_be_bytes());
        out.extend_from_slice(&h.rows.to_be_bytes());
        out.extend_from_slice(&h.cols.to_be_bytes());
        out.extend_from_slice(h.scheme_id.as_bytes());
        out.push(h.k - 1);
        for rule in &h.rules {
            out.extend_from_slice(&rule.value().to_be_bytes());
        }
        out.extend_from_slice(&(payload_len as u64).to_be_bytes());
        match h.depth {
            Depth::BlackWhite => {
                for row in self.payload.cells().chunks_exact(h.cols as usize) {
                    bitpack::pack_row(row.iter().map(|&c| c == 1), &mut out);
                }
            }
            Depth::Gray => out.extend(self.payload.cells().iter().map(|&c| c as u8)),
            Depth::Color => {
                for &c in self.payload.cells() {
                    out.extend_from_slice(&[(c >> 16) as u8, (c >> 8) as u8, c as u8]);
                }
            }
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_be_bytes());
        out
    }

    /// Exact inverse of [`Share::encode`]. The structural frame is parsed
    /// first so truncation reports a format error; the CRC is then verified
    /// before any field is interpreted further.
    pub fn decode(bytes: &[u8]) -> Result<Share, ShareError> {
        let mut r = Reader { bytes, pos: 0 };
        let magic = r.take(4, "magic number")?;
        if magic != MAGIC {
            return Err(ShareError::Format {
                offset: 0,
                message: format!("bad magic {magic:02x?}; not a CAS1 share file"),
            });
        }
        let version = r.byte("format version")?;
        if version != FORMAT_VERSION {
            return Err(ShareError::Format {
                offset: r.pos - 1,
                message: format!("unsupported format version {version}"),
            });
        }
        let depth_offset = r.pos;
        let depth_bits = r.byte("depth")?;
        let k = r.byte("k")?;
        let n = r.byte("n")?;
        let m = r.u16("m")?;
        let index = r.u16("share index")?;
        let rows = r.u32("rows")?;
        let cols = r.u32("cols")?;
        let id_bytes: [u8; 16] = r.take(16, "scheme id")?.try_into().expect("length checked");
        let rule_count_offset = r.pos;
        let rule_count = r.byte("rule count")?;
        let mut rule_values = Vec::with_capacity(usize::from(rule_count));
        for _ in 0..rule_count {
            rule_values.push((r.pos, r.u16("rule number")?));
        }
        let payload_len_offset = r.pos;
        let payload_len = r.u64("payload length")?;
        let payload_len = usize::try_from(payload_len).map_err(|_| ShareError::Format {
            offset: payload_len_offset,
            message: format!("payload length {payload_len} is unreasonably large"),
        })?;
        let payload_offset = r.pos;
        let payload = r.take(payload_len, "payload")?;
        let crc_offset = r.pos;
        let stored_bytes: [u8; 4] = r.take(4, "crc")?.try_into().expect("length checked");
        if r.pos != bytes.len() {
            return Err(ShareError::Format {
                offset: r.pos,
                message: format!("{} trailing bytes after the crc", bytes.len() - r.pos),
            });
        }

        let stored = u32::from_be_bytes(stored_bytes);
        let computed = crc32fast::hash(&bytes[..crc_offset]);
        if stored != computed {
            return Err(ShareError::Integrity { stored, computed });
        }

        // The frame checks out; now interpret the fields.
        let depth = Depth::from_bits(depth_bits).ok_or_else(|| ShareError::Format {
            offset: depth_offset,
            message: format!("depth {depth_bits} bits is not one of 1, 8, 24"),
        })?;
        if usize::from(rule_count) != usize::from(k).saturating_sub(1) {
            return Err(ShareError::Format {
                offset: rule_count_offset,
                message: format!("rule count {rule_count} does not equal k - 1 = {}", k.saturating_sub(1)),
            });
        }
        let mut rules = Vec::with_capacity(rule_values.len());
        for (offset, value) in rule_values {
            rules.push(RuleNumber::new(value).map_err(|_| ShareError::Format {
                offset,
                message: format!("rule number {value} out of range 0..=511"),
            })?);
        }
        let expected_len = payload_byte_len(rows as usize, cols as usize, depth);
        if payload_len != expected_len {
            return Err(ShareError::Format {
                offset: payload_len_offset,
                message: format!(
                    "payload length {payload_len} does not match {rows}x{cols} at depth {}: expected {expected_len}",
                    depth.bits()
                ),
            });
        }

        let cells: Vec<u32> = match depth {
            Depth::BlackWhite => {
                let row_len = bitpack::packed_row_len(cols as usize);
                let mut cells = Vec::with_capacity((rows * cols) as usize);
                for row in payload.chunks_exact(row_len) {
                    cells.extend(bitpack::unpack_row(row, cols as usize).map(u32::from));
                }
                cells
            }
            Depth::Gray => payload.iter().map(|&b| u32::from(b)).collect(),
            Depth::Color => payload
                .chunks_exact(3)
                .map(|c| (u32::from(c[0]) << 16) | (u32::from(c[1]) << 8) | u32::from(c[2]))
                .collect(),
        };
        let matrix = CellMatrix::from_cells(rows as usize, cols as usize, depth.bits(), cells)
            .map_err(|e| ShareError::Format {
                offset: payload_offset,
                message: e.to_string(),
            })?;
        let header = ShareHeader {
            depth,
            k,
            n,
            m,
            index,
            rows,
            cols,
            scheme_id: SchemeId::new(id_bytes),
            rules,
        };
        header.validate().map_err(|e| ShareError::Format {
            offset: depth_offset,
            message: e.to_string(),
        })?;
        Share::new(header, matrix).map_err(|e| ShareError::Format {
            offset: payload_offset,
            message: e.to_string(),
        })
    }
}

/// A consistent share set ready for recovery: the `k` selected shares in
/// ascending time order plus the window offset `alpha = i_min - m`.
#[derive(Debug, Clone)]
pub struct ValidatedSet {
    pub shares: Vec<Share>,
    pub alpha: u16,
}

impl ValidatedSet {
    /// Inverse iterations recovery will perform: `m + alpha`.
    pub fn inverse_iterations(&self) -> usize {
        usize::from(self.shares[0].header().m) + usize::from(self.alpha)
    }
}

/// Checks that the shares belong to one split and contain a run of `k`
/// consecutive indices; selects the run with the lowest indices (minimal
/// `alpha`, hence the fewest inverse iterations).
pub fn validate_share_set(shares: &[Share]) -> Result<ValidatedSet, ShareError> {
    let Some(first) = shares.first() else {
        return Err(ShareError::InsufficientShares {
            needed: 1,
            longest_run: 0,
        });
    };
    for s in &shares[1..] {
        if !first.header().same_scheme(s.header()) {
            return Err(ShareError::MixedScheme(format!(
                "share with id {} and parameters (k={}, n={}, m={}) does not belong to scheme {}",
                s.header().scheme_id,
                s.header().k,
                s.header().n,
                s.header().m,
                first.header().scheme_id,
            )));
        }
    }

    let mut sorted: Vec<&Share> = shares.iter().collect();
    sorted.sort_by_key(|s| s.header().index);
    let mut unique: Vec<&Share> = Vec::with_capacity(sorted.len());
    for share in sorted {
        match unique.last() {
            Some(prev) if prev.header().index == share.header().index => {
                if prev.payload() != share.payload() {
                    return Err(ShareError::MixedScheme(format!(
                        "two shares claim index {} with different payloads",
                        share.header().index
                    )));
                }
            }
            _ => unique.push(share),
        }
    }

    let k = usize::from(first.header().k);
    let mut longest_run = 1;
    let mut run_start = 0;
    let mut selected: Option<usize> = None;
    for idx in 1..=unique.len() {
        let contiguous = idx < unique.len()
            && unique[idx].header().index == unique[idx - 1].header().index + 1;
        if !contiguous {
            let run = idx - run_start;
            longest_run = longest_run.max(run);
            if run >= k && selected.is_none() {
                selected = Some(run_start);
            }
            run_start = idx;
        }
    }
    let Some(start) = selected else {
        return Err(ShareError::InsufficientShares {
            needed: k,
            longest_run,
        });
    };
    let window: Vec<Share> = unique[start..start + k].iter().map(|&s| s.clone()).collect();
    let alpha = window[0].header().index - window[0].header().m;
    Ok(ValidatedSet {
        shares: window,
        alpha,
    })
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8], ShareError> {
        if len > self.bytes.len() - self.pos {
            return Err(ShareError::Format {
                offset: self.bytes.len(),
                message: format!(
                    "truncated share file: {what} needs {len} bytes, {} remain",
                    self.bytes.len() - self.pos
                ),
            });
        }
        let slice = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(slice)
    }

    fn byte(&mut self, what: &str) -> Result<u8, ShareError> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16, ShareError> {
        Ok(u16::from_be_bytes(
            self.take(2, what)?.try_into().expect("length checked"),
        ))
    }

    fn u32(&mut self, what: &str) -> Result<u32, ShareError> {
        Ok(u32::from_be_bytes(
            self.take(4, what)?.try_into().expect("length checked"),
        ))
    }

    fn u64(&mut self, what: &str) -> Result<u64, ShareError> {
        Ok(u64::from_be_bytes(
            self.take(8, what)?.try_into().expect("length checked"),
        ))
    }
}
