//! MSB-first bit packing with per-row byte alignment, as used by raw PBM
//! payloads and depth-1 share payloads.

/// Bytes occupied by one packed row of `cols` bits.
pub(crate) fn packed_row_len(cols: usize) -> usize {
    cols.div_ceil(8)
}

/// Packs one row of bits (given as 0/1 cells) MSB-first, padding the final
/// byte with zero bits.
pub(crate) fn pack_row(row: impl ExactSizeIterator<Item = bool>, out: &mut Vec<u8>) {
    let mut byte = 0u8;
    let mut filled = 0u8;
    for bit in row {
        byte = (byte << 1) | u8::from(bit);
        filled += 1;
        if filled == 8 {
            out.push(byte);
            byte = 0;
            filled = 0;
        }
    }
    if filled > 0 {
        out.push(byte << (8 - filled));
    }
}

/// Unpacks `cols` bits from a packed row; the caller supplies exactly
/// `packed_row_len(cols)` bytes.
pub(crate) fn unpack_row(bytes: &[u8], cols: usize) -> impl Iterator<Item = bool> + '_ {
    debug_assert_eq!(bytes.len(), packed_row_len(cols));
    (0..cols).map(move |j| (bytes[j / 8] >> (7 - (j % 8))) & 1 == 1)
}
