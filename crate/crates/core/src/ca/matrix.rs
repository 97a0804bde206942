use super::CaError;

/// One CA configuration: an `rows x cols` grid of cells over `Z_c`,
/// `c = 2^bits`, with periodic (toroidal) indexing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellMatrix {
    rows: usize,
    cols: usize,
    bits: u8,
    cells: Vec<u32>,
}

impl CellMatrix {
    /// Largest supported cell width; 24 bits covers packed RGB.
    pub const MAX_BITS: u8 = 24;

    /// All-zero matrix.
    pub fn zeros(rows: usize, cols: usize, bits: u8) -> Result<Self, CaError> {
        Self::check_dims(rows, cols, bits)?;
        Ok(Self {
            rows,
            cols,
            bits,
            cells: vec![0; rows * cols],
        })
    }

    /// Builds a matrix from row-major cells, each of which must be `< 2^bits`.
    pub fn from_cells(
        rows: usize,
        cols: usize,
        bits: u8,
        cells: Vec<u32>,
    ) -> Result<Self, CaError> {
        Self::check_dims(rows, cols, bits)?;
        if cells.len() != rows * cols {
            return Err(CaError::Domain(format!(
                "expected {} cells for a {rows}x{cols} matrix, got {}",
                rows * cols,
                cells.len()
            )));
        }
        let mask = (1u32 << bits) - 1;
        if let Some(bad) = cells.iter().find(|&&c| c > mask) {
            return Err(CaError::Domain(format!(
                "cell value {bad} not in Z_{}",
                1u64 << bits
            )));
        }
        Ok(Self {
            rows,
            cols,
            bits,
            cells,
        })
    }

    fn check_dims(rows: usize, cols: usize, bits: u8) -> Result<(), CaError> {
        if rows == 0 || cols == 0 {
            return Err(CaError::Domain(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if bits == 0 || bits > Self::MAX_BITS {
            return Err(CaError::Domain(format!(
                "cell width {bits} bits not in 1..={}",
                Self::MAX_BITS
            )));
        }
        Ok(())
    }

    /// Same shape and modulus, already-reduced cells. Callers guarantee the
    /// invariants; used on the evolution hot path.
    pub(crate) fn from_raw(rows: usize, cols: usize, bits: u8, cells: Vec<u32>) -> Self {
        debug_assert_eq!(cells.len(), rows * cols);
        Self {
            rows,
            cols,
            bits,
            cells,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Cell width in bits (`b`).
    pub fn bits(&self) -> u8 {
        self.bits
    }

    /// The state-set size `c = 2^bits`.
    pub fn modulus(&self) -> u32 {
        1u32 << self.bits
    }

    /// `c - 1`; reduction mod `c` is a bitwise AND with this.
    pub fn mask(&self) -> u32 {
        (1u32 << self.bits) - 1
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    /// Cell at `(i, j)` without wrapping; panics out of range.
    pub fn get(&self, i: usize, j: usize) -> u32 {
        assert!(i < self.rows && j < self.cols, "cell index out of range");
        self.cells[i * self.cols + j]
    }

    /// Periodic lookup: indices wrap modulo the grid dimensions.
    pub fn get_wrapped(&self, i: isize, j: isize) -> u32 {
        let i = i.rem_euclid(self.rows as isize) as usize;
        let j = j.rem_euclid(self.cols as isize) as usize;
        self.cells[i * self.cols + j]
    }

    /// True if the two matrices share `(rows, cols, bits)`.
    pub fn same_shape(&self, other: &CellMatrix) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.bits == other.bits
    }

    /// Best-effort destruction: overwrites the cell buffer with zeros using
    /// volatile writes so the stores are not elided before the memory is
    /// reused or freed.
    pub fn wipe(&mut self) {
        for cell in &mut self.cells {
            // SAFETY: `cell` is a valid, aligned, exclusive reference.
            unsafe { std::ptr::write_volatile(cell, 0) };
        }
        std::sync::atomic::compiler_fence(std::sync::atomic::Ordering::SeqCst);
    }
}

/// The `k` most recent configurations of an order-`k` memory CA, ordered
/// oldest to newest in evolution time. For inverse evolution the same type
/// is used with inverse-time ordering, whose oldest member is the
/// forward-newest configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigWindow {
    configs: Vec<CellMatrix>,
}

impl ConfigWindow {
    pub fn new(configs: Vec<CellMatrix>) -> Result<Self, CaError> {
        if configs.len() < 2 {
            return Err(CaError::Domain(format!(
                "a memory window needs at least 2 configurations (order k >= 2), got {}",
                configs.len()
            )));
        }
        let first = &configs[0];
        for c in &configs[1..] {
            if !first.same_shape(c) {
                return Err(CaError::Shape {
                    expected_rows: first.rows(),
                    expected_cols: first.cols(),
                    expected_bits: first.bits(),
                    rows: c.rows(),
                    cols: c.cols(),
                    bits: c.bits(),
                });
            }
        }
        Ok(Self { configs })
    }

    /// The memory order `k`.
    pub fn order(&self) -> usize {
        self.configs.len()
    }

    pub fn configs(&self) -> &[CellMatrix] {
        &self.configs
    }

    pub fn oldest(&self) -> &CellMatrix {
        &self.configs[0]
    }

    pub fn newest(&self) -> &CellMatrix {
        &self.configs[self.configs.len() - 1]
    }

    pub fn rows(&self) -> usize {
        self.configs[0].rows()
    }

    pub fn cols(&self) -> usize {
        self.configs[0].cols()
    }

    pub fn bits(&self) -> u8 {
        self.configs[0].bits()
    }

    /// The same configurations in reversed order; turns the tail of a
    /// forward evolution into the seed of the inverse one and vice versa.
    pub fn reversed(&self) -> ConfigWindow {
        let mut configs = self.configs.clone();
        configs.reverse();
        Self { configs }
    }

    pub fn into_configs(self) -> Vec<CellMatrix> {
        self.configs
    }
}
