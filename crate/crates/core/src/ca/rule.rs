use std::fmt;

use super::CaError;

/// Identifier of a 2D Moore linear cellular automaton, in `[0, 511]`.
///
/// The nine bits select which neighbors enter the mod-`c` sum: the weight of
/// the neighbor at offset `(alpha, beta)` is bit `8 - (3*(alpha+1) + (beta+1))`
/// of the rule number, so bit 8 is the upper-left neighbor and bit 0 the
/// lower-right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleNumber(u16);

impl RuleNumber {
    /// Largest valid rule number (all nine weights set).
    pub const MAX: u16 = 511;
    /// The identity rule: only the center weight (bit 4) is set.
    pub const IDENTITY: RuleNumber = RuleNumber(16);
    /// The zero rule: no weights set; maps everything to the zero matrix.
    pub const ZERO: RuleNumber = RuleNumber(0);

    pub fn new(value: u16) -> Result<Self, CaError> {
        if value > Self::MAX {
            return Err(CaError::Domain(format!(
                "rule number {value} out of range 0..=511"
            )));
        }
        Ok(RuleNumber(value))
    }

    pub fn value(self) -> u16 {
        self.0
    }

    /// Decomposes the rule number into its nine neighborhood weights.
    pub fn weights(self) -> NeighborhoodWeights {
        let mut lambda = [[0u8; 3]; 3];
        for (ai, row) in lambda.iter_mut().enumerate() {
            for (bi, w) in row.iter_mut().enumerate() {
                let bit = 8 - (3 * ai + bi);
                *w = ((self.0 >> bit) & 1) as u8;
            }
        }
        NeighborhoodWeights { lambda }
    }

    /// The offsets `(alpha, beta)` whose weight is set, row-major.
    pub fn active_offsets(self) -> Vec<(isize, isize)> {
        let mut offsets = Vec::with_capacity(self.0.count_ones() as usize);
        for alpha in -1isize..=1 {
            for beta in -1isize..=1 {
                let bit = 8 - (3 * (alpha + 1) + (beta + 1));
                if (self.0 >> bit) & 1 == 1 {
                    offsets.push((alpha, beta));
                }
            }
        }
        offsets
    }

    /// Number of set weights. On a 1x1 torus every offset wraps onto the
    /// single cell, so one step multiplies it by this count mod `c`.
    pub fn weight_count(self) -> u32 {
        self.0.count_ones()
    }
}

impl fmt::Display for RuleNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The nine binary coefficients of a linear Moore rule.
///
/// `lambda[alpha + 1][beta + 1]` is the weight of the neighbor at offset
/// `(alpha, beta)`, each in `{0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborhoodWeights {
    lambda: [[u8; 3]; 3],
}

impl NeighborhoodWeights {
    pub fn new(lambda: [[u8; 3]; 3]) -> Result<Self, CaError> {
        for row in &lambda {
            for &w in row {
                if w > 1 {
                    return Err(CaError::Domain(format!(
                        "neighborhood weight {w} is not a bit"
                    )));
                }
            }
        }
        Ok(Self { lambda })
    }

    /// Weight at offset `(alpha, beta)`, both in `-1..=1`.
    pub fn weight(&self, alpha: isize, beta: isize) -> u8 {
        self.lambda[(alpha + 1) as usize][(beta + 1) as usize]
    }

    /// Reassembles the rule number; inverse of [`RuleNumber::weights`].
    pub fn rule_number(&self) -> RuleNumber {
        let mut value = 0u16;
        for ai in 0..3 {
            for bi in 0..3 {
                value |= (self.lambda[ai][bi] as u16) << (8 - (3 * ai + bi));
            }
        }
        RuleNumber(value)
    }
}
