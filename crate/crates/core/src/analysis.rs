//! Desk-scale verification of the scheme's security properties.
//!
//! The perfectness census exhaustively enumerates every secret and every
//! random complement window at tiny sizes, computes all shares, and tallies
//! the conditional distribution of the secret given each observed subset of
//! shares: a perfect scheme shows an exactly uniform conditional for every
//! unqualified subset, while a qualified (consecutive, size-`k`) subset
//! must pin exactly one secret. The census is exact, not statistical.
//!
//! `uniformity_stats` complements it with advisory chi-square and
//! adjacent-cell correlation measurements on real share payloads.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::ca::{CellMatrix, ConfigWindow, Lmca, RuleNumber};
use crate::image::Depth;
use crate::share::Share;

/// Hard cap on enumerated `(secret, complement)` cases.
pub const CENSUS_CASE_CAP_LOG2: u32 = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    /// The requested enumeration is too large to run exhaustively.
    #[error("census of 2^{log2_cases} cases exceeds the cap of 2^{log2_cap}")]
    TooLarge { log2_cases: u64, log2_cap: u32 },
    #[error("{0}")]
    Param(String),
}

/// Parameters of one census run.
#[derive(Debug, Clone)]
pub struct CensusParams {
    pub rows: usize,
    pub cols: usize,
    /// Cell width in bits; the state set is `Z_(2^bits)`.
    pub bits: u8,
    pub k: u8,
    pub m: u16,
    pub n: u8,
    pub rules: Vec<RuleNumber>,
    /// Number of observed shares `j`, in `1..=k`. Below `k` the verdict
    /// tests perfectness; at `k` it tests recoverability.
    pub observed: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CensusVerdict {
    /// Every conditional secret distribution is exactly uniform.
    Perfect,
    /// Every consecutive size-`k` subset pins exactly one secret.
    Determined,
    /// The expected property for this `observed` count does not hold.
    Failed,
}

impl fmt::Display for CensusVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CensusVerdict::Perfect => "perfect",
            CensusVerdict::Determined => "determined",
            CensusVerdict::Failed => "failed",
        };
        f.write_str(s)
    }
}

/// Tally outcome for one observed subset of share slots.
#[derive(Debug, Clone, Serialize)]
pub struct SubsetCensus {
    /// Share slots `0..n-1`; slot `i` holds configuration `C^(m+i)`.
    pub slots: Vec<usize>,
    pub consecutive: bool,
    /// Every observed value is consistent with every secret equally often.
    pub uniform: bool,
    /// Every observed value is consistent with exactly one secret.
    pub singleton: bool,
    /// Distinct observed value tuples.
    pub observations: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CensusReport {
    pub rows: usize,
    pub cols: usize,
    pub bits: u8,
    pub k: u8,
    pub m: u16,
    pub n: u8,
    pub rules: Vec<u16>,
    pub observed: usize,
    /// Enumerated `(secret, complement)` cases: `c^(rows*cols*k)`.
    pub cases: u64,
    pub secrets: u64,
    pub subsets: Vec<SubsetCensus>,
    pub verdict: CensusVerdict,
}

impl fmt::Display for CensusReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "perfectness census: {}x{} cells over Z_{}, k={}, m={}, n={}, rules={:?}, observed={}",
            self.rows,
            self.cols,
            1u64 << self.bits,
            self.k,
            self.m,
            self.n,
            self.rules,
            self.observed
        )?;
        writeln!(
            f,
            "cases: {} ({} secrets x {} complement windows)",
            self.cases,
            self.secrets,
            self.cases / self.secrets
        )?;
        for s in &self.subsets {
            let slots: Vec<String> = s.slots.iter().map(|i| format!("S{i}")).collect();
            writeln!(
                f,
                "  shares {{{}}}  consecutive={}  uniform={}  singleton={}  observations={}",
                slots.join(","),
                yes_no(s.consecutive),
                yes_no(s.uniform),
                yes_no(s.singleton),
                s.observations
            )?;
        }
        write!(f, "verdict: {}", self.verdict)
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Exhaustively enumerates every secret and complement window, computes all
/// `n` shares, and classifies the conditional secret distribution for every
/// size-`observed` subset of shares.
pub fn perfectness_census(params: &CensusParams) -> Result<CensusReport, AnalysisError> {
    let k = usize::from(params.k);
    let n = usize::from(params.n);
    let m = usize::from(params.m);
    if params.k < 2 {
        return Err(AnalysisError::Param(format!(
            "k must be at least 2, got {}",
            params.k
        )));
    }
    if n < k {
        return Err(AnalysisError::Param(format!(
            "n = {n} is below the threshold k = {k}"
        )));
    }
    if m < k {
        return Err(AnalysisError::Param(format!("m = {m} must be at least k = {k}")));
    }
    if params.rules.len() != k - 1 {
        return Err(AnalysisError::Param(format!(
            "expected {} rules for k = {k}, got {}",
            k - 1,
            params.rules.len()
        )));
    }
    if params.observed == 0 || params.observed > k {
        return Err(AnalysisError::Param(format!(
            "observed share count must be in 1..=k = {k}, got {}",
            params.observed
        )));
    }
    if params.rows == 0 || params.cols == 0 || params.bits == 0 || params.bits > 24 {
        return Err(AnalysisError::Param(format!(
            "invalid grid: {}x{} cells at {} bits",
            params.rows, params.cols, params.bits
        )));
    }
    if n > 16 {
        return Err(AnalysisError::Param(format!(
            "census supports at most 16 shares, got n = {n}"
        )));
    }

    let cells = params.rows * params.cols;
    let matrix_bits = u64::from(params.bits) * cells as u64;
    let log2_cases = matrix_bits * k as u64;
    if log2_cases > u64::from(CENSUS_CASE_CAP_LOG2) {
        return Err(AnalysisError::TooLarge {
            log2_cases,
            log2_cap: CENSUS_CASE_CAP_LOG2,
        });
    }
    let per_matrix: u64 = 1 << matrix_bits;
    let complements: u64 = 1 << (matrix_bits * (k as u64 - 1));
    let subsets = subsets_of_size(n, params.observed);
    let lmca = Lmca::new(params.rules.clone()).expect("rule count validated above");
    let steps = m + n - k;

    let from_index = |index: u64| -> CellMatrix {
        let mask = (1u64 << params.bits) - 1;
        let values = (0..cells)
            .map(|p| ((index >> (u64::from(params.bits) * p as u64)) & mask) as u32)
            .collect();
        CellMatrix::from_cells(params.rows, params.cols, params.bits, values)
            .expect("enumerated cells are reduced")
    };

    // Tallies per subset: observed value tuple -> count per secret index.
    // Enumeration is embarrassingly parallel over secrets; merging adds
    // count vectors, which is order-independent and hence deterministic.
    type Tally = BTreeMap<Vec<u32>, Vec<u32>>;
    let merged: Vec<Tally> = (0..per_matrix)
        .into_par_iter()
        .map(|secret_index| {
            let secret = from_index(secret_index);
            let mut tallies: Vec<Tally> = vec![BTreeMap::new(); subsets.len()];
            for comp_index in 0..complements {
                let mut window = Vec::with_capacity(k);
                window.push(secret.clone());
                for stage in 0..k - 1 {
                    let idx = (comp_index >> (matrix_bits * stage as u64)) & (per_matrix - 1);
                    window.push(from_index(idx));
                }
                let window = ConfigWindow::new(window).expect("uniform shapes");
                let seq = lmca.evolve(window, steps).expect("arity validated");
                let shares = &seq[m..m + n];
                for (tally, subset) in tallies.iter_mut().zip(&subsets) {
                    let key: Vec<u32> = subset
                        .iter()
                        .flat_map(|&slot| shares[slot].cells().iter().copied())
                        .collect();
                    let counts = tally
                        .entry(key)
                        .or_insert_with(|| vec![0u32; per_matrix as usize]);
                    counts[secret_index as usize] += 1;
                }
            }
            tallies
        })
        .reduce(
            || vec![BTreeMap::new(); subsets.len()],
            |mut acc, partial| {
                for (into, from) in acc.iter_mut().zip(partial) {
                    for (key, counts) in from {
                        match into.get_mut(&key) {
                            Some(existing) => {
                                for (e, c) in existing.iter_mut().zip(counts) {
                                    *e += c;
                                }
                            }
                            None => {
                                into.insert(key, counts);
                            }
                        }
                    }
                }
                acc
            },
        );

    let mut report_subsets = Vec::with_capacity(subsets.len());
    for (slots, tally) in subsets.iter().zip(&merged) {
        let uniform = tally
            .values()
            .all(|counts| counts.iter().all(|&c| c == counts[0]));
        let singleton = tally
            .values()
            .all(|counts| counts.iter().filter(|&&c| c > 0).count() == 1);
        let consecutive = slots.windows(2).all(|w| w[1] == w[0] + 1);
        report_subsets.push(SubsetCensus {
            slots: slots.clone(),
            consecutive,
            uniform,
            singleton,
            observations: tally.len() as u64,
        });
    }

    let verdict = if params.observed < k {
        if report_subsets.iter().all(|s| s.uniform) {
            CensusVerdict::Perfect
        } else {
            CensusVerdict::Failed
        }
    } else if report_subsets
        .iter()
        .filter(|s| s.consecutive)
        .all(|s| s.singleton)
    {
        CensusVerdict::Determined
    } else {
        CensusVerdict::Failed
    };

    Ok(CensusReport {
        rows: params.rows,
        cols: params.cols,
        bits: params.bits,
        k: params.k,
        m: params.m,
        n: params.n,
        rules: params.rules.iter().map(|r| r.value()).collect(),
        observed: params.observed,
        cases: per_matrix
            .checked_pow(k as u32)
            .expect("cap keeps cases within u64"),
        secrets: per_matrix,
        subsets: report_subsets,
        verdict,
    })
}

fn subsets_of_size(n: usize, j: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(j);
    fn rec(start: usize, n: usize, j: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == j {
            out.push(current.clone());
            return;
        }
        for slot in start..n {
            current.push(slot);
            rec(slot + 1, n, j, current, out);
            current.pop();
        }
    }
    rec(0, n, j, &mut current, &mut out);
    out
}

/// Per-channel histogram, chi-square against uniform, and first-order
/// adjacent-cell correlations.
#[derive(Debug, Clone, Serialize)]
pub struct ChannelStats {
    pub label: String,
    pub histogram: Vec<u64>,
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    /// Upper-tail probability of the chi-square statistic under uniformity.
    pub p_value: f64,
    pub horizontal_correlation: f64,
    pub vertical_correlation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniformityStats {
    pub rows: usize,
    pub cols: usize,
    pub bits: u8,
    pub channels: Vec<ChannelStats>,
}

impl fmt::Display for UniformityStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "uniformity: {}x{} cells over Z_{}",
            self.rows,
            self.cols,
            1u64 << self.bits
        )?;
        for ch in &self.channels {
            writeln!(
                f,
                "  {:<6} chi2={:<12.3} df={:<4} p={:<9.4} corr_h={:+.4} corr_v={:+.4}",
                ch.label,
                ch.chi_square,
                ch.degrees_of_freedom,
                ch.p_value,
                ch.horizontal_correlation,
                ch.vertical_correlation
            )?;
        }
        Ok(())
    }
}

/// Computes share-quality statistics. Matrices wider than 8 bits are split
/// into 8-bit channels from the high byte down, so a 24-bit matrix reports
/// red, green, and blue separately.
pub fn uniformity_stats(matrix: &CellMatrix) -> UniformityStats {
    let bits = matrix.bits();
    let channels: Vec<(String, u8, u8)> = if bits <= 8 {
        vec![("cells".to_string(), 0, bits)]
    } else if bits == 24 {
        vec![
            ("red".to_string(), 16, 8),
            ("green".to_string(), 8, 8),
            ("blue".to_string(), 0, 8),
        ]
    } else {
        let mut parts = Vec::new();
        let mut hi = bits;
        while hi > 0 {
            let width = if hi.is_multiple_of(8) { 8 } else { hi % 8 };
            let shift = hi - width;
            parts.push((format!("bits {}..{}", hi - 1, shift), shift, width));
            hi = shift;
        }
        parts
    };

    let stats = channels
        .into_iter()
        .map(|(label, shift, width)| {
            let values: Vec<u32> = matrix
                .cells()
                .iter()
                .map(|&c| (c >> shift) & ((1u32 << width) - 1))
                .collect();
            channel_stats(label, &values, width, matrix.rows(), matrix.cols())
        })
        .collect();

    UniformityStats {
        rows: matrix.rows(),
        cols: matrix.cols(),
        bits,
        channels: stats,
    }
}

fn channel_stats(
    label: String,
    values: &[u32],
    width: u8,
    rows: usize,
    cols: usize,
) -> ChannelStats {
    let bins = 1usize << width;
    let mut histogram = vec![0u64; bins];
    for &v in values {
        histogram[v as usize] += 1;
    }
    let expected = values.len() as f64 / bins as f64;
    let chi_square: f64 = histogram
        .iter()
        .map(|&observed| {
            let d = observed as f64 - expected;
            d * d / expected
        })
        .sum();
    let degrees_of_freedom = bins - 1;
    let p_value = if degrees_of_freedom == 0 {
        1.0
    } else {
        ChiSquared::new(degrees_of_freedom as f64)
            .expect("positive degrees of freedom")
            .sf(chi_square)
    };

    let horizontal = pearson((0..rows).flat_map(|i| {
        (0..cols.saturating_sub(1))
            .map(move |j| (values[i * cols + j] as f64, values[i * cols + j + 1] as f64))
    }));
    let vertical = pearson((0..rows.saturating_sub(1)).flat_map(|i| {
        (0..cols).map(move |j| (values[i * cols + j] as f64, values[(i + 1) * cols + j] as f64))
    }));

    ChannelStats {
        label,
        histogram,
        chi_square,
        degrees_of_freedom,
        p_value,
        horizontal_correlation: horizontal,
        vertical_correlation: vertical,
    }
}

/// Pearson correlation over a pair stream. Conventions for degenerate
/// inputs: both series constant (or no pairs at all) counts as perfectly
/// predictable, 1.0; exactly one constant series as 0.0.
fn pearson(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    let mut n = 0.0f64;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0f64, 0.0, 0.0, 0.0, 0.0);
    for (x, y) in pairs {
        n += 1.0;
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    if n == 0.0 {
        return 1.0;
    }
    let var_x = sxx - sx * sx / n;
    let var_y = syy - sy * sy / n;
    let cov = sxy - sx * sy / n;
    if var_x <= 0.0 && var_y <= 0.0 {
        return 1.0;
    }
    if var_x <= 0.0 || var_y <= 0.0 {
        return 0.0;
    }
    cov / (var_x * var_y).sqrt()
}

/// Information rate of a share against a secret of `secret_rows x
/// secret_cols` cells at `secret_depth`: secret cell-bits over share
/// payload cell-bits. Header bytes are excluded by definition; an ideal
/// share of a same-size secret rates exactly 1.
pub fn information_rate(
    share: &Share,
    secret_rows: usize,
    secret_cols: usize,
    secret_depth: Depth,
) -> f64 {
    let secret_bits = secret_rows as f64 * secret_cols as f64 * f64::from(secret_depth.bits());
    let payload = share.payload();
    let share_bits = payload.rows() as f64 * payload.cols() as f64 * f64::from(payload.bits());
    secret_bits / share_bits
}
