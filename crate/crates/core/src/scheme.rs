//! The three protocol phases: setup, sharing, recovery.
//!
//! Setup fixes the threshold parameters and draws the `k - 1` rules. Split
//! seeds an order-`k` reversible memory CA with the secret plus `k - 1`
//! BBS-generated configurations, evolves it to time `m + n - 1`, and hands
//! out the last `n` configurations as shares. Recovery loads any `k`
//! consecutive shares newest-first into the inverse automaton and steps it
//! back to `C^(0)`, reproducing the secret exactly.

use rand::{CryptoRng, RngCore};
use thiserror::Error;

use crate::bbs::BbsGenerator;
use crate::ca::{CaError, CellMatrix, ConfigWindow, Lmca, RuleNumber};
use crate::image::Depth;
use crate::share::{validate_share_set, SchemeId, Share, ShareError, ShareHeader};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemeError {
    /// Threshold parameters violate the scheme constraints.
    #[error("{0}")]
    Param(String),
    /// The secret does not match the scheme dimensions.
    #[error("secret is {rows}x{cols} at {bits} bits, scheme expects {expected_rows}x{expected_cols} at {expected_bits} bits")]
    Shape {
        rows: usize,
        cols: usize,
        bits: u8,
        expected_rows: usize,
        expected_cols: usize,
        expected_bits: u8,
    },
    #[error(transparent)]
    Share(#[from] ShareError),
    #[error(transparent)]
    Ca(#[from] CaError),
}

/// Everything that determines one sharing instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeParams {
    k: u8,
    n: u8,
    m: u16,
    depth: Depth,
    rows: u32,
    cols: u32,
    rules: Vec<RuleNumber>,
    scheme_id: SchemeId,
}

impl SchemeParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        k: u8,
        n: u8,
        m: u16,
        depth: Depth,
        rows: u32,
        cols: u32,
        rules: Vec<RuleNumber>,
        scheme_id: SchemeId,
    ) -> Result<Self, SchemeError> {
        if k < 2 {
            return Err(SchemeError::Param(format!(
                "threshold k must be at least 2, got {k}"
            )));
        }
        if n < k {
            return Err(SchemeError::Param(format!(
                "k = {k} exceeds the share count n = {n}"
            )));
        }
        if m < u16::from(k) {
            return Err(SchemeError::Param(format!(
                "m = {m} must be at least k = {k} so shares cannot overlap the initial window"
            )));
        }
        if u32::from(m) + u32::from(n) - 1 > u32::from(u16::MAX) {
            return Err(SchemeError::Param(format!(
                "m + n - 1 = {} exceeds the 16-bit share index range",
                u32::from(m) + u32::from(n) - 1
            )));
        }
        if rows == 0 || cols == 0 {
            return Err(SchemeError::Param(format!(
                "secret dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if rules.len() != usize::from(k) - 1 {
            return Err(SchemeError::Param(format!(
                "expected {} rules for k = {k}, got {}",
                k - 1,
                rules.len()
            )));
        }
        Ok(Self {
            k,
            n,
            m,
            depth,
            rows,
            cols,
            rules,
            scheme_id,
        })
    }

    /// Setup phase: draws the `k - 1` rules uniformly from `[0, 511]` and a
    /// fresh scheme id. Rules and id consume, in order, one `next_u32` per
    /// rule (masked to 9 bits) and 16 bytes, so a deterministic `rng` yields
    /// a deterministic instance.
    pub fn generate(
        k: u8,
        n: u8,
        m: u16,
        depth: Depth,
        rows: u32,
        cols: u32,
        rng: &mut (impl RngCore + CryptoRng),
    ) -> Result<Self, SchemeError> {
        let rule_count = usize::from(k.max(1)) - 1;
        let rules = (0..rule_count)
            .map(|_| {
                RuleNumber::new((rng.next_u32() & 0x1ff) as u16)
                    .expect("a 9-bit value is a valid rule")
            })
            .collect();
        let scheme_id = SchemeId::random(rng);
        Self::new(k, n, m, depth, rows, cols, rules, scheme_id)
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn m(&self) -> u16 {
        self.m
    }

    pub fn depth(&self) -> Depth {
        self.depth
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    pub fn rules(&self) -> &[RuleNumber] {
        &self.rules
    }

    pub fn scheme_id(&self) -> SchemeId {
        self.scheme_id
    }

    /// Degenerate but legal: every rule zero turns the evolution into a
    /// periodic echo of the initial window.
    pub fn all_rules_zero(&self) -> bool {
        self.rules.iter().all(|r| r.value() == 0)
    }

    /// Parameters recorded in a share header; they fully determine the
    /// scheme, so recovery needs no dealer.
    pub fn from_header(header: &ShareHeader) -> Result<Self, SchemeError> {
        Self::new(
            header.k,
            header.n,
            header.m,
            header.depth,
            header.rows,
            header.cols,
            header.rules.clone(),
            header.scheme_id,
        )
    }

    fn header_for_index(&self, index: u16) -> ShareHeader {
        ShareHeader {
            depth: self.depth,
            k: self.k,
            n: self.n,
            m: self.m,
            index,
            rows: self.rows,
            cols: self.cols,
            scheme_id: self.scheme_id,
            rules: self.rules.clone(),
        }
    }
}

/// Sharing phase: returns the `n` shares `S_i = C^(m+i)`.
///
/// The initial window is the secret followed by `k - 1` configurations
/// filled from `rng`; the automaton then computes `m + n - k` steps so the
/// sequence reaches `C^(m+n-1)`. Every intermediate configuration outside
/// the returned shares is overwritten (best-effort) before its memory is
/// released.
pub fn split(
    secret: &CellMatrix,
    params: &SchemeParams,
    rng: &mut BbsGenerator,
) -> Result<Vec<Share>, SchemeError> {
    if secret.rows() != params.rows as usize
        || secret.cols() != params.cols as usize
        || secret.bits() != params.depth.bits()
    {
        return Err(SchemeError::Shape {
            rows: secret.rows(),
            cols: secret.cols(),
            bits: secret.bits(),
            expected_rows: params.rows as usize,
            expected_cols: params.cols as usize,
            expected_bits: params.depth.bits(),
        });
    }
    let k = usize::from(params.k);
    let n = usize::from(params.n);
    let m = usize::from(params.m);

    let mut initial = Vec::with_capacity(k);
    initial.push(secret.clone());
    for _ in 0..k - 1 {
        initial.push(rng.fill_matrix(secret.rows(), secret.cols(), secret.bits()));
    }
    let window = ConfigWindow::new(initial)?;
    let lmca = Lmca::new(params.rules.clone())?;
    let steps = m + n - k;
    let seq = lmca.evolve(window, steps)?;

    let mut shares = Vec::with_capacity(n);
    for (t, mut config) in seq.into_iter().enumerate() {
        if t >= m {
            let index = u16::try_from(t).expect("checked against u16::MAX at construction");
            shares.push(Share::new(params.header_for_index(index), config)?);
        } else {
            // The random components and pre-share evolution are dealer
            // secrets; destroy them once the shares exist.
            config.wipe();
        }
    }
    Ok(shares)
}

/// Recovery phase: validates the shares, loads the selected window
/// newest-first into the inverse automaton, and iterates `m + alpha`
/// computed steps back to `C^(0)`. The result equals the original secret
/// bit for bit.
pub fn recover(shares: &[Share]) -> Result<CellMatrix, SchemeError> {
    let set = validate_share_set(shares)?;
    let params = SchemeParams::from_header(set.shares[0].header())?;
    let mut configs: Vec<CellMatrix> = set
        .shares
        .into_iter()
        .map(|share| share.into_payload())
        .collect();
    configs.reverse(); // inverse window: forward-newest first
    let window = ConfigWindow::new(configs)?;
    let lmca = Lmca::new(params.rules.clone())?;
    let steps = usize::from(params.m) + usize::from(set.alpha);
    let mut seq = lmca.inverse_evolve(window, steps)?;
    let secret = seq.pop().expect("inverse evolution is never empty");
    for config in &mut seq {
        config.wipe();
    }
    Ok(secret)
}
