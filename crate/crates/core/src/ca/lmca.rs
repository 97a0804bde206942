use super::{CaError, CellMatrix, ConfigWindow, RuleNumber};

/// One step of the memoryless linear CA `rule` on the torus: output cell
/// `(i, j)` is the mod-`c` sum of the active neighbors
/// `C[(i+alpha) mod r][(j+beta) mod s]`.
pub fn lca_step(config: &CellMatrix, rule: RuleNumber) -> CellMatrix {
    let rows = config.rows();
    let cols = config.cols();
    let mask = config.mask();
    let cells = config.cells();
    let mut out = vec![0u32; rows * cols];
    for (alpha, beta) in rule.active_offsets() {
        for i in 0..rows {
            let si = (i as isize + alpha).rem_euclid(rows as isize) as usize;
            let src = &cells[si * cols..(si + 1) * cols];
            let dst = &mut out[i * cols..(i + 1) * cols];
            let mut sj = beta.rem_euclid(cols as isize) as usize;
            for d in dst.iter_mut() {
                // Both addends are < 2^24, so the sum cannot overflow u32
                // before the mask reduces it.
                *d = (*d + src[sj]) & mask;
                sj += 1;
                if sj == cols {
                    sj = 0;
                }
            }
        }
    }
    CellMatrix::from_raw(rows, cols, config.bits(), out)
}

/// Whether a term is added or subtracted in the mod-`c` accumulation.
#[derive(Clone, Copy)]
enum Sign {
    Plus,
    Minus,
}

/// An order-`k` linear memory CA.
///
/// `rules` holds the `k - 1` Moore rules; `rules[0]` acts on the newest
/// window member and `rules[k - 2]` on the second-oldest. The oldest member
/// always enters the sum unchanged (the identity memory stage), which is
/// exactly what makes the automaton reversible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lmca {
    rules: Vec<RuleNumber>,
}

impl Lmca {
    pub fn new(rules: Vec<RuleNumber>) -> Result<Self, CaError> {
        if rules.is_empty() {
            return Err(CaError::Domain(
                "a memory CA needs at least one rule (order k >= 2)".into(),
            ));
        }
        Ok(Self { rules })
    }

    /// The memory order `k`.
    pub fn order(&self) -> usize {
        self.rules.len() + 1
    }

    pub fn rules(&self) -> &[RuleNumber] {
        &self.rules
    }

    fn check_arity(&self, window: &ConfigWindow) -> Result<(), CaError> {
        if window.order() != self.order() {
            return Err(CaError::Arity {
                window_order: window.order(),
                rule_count: self.rules.len(),
            });
        }
        Ok(())
    }

    /// Computes `C^(t+1)` from the window `C^(t-k+1)..C^(t)` (oldest first):
    /// the sum of `rules[l]` applied to the `(l+1)`-th newest member, plus
    /// the oldest member itself, all mod `c`.
    pub fn step(&self, window: &ConfigWindow) -> Result<CellMatrix, CaError> {
        self.check_arity(window)?;
        Ok(self.step_slice(window.configs(), Sign::Plus))
    }

    /// Computes the next configuration of the inverse automaton. The window
    /// is ordered by inverse time, oldest first, so its first member is the
    /// forward-newest configuration. The rule application order reverses
    /// (`rules[k-2]` acts on the inverse-newest member) and every rule term
    /// is subtracted instead of added.
    pub fn inverse_step(&self, window: &ConfigWindow) -> Result<CellMatrix, CaError> {
        self.check_arity(window)?;
        Ok(self.step_slice(window.configs(), Sign::Minus))
    }

    /// Shared kernel; `configs.len() == k` guaranteed by the callers.
    ///
    /// Forward: member at index `idx >= 1` gets `rules[k - 1 - idx]`, added.
    /// Inverse: member at index `idx >= 1` gets `rules[idx - 1]`, subtracted.
    /// Index 0 is the memory term in both directions.
    fn step_slice(&self, configs: &[CellMatrix], sign: Sign) -> CellMatrix {
        let k = configs.len();
        let memory = &configs[0];
        let mask = memory.mask();
        let mut acc = memory.cells().to_vec();
        for (idx, config) in configs.iter().enumerate().skip(1) {
            let rule = match sign {
                Sign::Plus => self.rules[k - 1 - idx],
                Sign::Minus => self.rules[idx - 1],
            };
            let term = lca_step(config, rule);
            for (a, &t) in acc.iter_mut().zip(term.cells()) {
                let t = match sign {
                    Sign::Plus => t,
                    Sign::Minus => t.wrapping_neg() & mask,
                };
                *a = (*a + t) & mask;
            }
        }
        CellMatrix::from_raw(memory.rows(), memory.cols(), memory.bits(), acc)
    }

    /// Evolves `steps` configurations beyond the initial window and returns
    /// the full sequence `C^(0)..C^(k-1+steps)`, initial window included.
    pub fn evolve(
        &self,
        init: ConfigWindow,
        steps: usize,
    ) -> Result<Vec<CellMatrix>, CaError> {
        self.evolve_impl(init, steps, Sign::Plus)
    }

    /// Inverse-time counterpart of [`Lmca::evolve`].
    pub fn inverse_evolve(
        &self,
        init: ConfigWindow,
        steps: usize,
    ) -> Result<Vec<CellMatrix>, CaError> {
        self.evolve_impl(init, steps, Sign::Minus)
    }

    fn evolve_impl(
        &self,
        init: ConfigWindow,
        steps: usize,
        sign: Sign,
    ) -> Result<Vec<CellMatrix>, CaError> {
        self.check_arity(&init)?;
        let k = self.order();
        let mut seq = init.into_configs();
        seq.reserve(steps);
        for _ in 0..steps {
            let next = self.step_slice(&seq[seq.len() - k..], sign);
            seq.push(next);
        }
        Ok(seq)
    }
}
