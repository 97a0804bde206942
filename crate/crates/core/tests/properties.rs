//! Property tests: engine invariants checked against independent oracles,
//! and round trips for the codecs and the share container.

use proptest::collection::vec;
use proptest::prelude::*;

use cas_core::ca::{lca_step, CellMatrix, ConfigWindow, Lmca, RuleNumber};
use cas_core::image::{Depth, Image, Pixels};
use cas_core::share::{Share, SchemeId, ShareHeader};
use cas_core::{pnm, recover, scheme, split, BbsGenerator};

/// Direct-definition step of the general order-`k` linear memory CA with an
/// arbitrary rule per stage (stage `l` acts on the `(l+1)`-th newest window
/// member). The engine's forward step must equal this with the identity
/// rule appended as the oldest stage.
fn general_memory_step(configs: &[CellMatrix], stage_rules: &[RuleNumber]) -> CellMatrix {
    assert_eq!(configs.len(), stage_rules.len());
    let k = configs.len();
    let first = &configs[0];
    let modulus = u64::from(first.modulus());
    let mut cells = Vec::with_capacity(first.len());
    for i in 0..first.rows() {
        for j in 0..first.cols() {
            let mut sum = 0u64;
            for (stage, rule) in stage_rules.iter().enumerate() {
                // stage 0 acts on the newest member, which sits at the end.
                let config = &configs[k - 1 - stage];
                let weights = rule.weights();
                for alpha in -1isize..=1 {
                    for beta in -1isize..=1 {
                        sum += u64::from(weights.weight(alpha, beta))
                            * u64::from(
                                config.get_wrapped(i as isize + alpha, j as isize + beta),
                            );
                    }
                }
            }
            cells.push((sum % modulus) as u32);
        }
    }
    CellMatrix::from_cells(first.rows(), first.cols(), first.bits(), cells).unwrap()
}

/// Scalar oracle for 1x1 grids: every offset collapses onto the one cell,
/// so each stage multiplies by its rule's weight count.
fn scalar_recurrence(init: &[u64], rules: &[RuleNumber], steps: usize, modulus: u64) -> Vec<u64> {
    let k = init.len();
    let mut seq = init.to_vec();
    for _ in 0..steps {
        let len = seq.len();
        let mut next = seq[len - k] % modulus; // memory term
        for (l, rule) in rules.iter().enumerate() {
            let mult = u64::from(rule.weight_count());
            next = (next + mult * seq[len - 1 - l]) % modulus;
        }
        seq.push(next);
    }
    seq
}

fn arb_bits() -> impl Strategy<Value = u8> {
    prop_oneof![Just(1u8), Just(8u8), Just(24u8)]
}

prop_compose! {
    fn arb_grid()(bits in arb_bits(), rows in 1usize..=8, cols in 1usize..=8)
        (cells in vec(0u32..(1u32 << bits), rows * cols),
         bits in Just(bits), rows in Just(rows), cols in Just(cols))
    -> CellMatrix {
        CellMatrix::from_cells(rows, cols, bits, cells).unwrap()
    }
}

prop_compose! {
    fn arb_window()(bits in arb_bits(),
                    rows in 1usize..=8,
                    cols in 1usize..=8,
                    k in 2usize..=5)
        (matrices in vec(vec(0u32..(1u32 << bits), rows * cols), k),
         rules in vec(0u16..=511, k - 1),
         bits in Just(bits), rows in Just(rows), cols in Just(cols))
    -> (ConfigWindow, Vec<RuleNumber>) {
        let configs = matrices
            .into_iter()
            .map(|cells| CellMatrix::from_cells(rows, cols, bits, cells).unwrap())
            .collect();
        let rules = rules.into_iter().map(|v| RuleNumber::new(v).unwrap()).collect();
        (ConfigWindow::new(configs).unwrap(), rules)
    }
}

proptest! {
    /// Evolving forward then running the inverse automaton on the reversed
    /// tail reproduces the initial window exactly.
    #[test]
    fn forward_then_inverse_round_trip(
        (window, rules) in arb_window(),
        steps in 0usize..=16,
    ) {
        let lmca = Lmca::new(rules).unwrap();
        let k = lmca.order();
        let seq = lmca.evolve(window.clone(), steps).unwrap();
        for m in &seq {
            prop_assert_eq!((m.rows(), m.cols(), m.bits()),
                            (window.rows(), window.cols(), window.bits()));
        }
        let tail = ConfigWindow::new(seq[seq.len() - k..].to_vec()).unwrap();
        let back = lmca.inverse_evolve(tail.reversed(), steps).unwrap();
        let recovered = &back[back.len() - k..];
        let expected = window.reversed();
        prop_assert_eq!(recovered, expected.configs());
    }

    /// The one-step CA is linear: stepping a mod-c sum equals the mod-c sum
    /// of the stepped matrices.
    #[test]
    fn lca_is_linear(a in arb_grid(), w in 0u16..=511) {
        let mask = a.mask();
        let b_cells: Vec<u32> = a.cells().iter().map(|&c| (c.wrapping_mul(7).wrapping_add(3)) & mask).collect();
        let b = CellMatrix::from_cells(a.rows(), a.cols(), a.bits(), b_cells).unwrap();
        let sum_cells: Vec<u32> = a.cells().iter().zip(b.cells()).map(|(&x, &y)| (x + y) & mask).collect();
        let sum = CellMatrix::from_cells(a.rows(), a.cols(), a.bits(), sum_cells).unwrap();
        let rule = RuleNumber::new(w).unwrap();
        let lhs = lca_step(&sum, rule);
        let ra = lca_step(&a, rule);
        let rb = lca_step(&b, rule);
        let rhs: Vec<u32> = ra.cells().iter().zip(rb.cells()).map(|(&x, &y)| (x + y) & mask).collect();
        prop_assert_eq!(lhs.cells(), rhs.as_slice());
    }

    /// The engine's memory step equals the direct-definition general step
    /// with the identity rule as the oldest stage.
    #[test]
    fn memory_step_matches_general_form((window, rules) in arb_window()) {
        let lmca = Lmca::new(rules.clone()).unwrap();
        let got = lmca.step(&window).unwrap();
        let mut stage_rules = rules;
        stage_rules.push(RuleNumber::IDENTITY);
        let expected = general_memory_step(window.configs(), &stage_rules);
        prop_assert_eq!(got, expected);
    }

    /// On 1x1 grids the whole evolution reduces to a scalar recurrence with
    /// multiplier `popcount(w)` per stage.
    #[test]
    fn one_cell_evolution_matches_scalar_recurrence(
        bits in arb_bits(),
        k in 2usize..=5,
        raw_init in vec(0u64..(1u64 << 24), 5),
        raw_rules in vec(0u16..=511, 4),
        steps in 0usize..=16,
    ) {
        let modulus = 1u64 << bits;
        let init: Vec<u64> = raw_init[..k].iter().map(|&v| v % modulus).collect();
        let rules: Vec<RuleNumber> =
            raw_rules[..k - 1].iter().map(|&v| RuleNumber::new(v).unwrap()).collect();
        let configs: Vec<CellMatrix> = init
            .iter()
            .map(|&v| CellMatrix::from_cells(1, 1, bits, vec![v as u32]).unwrap())
            .collect();
        let lmca = Lmca::new(rules.clone()).unwrap();
        let seq = lmca.evolve(ConfigWindow::new(configs).unwrap(), steps).unwrap();
        let expected = scalar_recurrence(&init, &rules, steps, modulus);
        let got: Vec<u64> = seq.iter().map(|m| u64::from(m.cells()[0])).collect();
        prop_assert_eq!(got, expected);
    }

    /// Encoded shares decode back to themselves.
    #[test]
    fn share_encode_decode_round_trip(
        bits in arb_bits(),
        rows in 1usize..=9,
        cols in 1usize..=9,
        k in 2u8..=5,
        extra_n in 0u8..=2,
        extra_m in 0u16..=2,
        offset in 0u16..=2,
        raw_rules in vec(0u16..=511, 4),
        id in proptest::array::uniform16(0u8..),
        seed_cells in vec(0u32..(1u32 << 24), 81),
    ) {
        let n = k + extra_n;
        let m = u16::from(k) + extra_m;
        let index = m + offset.min(u16::from(n) - 1);
        let mask = (1u32 << bits) - 1;
        let cells: Vec<u32> = seed_cells[..rows * cols].iter().map(|&c| c & mask).collect();
        let header = ShareHeader {
            depth: Depth::from_bits(bits).unwrap(),
            k,
            n,
            m,
            index,
            rows: rows as u32,
            cols: cols as u32,
            scheme_id: SchemeId::new(id),
            rules: raw_rules[..usize::from(k) - 1]
                .iter()
                .map(|&v| RuleNumber::new(v).unwrap())
                .collect(),
        };
        let payload = CellMatrix::from_cells(rows, cols, bits, cells).unwrap();
        let share = Share::new(header, payload).unwrap();
        let bytes = share.encode();
        prop_assert_eq!(Share::decode(&bytes).unwrap(), share);
    }

    /// Image -> matrix -> image is the identity at every depth, and the
    /// PNM codecs round-trip the image.
    #[test]
    fn image_matrix_and_pnm_round_trips(
        bits in arb_bits(),
        width in 1usize..=9,
        height in 1usize..=9,
        raw in vec(0u32..(1u32 << 24), 81),
    ) {
        let pixels = match bits {
            1 => Pixels::BlackWhite(raw[..width * height].iter().map(|&v| v & 1 == 1).collect()),
            8 => Pixels::Gray(raw[..width * height].iter().map(|&v| (v & 0xff) as u8).collect()),
            _ => Pixels::Color(
                raw[..width * height]
                    .iter()
                    .map(|&v| [(v >> 16) as u8, (v >> 8) as u8, v as u8])
                    .collect(),
            ),
        };
        let img = Image::new(width, height, pixels).unwrap();
        let matrix = img.to_matrix();
        prop_assert_eq!(matrix.modulus() as u64, 1u64 << bits);
        let back = Image::from_matrix(&matrix, img.depth()).unwrap();
        prop_assert_eq!(&back, &img);
        let encoded = pnm::encode(&img);
        prop_assert_eq!(pnm::decode(&encoded).unwrap(), img);
    }

    /// Split then recover is the identity for every consecutive window.
    #[test]
    fn split_recover_round_trip(
        bits in arb_bits(),
        rows in 1usize..=6,
        cols in 1usize..=6,
        k in 2u8..=3,
        extra_n in 0u8..=1,
        raw_rules in vec(0u16..=511, 2),
        raw_cells in vec(0u32..(1u32 << 24), 36),
    ) {
        let mask = (1u32 << bits) - 1;
        let cells: Vec<u32> = raw_cells[..rows * cols].iter().map(|&c| c & mask).collect();
        let secret = CellMatrix::from_cells(rows, cols, bits, cells).unwrap();
        let rules: Vec<RuleNumber> = raw_rules[..usize::from(k) - 1]
            .iter()
            .map(|&v| RuleNumber::new(v).unwrap())
            .collect();
        let n = k + extra_n;
        let params = scheme::SchemeParams::new(
            k,
            n,
            u16::from(k),
            Depth::from_bits(bits).unwrap(),
            rows as u32,
            cols as u32,
            rules,
            SchemeId::new([3; 16]),
        )
        .unwrap();
        let mut bbs = BbsGenerator::new(
            &cas_core::num_bigint::BigUint::from(7u8),
            &cas_core::num_bigint::BigUint::from(19u8),
            &cas_core::num_bigint::BigUint::from(100u8),
        )
        .unwrap();
        let shares = split(&secret, &params, &mut bbs).unwrap();
        prop_assert_eq!(shares.len(), usize::from(n));
        for alpha in 0..=usize::from(n - k) {
            let window = &shares[alpha..alpha + usize::from(k)];
            prop_assert_eq!(recover(window).unwrap(), secret.clone());
        }
    }
}
