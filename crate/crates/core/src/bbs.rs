//! Blum-Blum-Shub pseudorandom bit generator.
//!
//! Bits are the least significant bits of iterated squaring modulo
//! `n = p*q`, where `p` and `q` are distinct primes congruent to 3 mod 4.
//! The scheme uses it to fill the random initial configurations.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{CryptoRng, RngCore};
use thiserror::Error;

use crate::ca::CellMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BbsError {
    /// The primes violate the construction requirements.
    #[error("{0}")]
    Param(String),
    /// The seed is out of range or not coprime to the modulus.
    #[error("{0}")]
    Seed(String),
}

/// Sequential BBS bit generator; clone it to fork a replayable stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BbsGenerator {
    modulus: BigUint,
    residue: BigUint,
}

impl BbsGenerator {
    /// Default prime size used by [`BbsGenerator::generate`]; a 512-bit
    /// modulus is plenty for a demonstration-grade generator.
    pub const DEFAULT_PRIME_BITS: u64 = 256;

    /// Builds a generator from primes `p != q`, both congruent to 3 mod 4,
    /// and a seed `1 < x0 < p*q` coprime to `p*q`.
    ///
    /// The seed is squared once at construction so the working residue is a
    /// quadratic residue; no bit is emitted for the seed itself.
    pub fn new(p: &BigUint, q: &BigUint, x0: &BigUint) -> Result<Self, BbsError> {
        let three = BigUint::from(3u8);
        let four = BigUint::from(4u8);
        for (name, prime) in [("p", p), ("q", q)] {
            if prime % &four != three {
                return Err(BbsError::Param(format!(
                    "{name} = {prime} is not congruent to 3 mod 4"
                )));
            }
            if !is_probable_prime(prime) {
                return Err(BbsError::Param(format!("{name} = {prime} is not prime")));
            }
        }
        if p == q {
            return Err(BbsError::Param("p and q must be distinct".into()));
        }
        let modulus = p * q;
        if x0 <= &BigUint::one() || x0 >= &modulus {
            return Err(BbsError::Seed(format!(
                "seed {x0} not in the open range (1, {modulus})"
            )));
        }
        if !x0.gcd(&modulus).is_one() {
            return Err(BbsError::Seed(format!(
                "seed {x0} shares a factor with the modulus"
            )));
        }
        let residue = (x0 * x0) % &modulus;
        Ok(Self { modulus, residue })
    }

    /// Draws fresh Blum primes of `prime_bits` bits each and a coprime seed
    /// from `rng`.
    pub fn generate(prime_bits: u64, rng: &mut (impl RngCore + CryptoRng)) -> Self {
        let p = random_blum_prime(prime_bits, rng);
        let q = loop {
            let q = random_blum_prime(prime_bits, rng);
            if q != p {
                break q;
            }
        };
        let modulus = &p * &q;
        let x0 = loop {
            let candidate = rng.gen_biguint_range(&BigUint::from(2u8), &modulus);
            if candidate.gcd(&modulus).is_one() {
                break candidate;
            }
        };
        Self::new(&p, &q, &x0).expect("freshly generated parameters satisfy the preconditions")
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    /// The current quadratic residue.
    pub fn residue(&self) -> &BigUint {
        &self.residue
    }

    /// Advances one squaring, `x <- x^2 mod n`, and returns the least
    /// significant bit of the new residue.
    pub fn next_bit(&mut self) -> u8 {
        self.residue = (&self.residue * &self.residue) % &self.modulus;
        u8::from(self.residue.bit(0))
    }

    /// Assembles `count <= 32` bits MSB-first into one value.
    fn next_bits(&mut self, count: u8) -> u32 {
        debug_assert!(count <= 32);
        let mut value = 0u32;
        for _ in 0..count {
            value = (value << 1) | u32::from(self.next_bit());
        }
        value
    }

    /// Draws a rule number: nine bits MSB-first, uniform over `[0, 511]`.
    pub fn next_rule_value(&mut self) -> u16 {
        self.next_bits(9) as u16
    }

    /// Fills `buf` with generated bytes, eight bits per byte MSB-first.
    pub fn fill_bytes(&mut self, buf: &mut [u8]) {
        for byte in buf.iter_mut() {
            *byte = self.next_bits(8) as u8;
        }
    }

    /// Fills an `rows x cols` matrix over `Z_(2^bits)`, consuming exactly
    /// `rows * cols * bits` bits in row-major cell order, `bits` bits per
    /// cell assembled MSB-first.
    pub fn fill_matrix(&mut self, rows: usize, cols: usize, bits: u8) -> CellMatrix {
        let mut cells = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            cells.push(self.next_bits(bits));
        }
        CellMatrix::from_raw(rows, cols, bits, cells)
    }
}

/// Small primes for trial division; also the Miller-Rabin bases.
const SMALL_PRIMES: [u32; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97,
];

/// Miller-Rabin with the fixed small-prime bases above: deterministic for
/// every modulus below 3.3e24 and overwhelmingly reliable beyond. Primality
/// proving is deliberately out of scope.
fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u8);
    if n < &two {
        return false;
    }
    for &p in &SMALL_PRIMES {
        let p = BigUint::from(p);
        if n == &p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    // n - 1 = d * 2^s with d odd
    let n_minus_1 = n - BigUint::one();
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for &a in &SMALL_PRIMES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Uniformly draws `bits`-bit candidates with the top bit set and the low
/// two bits forced to 1 (so the value is 3 mod 4) until one is prime.
fn random_blum_prime(bits: u64, rng: &mut (impl RngCore + CryptoRng)) -> BigUint {
    assert!(bits >= 4, "prime size must be at least 4 bits");
    loop {
        let mut candidate = rng.gen_biguint(bits);
        candidate.set_bit(bits - 1, true);
        candidate.set_bit(0, true);
        candidate.set_bit(1, true);
        if is_probable_prime(&candidate) {
            return candidate;
        }
    }
}
