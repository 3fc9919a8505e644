//! Exact rank over the Gaussian rationals by multi-modular elimination.
//!
//! For a prime `p ≡ 1 (mod 4)` there is a ring map `Z[i] → F_p` sending `i`
//! to a square root of `−1`. The rank modulo `p` never exceeds the true rank.
//! A nonzero `r × r` minor `D` vanishes modulo `p` only if `p` divides
//! `|D|²`, and `|D|` is bounded by the product of the column norms
//! (Hadamard). Once the primes used multiply to more than that bound squared,
//! the maximum of the modular ranks is the exact rank. A modular rank equal to
//! `min(#vectors, dim)` is already exact and ends the loop immediately.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::echelon::{Echelon, FieldOps, Insertion, PrimeField};
use crate::linalg::SparseVec;
use crate::scalar::GaussianRational;

/// Rank of `vectors` (all of length `dim`), exact.
pub fn certified_rank(vectors: &[SparseVec<GaussianRational>], dim: usize) -> Result<usize> {
    let nonzero: Vec<&SparseVec<GaussianRational>> = vectors.iter().filter(|v| !v.is_empty()).collect();
    let ceiling = nonzero.len().min(dim);
    if ceiling == 0 {
        return Ok(0);
    }
    let mut best = 0;
    let mut covered_bits = 0.0;
    let mut needed_bits: Option<f64> = None;
    for prime in ModularPrimes::new() {
        let Some(rank) = rank_mod_p(&nonzero, &prime) else {
            continue;
        };
        best = best.max(rank);
        if best == ceiling {
            return Ok(best);
        }
        covered_bits += (prime.field.p as f64).log2();
        let needed = *needed_bits.get_or_insert_with(|| 2.0 * hadamard_log2(&nonzero) + 2.0);
        if covered_bits > needed {
            return Ok(best);
        }
    }
    Err(Error::Numerical("ran out of primes while certifying a rank".into()))
}

/// Rank modulo a single prime; `None` if the prime divides a denominator.
pub fn rank_mod_p(vectors: &[&SparseVec<GaussianRational>], prime: &ModularPrime) -> Option<usize> {
    let mut ech = Echelon::new(prime.field, false);
    for (j, v) in vectors.iter().enumerate() {
        let mut reduced = Vec::with_capacity(v.len());
        for (i, z) in v.iter() {
            let x = prime.reduce(z)?;
            if x != 0 {
                reduced.push((*i, x));
            }
        }
        let _: Insertion<u64> = ech.insert(reduced, j);
    }
    Some(ech.rank())
}

/// A prime `p ≡ 1 (mod 4)` with a chosen square root of `−1`.
#[derive(Debug, Clone, Copy)]
pub struct ModularPrime {
    pub field: PrimeField,
    pub sqrt_minus_one: u64,
}

impl ModularPrime {
    fn reduce_rational(&self, r: &BigRational) -> Option<u64> {
        let p = BigInt::from(self.field.p);
        let den = r.denom().mod_floor(&p).to_u64()?;
        if den == 0 {
            return None;
        }
        let num = r.numer().mod_floor(&p).to_u64()?;
        Some(self.field.mul(&num, &self.field.inv(&den)))
    }

    /// Image of a Gaussian rational in `F_p`, or `None` when a denominator
    /// is divisible by `p`.
    pub fn reduce(&self, z: &GaussianRational) -> Option<u64> {
        let re = self.reduce_rational(&z.re)?;
        let im = self.reduce_rational(&z.im)?;
        Some(self.field.add(re, self.field.mul(&im, &self.sqrt_minus_one)))
    }
}

/// Primes `≡ 1 (mod 4)` below `2^62`, descending.
pub struct ModularPrimes {
    next: u64,
}

impl ModularPrimes {
    pub fn new() -> Self {
        // 2^62 + 1 ≡ 1 (mod 4); stepping by 4 keeps the residue.
        ModularPrimes { next: (1u64 << 62) + 1 }
    }
}

impl Default for ModularPrimes {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for ModularPrimes {
    type Item = ModularPrime;

    fn next(&mut self) -> Option<ModularPrime> {
        while self.next > 5 {
            self.next -= 4;
            let p = self.next;
            if is_prime(p) {
                let field = PrimeField { p };
                let root = (2..)
                    .map(|c| field.pow(c, (p - 1) / 4))
                    .find(|t| field.mul(t, t) == p - 1)
                    .expect("p ≡ 1 mod 4 has a square root of −1");
                return Some(ModularPrime { field, sqrt_minus_one: root });
            }
        }
        None
    }
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n % p == 0 {
            return n == p;
        }
    }
    let f = PrimeField { p: n };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in SMALL {
        let mut x = f.pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = f.mul(&x, &x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn log2_big(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.abs().to_f64().unwrap().log2()
    } else {
        let shift = bits - 64;
        (x.abs() >> shift).to_f64().unwrap().log2() + shift as f64
    }
}

/// `log2` of the Hadamard bound for the vectors after clearing denominators
/// vector by vector.
fn hadamard_log2(vectors: &[&SparseVec<GaussianRational>]) -> f64 {
    let mut total = 0.0;
    for v in vectors {
        let mut lcm = BigInt::one();
        for (_, z) in v.iter() {
            lcm = lcm.lcm(z.re.denom()).lcm(z.im.denom());
        }
        let mut logs = Vec::with_capacity(2 * v.len());
        for (_, z) in v.iter() {
            for part in [&z.re, &z.im] {
                if !part.is_zero() {
                    let scaled = part.numer() * (&lcm / part.denom());
                    logs.push(2.0 * log2_big(&scaled));
                }
            }
        }
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = logs.iter().map(|l| (l - max).exp2()).sum();
        // Column norms of nonzero Gaussian-integer vectors are at least 1.
        total += (0.5 * (max + sum.log2())).max(0.0) + 1e-9 * max.abs();
    }
    total
}
