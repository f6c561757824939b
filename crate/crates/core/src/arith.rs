//! Exact integer arithmetic: primality, p-adic valuations and a
//! deterministic Chinese Remainder solver.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Witness bases for Miller-Rabin: the first thirteen primes.
const MR_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Strong-pseudoprime tests to the bases 2..=41 have no composite
/// survivor below this value (3.317e24, well above 2^64). Above it
/// `is_prime` is still a strong probable-prime test with 13 bases.
pub const PRIMALITY_EXACT_BOUND: &str = "3317044064679887385961981";

/// Primality of `n`. Deterministic and proven correct for all
/// `n < PRIMALITY_EXACT_BOUND`.
pub fn is_prime(n: &BigUint) -> bool {
    let small = n.to_u64();
    if let Some(s) = small {
        if s < 2 {
            return false;
        }
        for &b in &MR_BASES {
            if s == b {
                return true;
            }
            if s % b == 0 {
                return false;
            }
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let shift = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> shift;
    'witness: for &b in &MR_BASES {
        let mut x = BigUint::from(b).modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..shift {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Convenience wrapper for word-sized inputs.
pub fn is_prime_u64(n: u64) -> bool {
    is_prime(&BigUint::from(n))
}

/// Ascending primes in `[lo, hi]` that are not in `excluded`.
pub fn primes_in_range(lo: u64, hi: u64, excluded: &[u64]) -> Vec<u64> {
    if lo > hi {
        return Vec::new();
    }
    (lo..=hi)
        .filter(|q| !excluded.contains(q) && is_prime_u64(*q))
        .collect()
}

/// Smallest prime strictly greater than `n` that is not in `excluded`.
pub fn next_prime_excluding(n: u64, excluded: &[u64]) -> u64 {
    let mut q = n + 1;
    while !is_prime_u64(q) || excluded.contains(&q) {
        q += 1;
    }
    q
}

/// Largest `e` with `p^e | a`.
pub fn padic_val(a: &BigInt, p: u64) -> Result<u32> {
    if a.is_zero() {
        return Err(Error::ZeroValuation);
    }
    if p < 2 {
        return Err(Error::NotPrime(p));
    }
    let p = BigInt::from(p);
    let mut a = a.abs();
    let mut e = 0;
    loop {
        let (q, r) = a.div_rem(&p);
        if !r.is_zero() {
            return Ok(e);
        }
        a = q;
        e += 1;
    }
}

/// `p`-adic valuation with `v(0) = None` standing in for infinity.
pub fn padic_val_opt(a: &BigInt, p: u64) -> Option<u32> {
    padic_val(a, p).ok()
}

/// `x ≡ residue (mod modulus)` with `0 <= residue < modulus`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Congruence {
    residue: BigInt,
    modulus: BigInt,
}

impl Congruence {
    pub fn new(residue: impl Into<BigInt>, modulus: impl Into<BigInt>) -> Result<Self> {
        let modulus = modulus.into();
        if modulus < BigInt::from(2) {
            return Err(Error::InvalidArgument(format!(
                "congruence modulus must be >= 2, got {modulus}"
            )));
        }
        let residue = residue.into().mod_floor(&modulus);
        Ok(Congruence { residue, modulus })
    }

    pub fn residue(&self) -> &BigInt {
        &self.residue
    }

    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    pub fn holds_for(&self, x: &BigInt) -> bool {
        x.mod_floor(&self.modulus) == self.residue
    }
}

/// Smallest nonnegative solution of a system of congruences with pairwise
/// coprime moduli.
pub fn crt_solve(congruences: &[Congruence]) -> Result<BigInt> {
    let (first, rest) = congruences
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("CRT needs at least one congruence".into()))?;
    let mut x = first.residue.clone();
    let mut m = first.modulus.clone();
    for c in rest {
        let eg = m.extended_gcd(&c.modulus);
        if !eg.gcd.is_one() {
            return Err(Error::CrtNotCoprime {
                a: m.to_string(),
                b: c.modulus.to_string(),
            });
        }
        // x + m*t ≡ r (mod n)  =>  t ≡ (r - x) * m^{-1} (mod n)
        let inv = eg.x.mod_floor(&c.modulus);
        let t = ((&c.residue - &x) * inv).mod_floor(&c.modulus);
        x += &m * t;
        m *= &c.modulus;
        x = x.mod_floor(&m);
    }
    Ok(x)
}

/// Product of all moduli in the system.
pub fn crt_modulus(congruences: &[Congruence]) -> BigInt {
    congruences.iter().map(|c| c.modulus.clone()).product()
}

/// Prime factorization of `n` by trial division over `primes`; fails if a
/// cofactor other than 1 remains.
pub fn factor_over(n: &BigInt, primes: &[u64]) -> Result<Vec<(u64, u32)>> {
    if n.is_zero() {
        return Err(Error::ZeroValuation);
    }
    let mut rest = n.abs();
    let mut out = Vec::new();
    for &p in primes {
        let pb = BigInt::from(p);
        let mut e = 0;
        while (&rest % &pb).is_zero() {
            rest /= &pb;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    if !rest.is_one() {
        return Err(Error::InvalidArgument(format!(
            "{n} has a cofactor {rest} outside the supplied primes"
        )));
    }
    Ok(out)
}

/// Prime factorization of a small positive integer by trial division.
pub fn factor_small(n: &BigInt) -> Result<Vec<(u64, u32)>> {
    let bound = n
        .abs()
        .sqrt()
        .to_u64()
        .ok_or_else(|| Error::InvalidArgument(format!("{n} too large to factor")))?;
    let mut rest = n.abs();
    let mut out = Vec::new();
    let mut p = 2u64;
    while p <= bound && !rest.is_one() {
        let pb = BigInt::from(p);
        let mut e = 0;
        while (&rest % &pb).is_zero() {
            rest /= &pb;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if rest > BigInt::one() {
        let q = rest
            .to_u64()
            .ok_or_else(|| Error::InvalidArgument(format!("{n} too large to factor")))?;
        out.push((q, 1));
    }
    Ok(out)
}

/// All positive divisors of `n`, ascending.
pub fn divisors(n: &BigInt) -> Result<Vec<BigInt>> {
    let fac = factor_small(n)?;
    let mut divs = vec![BigInt::one()];
    for (p, e) in fac {
        let pb = BigInt::from(p);
        let mut next = Vec::with_capacity(divs.len() * (e as usize + 1));
        for d in &divs {
            let mut pk = d.clone();
            for _ in 0..=e {
                next.push(pk.clone());
                pk *= &pb;
            }
        }
        divs = next;
    }
    divs.sort();
    Ok(divs)
}
