//! Replacing split monic polynomials by Q-irreducible ones without changing
//! the fixed divisor of any product of them.
//!
//! Every non-leading coefficient of `f_i` is shifted by an offset that is
//! `0 mod M` and makes the result Eisenstein at an auxiliary prime `Q`, where
//! `M = ∏ q^{e_q + 1}` runs over all primes `q` up to the total degree and
//! `e_q = v_q(d(∏ f_i))`. Since `F_i ≡ f_i (mod M)`, mixed products agree with
//! the original products modulo a high enough power of every prime that can
//! divide their fixed divisors.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::arith::{self, crt_solve, is_prime_u64, Congruence};
use crate::error::{Error, Result};
use crate::json;
use crate::poly::{fixed_divisor, poly_product, ZPoly};
use crate::report::Report;

/// Above this many polynomials `verify_lift` samples mixed products.
pub const EXHAUSTIVE_LIMIT: usize = 12;
const SAMPLED_COMBINATIONS: usize = 4096;

/// `q -> v_q(d(∏ fs))` for every prime `q <= deg(∏ fs)`, zero entries kept.
pub fn fixdiv_profile(fs: &[ZPoly]) -> Result<BTreeMap<u64, u32>> {
    let prod = poly_product(fs);
    let deg = prod.degree().ok_or(Error::ZeroPolynomial)? as u64;
    let d = fixed_divisor(&prod)?;
    arith::primes_in_range(2, deg, &[])
        .into_iter()
        .map(|q| Ok((q, arith::padic_val(&d, q)?)))
        .collect()
}

/// Smallest prime above `total_degree` outside `excluded`.
pub fn choose_aux_prime(total_degree: u64, excluded: &[u64]) -> u64 {
    arith::next_prime_excluding(total_degree, excluded)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftCertificate {
    pub aux_q: u64,
    #[serde(with = "json::big")]
    pub modulus_m: BigInt,
    /// Exponents `e_q` of the joint product; `M = ∏ q^{e_q + 1}`.
    /// Stored in JSON as `[[q, e_q], ..]`.
    #[serde(with = "profile_serde")]
    pub profile: BTreeMap<u64, u32>,
    /// `offsets[i][k]` is added to the coefficient of `x^k` in `originals[i]`.
    #[serde(with = "offsets_serde")]
    pub offsets: Vec<Vec<BigInt>>,
    pub originals: Vec<ZPoly>,
    pub lifted: Vec<ZPoly>,
    /// Polynomials that enter the joint product unchanged.
    #[serde(default)]
    pub companions: Vec<ZPoly>,
}

mod profile_serde {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<u64, u32>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(m.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u64, u32>, D::Error> {
        let pairs = Vec::<(u64, u32)>::deserialize(d)?;
        let n = pairs.len();
        let m: BTreeMap<u64, u32> = pairs.into_iter().collect();
        if m.len() != n {
            return Err(serde::de::Error::custom("repeated prime in profile"));
        }
        Ok(m)
    }
}

mod offsets_serde {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Row(#[serde(with = "crate::json::big_vec")] Vec<BigInt>);

    pub fn serialize<S: Serializer>(v: &[Vec<BigInt>], ser: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|r| Row(r.clone())).collect::<Vec<_>>().serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<Vec<BigInt>>, D::Error> {
        Ok(Vec::<Row>::deserialize(de)?.into_iter().map(|r| r.0).collect())
    }
}

fn merged_profile(
    fs: &[ZPoly],
    companions: &[ZPoly],
    extra: &BTreeMap<u64, u32>,
) -> Result<(BTreeMap<u64, u32>, u64)> {
    let joint: Vec<ZPoly> = fs.iter().chain(companions).cloned().collect();
    let mut profile = fixdiv_profile(&joint)?;
    for (&q, &e) in extra {
        if !is_prime_u64(q) {
            return Err(Error::NotPrime(q));
        }
        let slot = profile.entry(q).or_insert(0);
        *slot = (*slot).max(e);
    }
    let deg = poly_product(&joint).degree().unwrap_or(0) as u64;
    Ok((profile, deg))
}

/// Lift `fs` against their own product, with `extra_profile` merged in
/// (exponent-wise maximum).
pub fn lift(fs: &[ZPoly], extra_profile: &BTreeMap<u64, u32>) -> Result<(Vec<ZPoly>, LiftCertificate)> {
    lift_impl(fs, &[], extra_profile)
}

/// Lift `fs` so that fixed divisors are preserved for all products drawn
/// from `fs` together with the unchanged `companions`.
pub fn lift_jointly(fs: &[ZPoly], companions: &[ZPoly]) -> Result<(Vec<ZPoly>, LiftCertificate)> {
    lift_impl(fs, companions, &BTreeMap::new())
}

fn lift_impl(
    fs: &[ZPoly],
    companions: &[ZPoly],
    extra: &BTreeMap<u64, u32>,
) -> Result<(Vec<ZPoly>, LiftCertificate)> {
    if fs.is_empty() {
        return Err(Error::InvalidArgument("nothing to lift".into()));
    }
    for f in fs.iter().chain(companions) {
        if !f.is_monic() {
            return Err(Error::InvalidArgument(format!("{f} is not monic")));
        }
    }
    if let Some(f) = fs.iter().find(|f| f.degree() == Some(0)) {
        return Err(Error::InvalidArgument(format!(
            "{f} is constant; Eisenstein lifting needs degree >= 1"
        )));
    }
    let (profile, total_deg) = merged_profile(fs, companions, extra)?;
    let modulus_m: BigInt = profile
        .iter()
        .map(|(&q, &e)| BigInt::from(q).pow(e + 1))
        .product();
    let excluded: Vec<u64> = profile.keys().copied().collect();
    let aux_q = choose_aux_prime(total_deg, &excluded);
    let qb = BigInt::from(aux_q);
    let q2 = &qb * &qb;
    let step = &q2 * &modulus_m;

    let mut offsets = Vec::with_capacity(fs.len());
    let mut lifted = Vec::with_capacity(fs.len());
    let mut constants: Vec<BigInt> = Vec::new();
    for f in fs {
        let deg = f.degree().expect("nonzero");
        let mut g = Vec::with_capacity(deg);
        for k in 0..deg {
            let fk = f.coeff(k);
            let target = if k == 0 {
                // F_0 ≡ Q (mod Q^2): divisible by Q, not by Q^2
                Congruence::new(&qb - &fk, q2.clone())?
            } else {
                Congruence::new(-fk, qb.clone())?
            };
            let sys = if modulus_m.is_one() {
                vec![target]
            } else {
                vec![Congruence::new(0, modulus_m.clone())?, target]
            };
            g.push(crt_solve(&sys)?);
        }
        while constants.contains(&(f.coeff(0) + &g[0])) {
            g[0] += &step;
        }
        constants.push(f.coeff(0) + &g[0]);
        let lifted_f = f + &ZPoly::new(g.clone());
        offsets.push(g);
        lifted.push(lifted_f);
    }

    let cert = LiftCertificate {
        aux_q,
        modulus_m,
        profile,
        offsets,
        originals: fs.to_vec(),
        lifted: lifted.clone(),
        companions: companions.to_vec(),
    };
    Ok((lifted, cert))
}

/// Eisenstein at `q`: `q` divides every non-leading coefficient, `q^2` does
/// not divide the constant term, the leading coefficient is a unit mod `q`.
pub fn is_eisenstein(f: &ZPoly, q: u64) -> bool {
    let Some(deg) = f.degree() else { return false };
    if deg == 0 {
        return false;
    }
    let qb = BigInt::from(q);
    let lead_ok = !f.coeff(deg).is_multiple_of(&qb);
    let lower_ok = (0..deg).all(|k| f.coeff(k).is_multiple_of(&qb));
    lead_ok && lower_ok && !f.coeff(0).is_multiple_of(&(&qb * &qb))
}

struct Sampler(u64);

impl Sampler {
    fn next(&mut self) -> u64 {
        // splitmix64
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// Selection of polynomials for one mixed product: per lifted index
/// 0 = absent, 1 = original, 2 = lifted; per companion present or not.
struct Mix {
    lifted: Vec<u8>,
    companions: Vec<bool>,
}

fn mixes(n_lift: usize, n_comp: usize) -> Box<dyn Iterator<Item = Mix>> {
    let decode = move |mut code: u64| {
        let lifted = (0..n_lift)
            .map(|_| {
                let d = (code % 3) as u8;
                code /= 3;
                d
            })
            .collect();
        let companions = (0..n_comp)
            .map(|_| {
                let b = code % 2 == 1;
                code /= 2;
                b
            })
            .collect();
        Mix { lifted, companions }
    };
    let total = 3u64.pow(n_lift as u32) * 2u64.pow(n_comp as u32);
    if n_lift + n_comp <= EXHAUSTIVE_LIMIT {
        Box::new((0..total).map(decode))
    } else {
        let mut rng = Sampler(0x5EED);
        Box::new((0..SAMPLED_COMBINATIONS).map(move |_| decode(rng.next() % total)))
    }
}

pub fn verify_lift(cert: &LiftCertificate) -> Report {
    let mut rep = Report::new();
    let n = cert.originals.len();
    if cert.lifted.len() != n || cert.offsets.len() != n {
        rep.fail("shape", "originals, lifted and offsets differ in length");
        return rep;
    }

    let mut shape = Vec::new();
    for (i, (f, big_f)) in cert.originals.iter().zip(&cert.lifted).enumerate() {
        if !f.is_monic() || !big_f.is_monic() || f.degree() != big_f.degree() {
            shape.push(format!("#{i}: not monic of the original degree"));
            continue;
        }
        let diff = big_f - f;
        if diff.degree().is_some_and(|d| Some(d) >= f.degree()) {
            shape.push(format!("#{i}: leading coefficient changed"));
        }
        if ZPoly::new(cert.offsets[i].clone()) != diff {
            shape.push(format!("#{i}: offsets do not match lifted - original"));
        }
    }
    if shape.is_empty() {
        rep.pass("shape");
    } else {
        rep.fail("shape", shape.join("; "));
    }

    let joint: Vec<ZPoly> = cert.originals.iter().chain(&cert.companions).cloned().collect();
    match fixdiv_profile(&joint) {
        Ok(recomputed) => {
            let deg = poly_product(&joint).degree().unwrap_or(0) as u64;
            let covers = recomputed
                .iter()
                .all(|(q, e)| cert.profile.get(q).is_some_and(|s| s >= e));
            let m: BigInt = cert
                .profile
                .iter()
                .map(|(&q, &e)| BigInt::from(q).pow(e + 1))
                .product();
            let mut problems = Vec::new();
            if !covers {
                problems.push("profile misses a prime or exponent of the joint product".to_string());
            }
            if m != cert.modulus_m {
                problems.push(format!("M = {} but profile gives {m}", cert.modulus_m));
            }
            if !is_prime_u64(cert.aux_q) || cert.aux_q <= deg || cert.profile.contains_key(&cert.aux_q)
            {
                problems.push(format!(
                    "auxiliary prime {} must be a prime above the total degree {deg}",
                    cert.aux_q
                ));
            }
            if problems.is_empty() {
                rep.pass("modulus");
            } else {
                rep.fail("modulus", problems.join("; "));
            }
        }
        Err(e) => rep.fail("modulus", e.to_string()),
    }

    let bad_offsets: Vec<String> = cert
        .offsets
        .iter()
        .enumerate()
        .flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, g)| !g.is_multiple_of(&cert.modulus_m))
                .map(move |(k, _)| format!("g[{i}][{k}]"))
        })
        .collect();
    if bad_offsets.is_empty() {
        rep.pass("congruence");
    } else {
        rep.fail("congruence", format!("not ≡ 0 mod M: {}", bad_offsets.join(", ")));
    }

    let not_eis: Vec<String> = cert
        .lifted
        .iter()
        .enumerate()
        .filter(|(_, f)| !is_eisenstein(f, cert.aux_q))
        .map(|(i, f)| format!("#{i} {f}"))
        .collect();
    if not_eis.is_empty() {
        rep.pass("eisenstein");
    } else {
        rep.fail(
            "eisenstein",
            format!("not Eisenstein at {}: {}", cert.aux_q, not_eis.join(", ")),
        );
    }

    let mut distinct = true;
    for i in 0..n {
        for j in i + 1..n {
            if cert.lifted[i] == cert.lifted[j] || cert.lifted[i].coeff(0) == cert.lifted[j].coeff(0) {
                distinct = false;
            }
        }
    }
    if distinct {
        rep.pass("distinct");
    } else {
        rep.fail("distinct", "lifted polynomials share a constant term");
    }

    rep.checks.extend(preservation_report(cert).checks);
    rep
}

fn preservation_report(cert: &LiftCertificate) -> Report {
    let mut rep = Report::new();
    let n = cert.originals.len();
    let mut checked = 0usize;
    let mut failures = Vec::new();
    for mix in mixes(n, cert.companions.len()) {
        let mut mixed: Vec<&ZPoly> = Vec::new();
        let mut reference: Vec<&ZPoly> = Vec::new();
        for (i, &d) in mix.lifted.iter().enumerate() {
            match d {
                1 => {
                    mixed.push(&cert.originals[i]);
                    reference.push(&cert.originals[i]);
                }
                2 => {
                    mixed.push(&cert.lifted[i]);
                    reference.push(&cert.originals[i]);
                }
                _ => {}
            }
        }
        for (c, &on) in cert.companions.iter().zip(&mix.companions) {
            if on {
                mixed.push(c);
                reference.push(c);
            }
        }
        let lhs = fixed_divisor(&poly_product(mixed.iter().copied()));
        let rhs = fixed_divisor(&poly_product(reference.iter().copied()));
        checked += 1;
        match (lhs, rhs) {
            (Ok(a), Ok(b)) if a == b => {}
            (a, b) => {
                if failures.len() < 5 {
                    failures.push(format!("lifted={:?} companions={:?}: {a:?} vs {b:?}", mix.lifted, mix.companions));
                }
            }
        }
    }
    if failures.is_empty() {
        rep.record("fixdiv-preservation", true, format!("{checked} mixed products"));
    } else {
        rep.fail("fixdiv-preservation", failures.join("; "));
    }
    rep
}
