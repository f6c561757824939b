//! Witnesses `x·H = G·(x - a_1)⋯(x - a_n)` with `x`, `H`, `G` and all
//! `x - a_i` irreducible in Int(Z): the product of the fixed irreducible `x`
//! with an irreducible `H` has factorizations of lengths 2 and `n + 1`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, crt_solve, is_prime_u64, Congruence};
use crate::error::{Error, Result};
use crate::factor::{
    enumerate_factorizations, find_indispensable_witness, lengths_set, FactoredInput,
    Factorization,
};
use crate::json;
use crate::lift::{is_eisenstein, lift_jointly, verify_lift, LiftCertificate};
use crate::poly::{fixed_divisor, poly_product, RationalPoly, ZPoly};
use crate::report::Report;

use super::prescribed::compare_with_routes;
use super::ARTIFACT_VERSION;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransferOptions {
    /// The primes `p_1..p_n`; defaults to the first `n` odd primes.
    pub primes: Option<Vec<u64>>,
    /// Extra factors `q^e` of `c` (the set `𝓟_1`).
    pub c_extra: Vec<(u64, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferArtifact {
    pub version: u32,
    pub n: u32,
    pub primes: Vec<u64>,
    /// `(q, e)` for the extra prime powers in `c`.
    pub extra_factors: Vec<(u64, u32)>,
    #[serde(with = "json::big")]
    pub c: BigInt,
    #[serde(rename = "N")]
    pub n_r: u64,
    /// `R`, with `r_0` first; `B = R \ {r_0}`.
    #[serde(rename = "R", with = "json::big_vec")]
    pub r: Vec<BigInt>,
    #[serde(with = "json::big_vec")]
    pub a: Vec<BigInt>,
    /// Primes `<= N + n` outside the primes of `c`; everything vanishes there.
    pub avoided_primes: Vec<u64>,
    pub f: ZPoly,
    #[serde(rename = "F")]
    pub big_f: ZPoly,
    pub lift: LiftCertificate,
    #[serde(rename = "H")]
    pub h: RationalPoly,
    #[serde(rename = "G")]
    pub g: RationalPoly,
    /// Factorizations of `x·H` over the parts `[x, F, x - a_1, .., x - a_n]`.
    #[serde(rename = "xH_factorizations")]
    pub xh_factorizations: Vec<Factorization>,
    #[serde(rename = "xH_lengths")]
    pub xh_lengths: Vec<usize>,
}

impl TransferArtifact {
    pub fn linear_factors(&self) -> Vec<ZPoly> {
        self.a.iter().map(ZPoly::linear).collect()
    }

    /// `[x, F, x - a_1, .., x - a_n]`.
    pub fn xh_parts(&self) -> Vec<ZPoly> {
        let mut parts = vec![ZPoly::x(), self.big_f.clone()];
        parts.extend(self.linear_factors());
        parts
    }
}

fn first_odd_primes(n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut q = 2;
    while out.len() < n {
        q = arith::next_prime_excluding(q, &[2]);
        out.push(q);
    }
    out
}

fn residue(v: &BigInt, m: u64) -> u64 {
    v.mod_floor(&BigInt::from(m)).to_u64().expect("residue fits")
}

pub fn construct_transfer(n: u32, opts: &TransferOptions) -> Result<TransferArtifact> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let primes = match &opts.primes {
        Some(ps) => {
            if ps.len() != n as usize {
                return Err(Error::InvalidArgument(format!(
                    "{} primes given for n = {n}",
                    ps.len()
                )));
            }
            if ps.contains(&2) {
                return Err(Error::InvalidArgument(
                    "none of the primes may be 2 (index 2 is excluded)".into(),
                ));
            }
            if let Some(&p) = ps.iter().find(|&&p| !is_prime_u64(p)) {
                return Err(Error::NotPrime(p));
            }
            if ps.iter().collect::<BTreeSet<_>>().len() != ps.len() {
                return Err(Error::InvalidArgument("primes must be distinct".into()));
            }
            ps.clone()
        }
        None => first_odd_primes(n as usize),
    };
    let mut extra = opts.c_extra.clone();
    extra.sort_unstable();
    for (idx, &(q, e)) in extra.iter().enumerate() {
        if q == 2 || !is_prime_u64(q) || primes.contains(&q) || e == 0 {
            return Err(Error::InvalidArgument(format!(
                "extra factor {q}^{e} must be an odd prime power outside p_1..p_n"
            )));
        }
        if idx > 0 && extra[idx - 1].0 == q {
            return Err(Error::InvalidArgument(format!("factor {q} listed twice")));
        }
    }

    let c = primes.iter().fold(BigInt::one(), |acc, &p| acc * p)
        * extra
            .iter()
            .fold(BigInt::one(), |acc, &(q, e)| acc * BigInt::from(q).pow(e));
    let n_r = primes
        .iter()
        .copied()
        .chain(extra.iter().map(|&(q, e)| q * e as u64))
        .max()
        .expect("n >= 1");
    let mut special = primes.clone();
    special.extend(extra.iter().map(|x| x.0));
    let avoided = arith::primes_in_range(2, n_r + n as u64, &special);

    let mut global = BigInt::one();
    for &p in &primes {
        global *= p;
    }
    for &(q, _) in &extra {
        global *= q * q;
    }
    for &q in &avoided {
        global *= q;
    }
    let solve = |by_p: &dyn Fn(u64) -> u64, by_q: &dyn Fn(u64, u32) -> u64| -> Result<BigInt> {
        let mut sys = Vec::new();
        for &p in &primes {
            sys.push(Congruence::new(by_p(p), p)?);
        }
        for &(q, e) in &extra {
            sys.push(Congruence::new(by_q(q, e), q * q)?);
        }
        for &q in &avoided {
            sys.push(Congruence::new(0, q)?);
        }
        crt_solve(&sys)
    };

    // element j of R: j mod p_i while j < p_i, else 1; r_0 = element 0
    let mut r = Vec::with_capacity(n_r as usize);
    for j in 0..n_r {
        let by_p = |p: u64| if j < p { j } else { 1 };
        let by_q = |q: u64, e: u32| if j < q * e as u64 { j % q } else { 1 };
        r.push(solve(&by_p, &by_q)?);
    }
    distinct_by_shift(&mut r, &global, &[]);

    let mut a = Vec::with_capacity(n as usize);
    for (i, &pi) in primes.iter().enumerate() {
        let by_p = |p: u64| if p == pi { 0 } else { 1 };
        let last = i + 1 == n as usize;
        let by_q = |_: u64, _: u32| if last { 0 } else { 1 };
        a.push(solve(&by_p, &by_q)?);
    }
    // x - a_i must differ from x and from each other
    distinct_by_shift(&mut a, &global, &[BigInt::zero()]);

    let f = ZPoly::from_roots(&r[1..]);
    let mut companions = vec![ZPoly::x()];
    companions.extend(a.iter().map(ZPoly::linear));
    let (lifted, lift_cert) = lift_jointly(std::slice::from_ref(&f), &companions)?;
    let big_f = lifted.into_iter().next().expect("one lifted polynomial");

    let linear: Vec<ZPoly> = a.iter().map(ZPoly::linear).collect();
    let h_num = &big_f * &poly_product(&linear);
    let g_num = &ZPoly::x() * &big_f;
    for (name, num) in [("F·∏(x-a_i)", &h_num), ("x·F", &g_num)] {
        let d = fixed_divisor(num)?;
        if d != c {
            return Err(Error::Invariant(format!("d({name}) = {d}, expected {c}")));
        }
    }
    let h = RationalPoly::new(h_num, c.clone())?;
    let g = RationalPoly::new(g_num, c.clone())?;

    let mut xh_parts = vec![ZPoly::x(), big_f.clone()];
    xh_parts.extend(linear.iter().cloned());
    let xh_input = FactoredInput::new(xh_parts, c.clone())?;
    let xh_factorizations = enumerate_factorizations(&xh_input)?;
    let xh_lengths = lengths_set(&xh_factorizations);

    let artifact = TransferArtifact {
        version: ARTIFACT_VERSION,
        n,
        primes,
        extra_factors: extra,
        c,
        n_r,
        r,
        a,
        avoided_primes: avoided,
        f,
        big_f,
        lift: lift_cert,
        h,
        g,
        xh_factorizations,
        xh_lengths,
    };
    let rep = verify_transfer(&artifact);
    if !rep.all_passed() {
        let failed: Vec<String> = rep.failures().map(|c| c.name.clone()).collect();
        return Err(Error::Invariant(format!(
            "transfer artifact failed checks: {}",
            failed.join(", ")
        )));
    }
    Ok(artifact)
}

/// Make `values` pairwise distinct and distinct from `forbidden` by adding
/// multiples of `step`, in index order.
fn distinct_by_shift(values: &mut [BigInt], step: &BigInt, forbidden: &[BigInt]) {
    let mut seen: BTreeSet<BigInt> = forbidden.iter().cloned().collect();
    for v in values.iter_mut() {
        while seen.contains(v) {
            *v += step;
        }
        seen.insert(v.clone());
    }
}

/// Is `parts[idx]` indispensable for every prime in `primes`?
fn indispensable_for_all(input: &FactoredInput, idx: usize, primes: &[u64]) -> Vec<u64> {
    primes
        .iter()
        .copied()
        .filter(|&p| find_indispensable_witness(input, idx, p).is_none())
        .collect()
}

/// True iff `(∏ parts)/c` has exactly one factorization, of length 1.
fn single_irreducible(input: &FactoredInput) -> std::result::Result<(), String> {
    let fs = enumerate_factorizations(input).map_err(|e| e.to_string())?;
    match fs.as_slice() {
        [only] if only.len() == 1 => Ok(()),
        _ => Err(format!(
            "{} factorizations with lengths {:?}",
            fs.len(),
            lengths_set(&fs)
        )),
    }
}

pub fn verify_transfer(t: &TransferArtifact) -> Report {
    let mut rep = Report::new();
    if t.version != ARTIFACT_VERSION {
        rep.fail("version", format!("unsupported version {}", t.version));
        return rep;
    }
    let n = t.n as usize;

    // parameters
    let mut problems = Vec::new();
    if t.primes.len() != n || t.a.len() != n {
        problems.push(format!("expected {n} primes and {n} values a_i"));
    }
    if t.primes.iter().any(|&p| p == 2 || !is_prime_u64(p)) {
        problems.push("p_i must be odd primes".into());
    }
    if t.primes.iter().collect::<BTreeSet<_>>().len() != t.primes.len() {
        problems.push("p_i must be distinct".into());
    }
    let c_expected = t.primes.iter().fold(BigInt::one(), |acc, &p| acc * p)
        * t.extra_factors
            .iter()
            .fold(BigInt::one(), |acc, &(q, e)| acc * BigInt::from(q).pow(e));
    if t.c != c_expected {
        problems.push(format!("c = {} but the primes give {c_expected}", t.c));
    }
    let n_expected = t
        .primes
        .iter()
        .copied()
        .chain(t.extra_factors.iter().map(|&(q, e)| q * e as u64))
        .max()
        .unwrap_or(0);
    if t.n_r != n_expected || t.r.len() as u64 != t.n_r {
        problems.push(format!("|R| = {} and N = {} but expected {n_expected}", t.r.len(), t.n_r));
    }
    let mut special = t.primes.clone();
    special.extend(t.extra_factors.iter().map(|x| x.0));
    let p2 = arith::primes_in_range(2, t.n_r + n as u64, &special);
    if t.avoided_primes != p2 {
        problems.push("avoided primes are not all primes <= N + n outside c".into());
    }
    if problems.is_empty() {
        rep.pass("params");
    } else {
        rep.fail("params", problems.join("; "));
        return rep;
    }

    // conditions on R
    let r0 = &t.r[0];
    let b = &t.r[1..];
    let mut rc = Vec::new();
    for &p in &t.primes {
        if residue(r0, p) != 0 {
            rc.push(format!("(1) r_0 not in {p}"));
        }
        if let Some(v) = b.iter().find(|v| residue(v, p) == 0) {
            rc.push(format!("(2) {v} ≡ 0 mod {p}"));
        }
        let classes: BTreeSet<u64> = t.r.iter().map(|v| residue(v, p)).collect();
        if classes.len() as u64 != p {
            rc.push(format!("(3) R is not complete mod {p}"));
        }
    }
    for &(q, e) in &t.extra_factors {
        let q2 = q * q;
        if residue(r0, q2) != 0 {
            rc.push(format!("(1) r_0 not in {q}^2"));
        }
        for cls in 0..q {
            let mut lifts: BTreeMap<u64, u32> = BTreeMap::new();
            for v in t.r.iter().filter(|v| residue(v, q) == cls) {
                *lifts.entry(residue(v, q2)).or_default() += 1;
            }
            if lifts.values().copied().max().unwrap_or(0) < e {
                rc.push(format!("(4) class {cls} mod {q} lacks {e} representatives agreeing mod {q2}"));
            }
        }
        let in_q = t.r.iter().filter(|v| residue(v, q) == 0).count();
        if in_q > e as usize {
            rc.push(format!("(5) {in_q} elements of R in {q}"));
        }
    }
    for &q in &t.avoided_primes {
        if let Some(v) = t.r.iter().find(|v| residue(v, q) != 0) {
            rc.push(format!("(6) {v} not ≡ 0 mod {q}"));
        }
    }
    if t.r.iter().collect::<BTreeSet<_>>().len() != t.r.len() {
        rc.push("R has repeated elements".into());
    }
    if rc.is_empty() {
        rep.pass("R-conditions");
    } else {
        rep.fail("R-conditions", rc.join("; "));
    }

    // conditions on a_i
    let mut ac = Vec::new();
    for (i, ai) in t.a.iter().enumerate() {
        for (j, &p) in t.primes.iter().enumerate() {
            let want = if i == j { 0 } else { 1 };
            if residue(ai, p) != want {
                ac.push(format!("a_{} ≢ {want} mod {p}", i + 1));
            }
        }
        for &(q, _) in &t.extra_factors {
            let ok = if i + 1 == n {
                residue(ai, q * q) == 0
            } else {
                residue(ai, q) == 1
            };
            if !ok {
                ac.push(format!("a_{} violates the condition at {q}", i + 1));
            }
        }
        for &q in &t.avoided_primes {
            if residue(ai, q) != 0 {
                ac.push(format!("a_{} ≢ 0 mod {q}", i + 1));
            }
        }
    }
    if ac.is_empty() {
        rep.pass("a-conditions");
    } else {
        rep.fail("a-conditions", ac.join("; "));
    }

    // f, F and the lift
    if t.f == ZPoly::from_roots(b) {
        rep.pass("f");
    } else {
        rep.fail("f", "f is not ∏_{b ∈ B}(x - b)");
    }
    let linear = t.linear_factors();
    let mut companions = vec![ZPoly::x()];
    companions.extend(linear.iter().cloned());
    let lift_matches = t.lift.originals == vec![t.f.clone()]
        && t.lift.lifted == vec![t.big_f.clone()]
        && t.lift.companions == companions;
    if lift_matches {
        rep.pass("lift-inputs");
    } else {
        rep.fail("lift-inputs", "lift certificate does not lift f to F against x and the x - a_i");
    }
    rep.absorb("lift", verify_lift(&t.lift));
    if is_eisenstein(&t.big_f, t.lift.aux_q) {
        rep.pass("F-eisenstein");
    } else {
        rep.fail("F-eisenstein", format!("F is not Eisenstein at {}", t.lift.aux_q));
    }

    // H, G and the identity x·H = G·∏(x - a_i)
    let prod_linear = poly_product(&linear);
    let h_num = &t.big_f * &prod_linear;
    let g_num = &ZPoly::x() * &t.big_f;
    if t.h.num() == &h_num && t.h.den() == &t.c && t.g.num() == &g_num && t.g.den() == &t.c {
        rep.pass("H-G");
    } else {
        rep.fail("H-G", "H or G differs from F·∏(x-a_i)/c resp. x·F/c");
    }
    let x = RationalPoly::from_zpoly(ZPoly::x());
    let lhs = &x * &t.h;
    let rhs = &t.g * &RationalPoly::from_zpoly(prod_linear);
    if lhs == rhs {
        rep.pass("identity");
    } else {
        rep.fail("identity", "x·H != G·∏(x - a_i)");
    }
    for (name, num) in [("fixdiv-H", &h_num), ("fixdiv-G", &g_num)] {
        match fixed_divisor(num) {
            Ok(d) if d == t.c => rep.pass(name),
            Ok(d) => rep.fail(name, format!("fixed divisor {d}, c = {}", t.c)),
            Err(e) => rep.fail(name, e.to_string()),
        }
    }

    // irreducibility of G = xF/c: x indispensable for every p_i, F for
    // every p_i and every extra q
    let extra_primes: Vec<u64> = t.extra_factors.iter().map(|x| x.0).collect();
    match FactoredInput::new(vec![ZPoly::x(), t.big_f.clone()], t.c.clone()) {
        Ok(g_input) => {
            let mut missing = indispensable_for_all(&g_input, 0, &t.primes);
            let all: Vec<u64> = t.primes.iter().chain(&extra_primes).copied().collect();
            missing.extend(indispensable_for_all(&g_input, 1, &all));
            if missing.is_empty() {
                rep.pass("indispensable-G");
            } else {
                rep.fail("indispensable-G", format!("no witness at {missing:?}"));
            }
            match single_irreducible(&g_input) {
                Ok(()) => rep.pass("irreducible-G"),
                Err(e) => rep.fail("irreducible-G", e),
            }
        }
        Err(e) => {
            rep.fail("indispensable-G", e.to_string());
            rep.fail("irreducible-G", e.to_string());
        }
    }

    // irreducibility of H: F and x - a_i indispensable for p_i, F for each q
    let mut h_parts = vec![t.big_f.clone()];
    h_parts.extend(linear.iter().cloned());
    match FactoredInput::new(h_parts, t.c.clone()) {
        Ok(h_input) => {
            let all: Vec<u64> = t.primes.iter().chain(&extra_primes).copied().collect();
            let mut missing = indispensable_for_all(&h_input, 0, &all);
            for (i, &p) in t.primes.iter().enumerate() {
                missing.extend(indispensable_for_all(&h_input, i + 1, &[p]));
            }
            if missing.is_empty() {
                rep.pass("indispensable-H");
            } else {
                rep.fail("indispensable-H", format!("no witness at {missing:?}"));
            }
            match single_irreducible(&h_input) {
                Ok(()) => rep.pass("irreducible-H"),
                Err(e) => rep.fail("irreducible-H", e),
            }
        }
        Err(e) => {
            rep.fail("indispensable-H", e.to_string());
            rep.fail("irreducible-H", e.to_string());
        }
    }

    // monic linear polynomials have fixed divisor 1, hence are irreducible
    let linear_ok = std::iter::once(ZPoly::x())
        .chain(linear.iter().cloned())
        .all(|l| fixed_divisor(&l).is_ok_and(|d| d.is_one()));
    let distinct = std::iter::once(BigInt::zero())
        .chain(t.a.iter().cloned())
        .collect::<BTreeSet<_>>()
        .len()
        == n + 1;
    if linear_ok && distinct {
        rep.pass("irreducible-linear");
    } else {
        rep.fail("irreducible-linear", "x and the x - a_i must be distinct image-primitive linears");
    }

    // factorizations of x·H
    match FactoredInput::new(t.xh_parts(), t.c.clone()) {
        Ok(input) => {
            compare_with_routes(&input, &t.xh_factorizations, &mut rep);
            let lengths = lengths_set(&t.xh_factorizations);
            let mut expected = vec![2, n + 1];
            expected.dedup();
            if lengths == expected && t.xh_lengths == expected {
                rep.pass("xH-lengths");
            } else {
                rep.fail(
                    "xH-lengths",
                    format!("lengths {lengths:?} (recorded {:?}), expected {expected:?}", t.xh_lengths),
                );
            }
        }
        Err(e) => rep.fail("xH-lengths", e.to_string()),
    }
    rep
}
