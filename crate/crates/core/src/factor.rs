//! Factorizations into irreducibles of `f = (∏_{i∈I} f_i) / c` in Int(Z),
//! where the `f_i` are fixed Q-irreducible monic polynomials and
//! `d(∏ f_i) = c`.
//!
//! Every factor of such an `f` has the form `(∏_{i∈J} f_i) / d` with `d | c`
//! (the constants of the factors have non-positive valuation everywhere and
//! multiply to `1/c`), so a factorization is a set partition of `I` together
//! with a splitting of `c`. Two routes enumerate them:
//!
//! * [`enumerate_factorizations`]: when some part is indispensable for every
//!   prime of `c` (or the primes are linked by shared indispensable parts),
//!   the factorizations are exactly `(c, Λ ∪ J_1)` plus singletons, over all
//!   minimal `J_1` with `d(∏_{Λ ∪ J_1} f_i) = c`.
//! * [`enumerate_factorizations_bruteforce`]: all set partitions and all
//!   divisor assignments, keeping those whose blocks are integer-valued and
//!   irreducible.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, divisors};
use crate::error::{Error, Result};
use crate::json;
use crate::poly::{fixed_divisor, poly_product, ZPoly};

/// Largest index set accepted by the brute-force oracle.
pub const BRUTE_FORCE_MAX_PARTS: usize = 12;
/// Largest number of divisors of `c` accepted by the brute-force oracle.
pub const BRUTE_FORCE_MAX_DIVISORS: usize = 256;
/// Largest index set accepted by the lemma route (subset bitmasks).
pub const MAX_PARTS: usize = 63;

/// `(∏ parts) / c` with `d(∏ parts) = c >= 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredInput {
    parts: Vec<ZPoly>,
    c: BigInt,
    c_factors: Vec<(u64, u32)>,
}

impl FactoredInput {
    /// Parts must be monic of degree >= 1; their Q-irreducibility is the
    /// caller's responsibility (e.g. an Eisenstein certificate).
    pub fn new(parts: Vec<ZPoly>, c: BigInt) -> Result<Self> {
        if c < BigInt::from(2) {
            return Err(Error::InvalidArgument(format!(
                "denominator c must be >= 2, got {c}"
            )));
        }
        if parts.is_empty() || parts.len() > MAX_PARTS {
            return Err(Error::InvalidArgument(format!(
                "need between 1 and {MAX_PARTS} parts, got {}",
                parts.len()
            )));
        }
        if let Some(f) = parts.iter().find(|f| !f.is_monic() || f.degree() == Some(0)) {
            return Err(Error::InvalidArgument(format!(
                "part {f} is not monic of degree >= 1"
            )));
        }
        let d = fixed_divisor(&poly_product(&parts))?;
        if d != c {
            return Err(Error::InvalidArgument(format!(
                "fixed divisor of the product is {d}, not c = {c}"
            )));
        }
        let c_factors = arith::factor_small(&c)?;
        Ok(FactoredInput { parts, c, c_factors })
    }

    pub fn parts(&self) -> &[ZPoly] {
        &self.parts
    }

    pub fn c(&self) -> &BigInt {
        &self.c
    }

    pub fn primes(&self) -> Vec<u64> {
        self.c_factors.iter().map(|x| x.0).collect()
    }

    fn full_mask(&self) -> u64 {
        (1u64 << self.parts.len()) - 1
    }

    /// Index of the first part equal to part `i`.
    fn class_of(&self, i: usize) -> usize {
        self.parts.iter().position(|f| f == &self.parts[i]).unwrap_or(i)
    }
}

/// One factor `(∏_{i∈indices} f_i) / den`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Block {
    #[serde(with = "json::big")]
    pub den: BigInt,
    pub indices: Vec<usize>,
}

/// An essentially-different factorization: blocks sorted canonically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Factorization {
    pub blocks: Vec<Block>,
}

impl Factorization {
    pub fn new(mut blocks: Vec<Block>) -> Self {
        for b in &mut blocks {
            b.indices.sort_unstable();
        }
        blocks.sort();
        Factorization { blocks }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, b) in self.blocks.iter().enumerate() {
            if n > 0 {
                write!(f, " · ")?;
            }
            let idx: Vec<String> = b.indices.iter().map(|i| format!("f{i}")).collect();
            if b.den.is_one() {
                write!(f, "{}", idx.join("·"))?;
            } else {
                write!(f, "({})/{}", idx.join("·"), b.den)?;
            }
        }
        Ok(())
    }
}

fn mask_of(indices: &[usize]) -> u64 {
    indices.iter().fold(0, |m, &i| m | (1 << i))
}

fn indices_of(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

/// Per-call memo of subset fixed divisors and block irreducibility.
struct Engine<'a> {
    input: &'a FactoredInput,
    fixdiv: HashMap<u64, BigInt>,
    irreducible: HashMap<(u64, BigInt), bool>,
}

impl<'a> Engine<'a> {
    fn new(input: &'a FactoredInput) -> Self {
        Engine {
            input,
            fixdiv: HashMap::new(),
            irreducible: HashMap::new(),
        }
    }

    fn fixdiv(&mut self, mask: u64) -> BigInt {
        if let Some(d) = self.fixdiv.get(&mask) {
            return d.clone();
        }
        let prod = poly_product(indices_of(mask).into_iter().map(|i| &self.input.parts[i]));
        let d = fixed_divisor(&prod).expect("product of monic parts is nonzero");
        self.fixdiv.insert(mask, d.clone());
        d
    }

    fn integer_valued(&mut self, den: &BigInt, mask: u64) -> bool {
        self.fixdiv(mask).is_multiple_of(den)
    }

    fn is_irreducible(&mut self, den: &BigInt, mask: u64) -> bool {
        if mask == 0 {
            return false;
        }
        let key = (mask, den.clone());
        if let Some(&v) = self.irreducible.get(&key) {
            return v;
        }
        let d = self.fixdiv(mask);
        let v = if d != *den {
            // an integer constant d/den > 1 splits off (or not integer-valued)
            false
        } else {
            !self.has_split(den, mask)
        };
        self.irreducible.insert(key, v);
        v
    }

    /// Is there `den = d1·d2`, `mask = a ⊎ b` with both halves non-empty and
    /// integer-valued?
    fn has_split(&mut self, den: &BigInt, mask: u64) -> bool {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        let divs = divisors(den).expect("small denominator");
        // a ranges over proper submasks containing the lowest index
        let mut sub = rest;
        loop {
            let a = sub | low;
            if a != mask {
                let b = mask ^ a;
                for d1 in &divs {
                    let d2 = den / d1;
                    if self.integer_valued(d1, a) && self.integer_valued(&d2, b) {
                        return true;
                    }
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        false
    }

    fn valuation(&mut self, mask: u64, p: u64) -> u32 {
        let d = self.fixdiv(mask);
        arith::padic_val(&d, p).expect("fixed divisor of monic product is nonzero")
    }
}

/// Some `z` with `v_P(f_i(z)) > 0` and `v_P(f_j(z)) = 0` for all `j != i`.
///
/// Positivity of `v_P(f(z))` depends only on `z mod P`, so scanning one
/// period is complete; the representative is moved by multiples of `P`
/// until `f_i(z) != 0`, making the valuation finite.
pub fn find_indispensable_witness(input: &FactoredInput, i: usize, p: u64) -> Option<BigInt> {
    let pb = BigInt::from(p);
    let parts = &input.parts;
    let target = parts.get(i)?;
    for z in 0..p {
        let z = BigInt::from(z);
        if !target.eval(&z).is_multiple_of(&pb) {
            continue;
        }
        let alone = parts
            .iter()
            .enumerate()
            .all(|(j, f)| j == i || !f.eval(&z).is_multiple_of(&pb));
        if !alone {
            continue;
        }
        let mut rep = z;
        while target.eval(&rep).is_zero() {
            rep += &pb;
        }
        return Some(rep);
    }
    None
}

/// For each prime `P | c`, every part indispensable for `P` with a witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndispensableMap {
    pub by_prime: BTreeMap<u64, Vec<Witness>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub index: usize,
    #[serde(with = "json::big")]
    pub z: BigInt,
}

impl IndispensableMap {
    pub fn lambda(&self, p: u64) -> BTreeSet<usize> {
        self.by_prime
            .get(&p)
            .map(|ws| ws.iter().map(|w| w.index).collect())
            .unwrap_or_default()
    }

    fn lambda_mask(&self, p: u64) -> u64 {
        self.lambda(p).into_iter().fold(0, |m, i| m | 1 << i)
    }
}

pub fn indispensable_map(input: &FactoredInput) -> IndispensableMap {
    let by_prime = input
        .primes()
        .into_iter()
        .map(|p| {
            let ws = (0..input.parts.len())
                .filter_map(|i| {
                    find_indispensable_witness(input, i, p).map(|z| Witness { index: i, z })
                })
                .collect();
            (p, ws)
        })
        .collect();
    IndispensableMap { by_prime }
}

/// Which form of the indispensability hypothesis an input satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hypothesis {
    /// Some part is indispensable for every prime of `c`.
    CommonPart,
    /// The graph on primes of `c`, joined when a part is indispensable for
    /// both, is connected (but no part serves all primes).
    ConnectedGraph,
    Unsatisfied,
}

pub fn hypothesis(input: &FactoredInput, map: &IndispensableMap) -> Hypothesis {
    let primes = input.primes();
    let common = primes
        .iter()
        .fold(input.full_mask(), |acc, &p| acc & map.lambda_mask(p));
    if common != 0 {
        return Hypothesis::CommonPart;
    }
    // union-find over primes
    let mut parent: Vec<usize> = (0..primes.len()).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for a in 0..primes.len() {
        for b in a + 1..primes.len() {
            if map.lambda_mask(primes[a]) & map.lambda_mask(primes[b]) != 0 {
                let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    let r0 = root(&mut parent, 0);
    if (0..primes.len()).all(|x| root(&mut parent, x) == r0)
        && primes.iter().all(|&p| map.lambda_mask(p) != 0)
    {
        Hypothesis::ConnectedGraph
    } else {
        Hypothesis::Unsatisfied
    }
}

/// Canonical key for essential sameness: blocks compared through the
/// multiset of polynomials they contain.
fn sameness_key(input: &FactoredInput, f: &Factorization) -> Vec<(BigInt, Vec<usize>)> {
    let mut key: Vec<(BigInt, Vec<usize>)> = f
        .blocks
        .iter()
        .map(|b| {
            let mut cls: Vec<usize> = b.indices.iter().map(|&i| input.class_of(i)).collect();
            cls.sort_unstable();
            (b.den.clone(), cls)
        })
        .collect();
    key.sort();
    key
}

fn dedup(input: &FactoredInput, fs: Vec<Factorization>) -> Vec<Factorization> {
    let mut seen = BTreeSet::new();
    let mut out: Vec<Factorization> = fs
        .into_iter()
        .filter(|f| seen.insert(sameness_key(input, f)))
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// All essentially different factorizations via minimal completions of the
/// indispensable set. Fails when the hypothesis does not hold.
pub fn enumerate_factorizations(input: &FactoredInput) -> Result<Vec<Factorization>> {
    let map = indispensable_map(input);
    if hypothesis(input, &map) == Hypothesis::Unsatisfied {
        return Err(Error::HypothesisNotSatisfied);
    }
    let mut engine = Engine::new(input);
    let lambda = input
        .primes()
        .iter()
        .fold(0u64, |acc, &p| acc | map.lambda_mask(p));
    let rest = input.full_mask() & !lambda;
    let rest_idx = indices_of(rest);

    // minimal J_1 ⊆ rest by increasing size; supersets of found ones skipped
    let mut subsets: Vec<u64> = Vec::new();
    let mut sub = rest;
    loop {
        subsets.push(sub);
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & rest;
    }
    subsets.sort_by_key(|m| (m.count_ones(), *m));
    let mut minimal: Vec<u64> = Vec::new();
    for j1 in subsets {
        if minimal.iter().any(|&m| m & !j1 == 0) {
            continue;
        }
        if engine.fixdiv(lambda | j1) == input.c {
            minimal.push(j1);
        }
    }

    let out = minimal
        .into_iter()
        .map(|j1| {
            let mut blocks = vec![Block {
                den: input.c.clone(),
                indices: indices_of(lambda | j1),
            }];
            blocks.extend(
                rest_idx
                    .iter()
                    .filter(|&&j| j1 >> j & 1 == 0)
                    .map(|&j| Block {
                        den: BigInt::one(),
                        indices: vec![j],
                    }),
            );
            Factorization::new(blocks)
        })
        .collect();
    Ok(dedup(input, out))
}

/// All essentially different factorizations by exhaustive search over set
/// partitions of the index set and splittings of `c`. Limited to
/// [`BRUTE_FORCE_MAX_PARTS`] parts and [`BRUTE_FORCE_MAX_DIVISORS`] divisors.
pub fn enumerate_factorizations_bruteforce(input: &FactoredInput) -> Result<Vec<Factorization>> {
    let n = input.parts.len();
    if n > BRUTE_FORCE_MAX_PARTS {
        return Err(Error::TooLarge(format!(
            "{n} parts exceed the brute-force limit of {BRUTE_FORCE_MAX_PARTS}"
        )));
    }
    let divs = divisors(&input.c)?;
    if divs.len() > BRUTE_FORCE_MAX_DIVISORS {
        return Err(Error::TooLarge(format!(
            "c = {} has {} divisors, limit {BRUTE_FORCE_MAX_DIVISORS}",
            input.c,
            divs.len()
        )));
    }
    let mut engine = Engine::new(input);
    let mut found = Vec::new();
    let mut stack = Vec::new();
    search(&mut engine, &divs, input.full_mask(), &input.c, &mut stack, &mut found);
    Ok(dedup(input, found))
}

fn search(
    engine: &mut Engine<'_>,
    divs: &[BigInt],
    remaining: u64,
    c_left: &BigInt,
    stack: &mut Vec<Block>,
    found: &mut Vec<Factorization>,
) {
    if remaining == 0 {
        if c_left.is_one() {
            found.push(Factorization::new(stack.clone()));
        }
        return;
    }
    let low = remaining & remaining.wrapping_neg();
    let rest = remaining ^ low;
    let mut sub = rest;
    loop {
        let block = sub | low;
        for d in divs.iter().filter(|d| c_left.is_multiple_of(d)) {
            if engine.integer_valued(d, block) && engine.is_irreducible(d, block) {
                stack.push(Block {
                    den: d.clone(),
                    indices: indices_of(block),
                });
                search(engine, divs, remaining ^ block, &(c_left / d), stack, found);
                stack.pop();
            }
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & rest;
    }
}

/// Is `(∏_{i∈J} f_i) / den` irreducible in Int(Z)?
///
/// It is reducible when an integer constant `d(∏_J f_i) / den > 1` splits
/// off, or when `den = d'·d''` and `J = J' ⊎ J''` (both non-empty) give two
/// integer-valued factors.
pub fn is_irreducible_block(den: &BigInt, indices: &[usize], input: &FactoredInput) -> Result<bool> {
    if indices.is_empty() {
        return Err(Error::InvalidArgument("block index set must be non-empty".into()));
    }
    if indices.iter().any(|&i| i >= input.parts.len()) {
        return Err(Error::InvalidArgument("block index out of range".into()));
    }
    if !den.is_positive() {
        return Err(Error::InvalidArgument("block denominator must be positive".into()));
    }
    let mut engine = Engine::new(input);
    let mask = mask_of(indices);
    if !engine.integer_valued(den, mask) {
        return Err(Error::NotIntegerValued);
    }
    Ok(engine.is_irreducible(den, mask))
}

/// Sorted distinct factorization lengths.
pub fn lengths_set(factorizations: &[Factorization]) -> Vec<usize> {
    let set: BTreeSet<usize> = factorizations.iter().map(Factorization::len).collect();
    set.into_iter().collect()
}

/// Sorted lengths with repetition, one per factorization.
pub fn lengths_multiset(factorizations: &[Factorization]) -> Vec<usize> {
    let mut v: Vec<usize> = factorizations.iter().map(Factorization::len).collect();
    v.sort_unstable();
    v
}

/// Checks that the blocks partition the index set with denominators
/// multiplying to `c`. Each block must be an irreducible element of Int(Z).
pub fn check_factorization(input: &FactoredInput, f: &Factorization) -> std::result::Result<(), String> {
    let mut engine = Engine::new(input);
    let mut seen = 0u64;
    let mut prod = BigInt::one();
    for b in &f.blocks {
        if b.indices.is_empty() {
            return Err("block with no polynomial part".into());
        }
        if b.indices.iter().any(|&i| i >= input.parts.len()) {
            return Err("index out of range".into());
        }
        let m = mask_of(&b.indices);
        if m.count_ones() as usize != b.indices.len() || seen & m != 0 {
            return Err("blocks overlap".into());
        }
        seen |= m;
        prod *= &b.den;
        if !b.den.is_positive() || !engine.integer_valued(&b.den, m) {
            return Err(format!("block {:?}/{} is not integer-valued", b.indices, b.den));
        }
        if !engine.is_irreducible(&b.den, m) {
            return Err(format!("block {:?}/{} is reducible", b.indices, b.den));
        }
    }
    if seen != input.full_mask() {
        return Err("blocks do not cover the index set".into());
    }
    if prod != input.c {
        return Err(format!("denominators multiply to {prod}, not {}", input.c));
    }
    Ok(())
}

/// Same set of essentially different factorizations?
pub fn same_factorizations(input: &FactoredInput, a: &[Factorization], b: &[Factorization]) -> bool {
    let ka: BTreeSet<_> = a.iter().map(|f| sameness_key(input, f)).collect();
    let kb: BTreeSet<_> = b.iter().map(|f| sameness_key(input, f)).collect();
    ka.len() == a.len() && kb.len() == b.len() && ka == kb
}

/// `v_P(d(∏_{i∈indices} f_i))`, exposed for property checks.
pub fn block_valuation(input: &FactoredInput, indices: &[usize], p: u64) -> u32 {
    Engine::new(input).valuation(mask_of(indices), p)
}
