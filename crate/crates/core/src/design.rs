//! Residue-class designs for the prescribed-lengths construction.
//!
//! A design consists of a prime `p`, a modulus `c = p · ∏ q_i^{e_i}`, and two
//! finite sets of integers: `R`, indexed by the off-diagonal positions
//! `(k,i,h,j)` of an `m × m` block matrix (block sizes `m_1..m_n`), and
//! `S = {s_0, .., s_{σ-1}}`. The residues of these sets modulo `p`, the
//! `q_i` and a list of avoided primes determine the fixed divisors of all
//! products of the split polynomials built from them.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::arith::{self, crt_solve, is_prime_u64, Congruence};
use crate::error::{Error, Result};
use crate::json;
use crate::poly::{fixed_divisor, ZPoly};
use crate::report::Report;

/// Block sizes `m_1 <= .. <= m_n`, each at least 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct LengthSpec {
    ms: Vec<u32>,
}

impl LengthSpec {
    pub fn new(mut ms: Vec<u32>) -> Result<Self> {
        if ms.is_empty() {
            return Err(Error::InvalidArgument("length spec must be non-empty".into()));
        }
        if ms.contains(&0) {
            return Err(Error::InvalidArgument(
                "every m_i must be >= 1 (length 1 cannot be prescribed)".into(),
            ));
        }
        ms.sort_unstable();
        Ok(LengthSpec { ms })
    }

    /// From factorization lengths `k_i >= 2`, i.e. `m_i = k_i - 1`.
    pub fn from_lengths(lengths: &[u32]) -> Result<Self> {
        if let Some(bad) = lengths.iter().find(|&&k| k < 2) {
            return Err(Error::InvalidArgument(format!(
                "factorization length {bad} is not allowed; lengths must be >= 2"
            )));
        }
        Self::new(lengths.iter().map(|k| k - 1).collect())
    }

    pub fn ms(&self) -> &[u32] {
        &self.ms
    }

    pub fn n(&self) -> usize {
        self.ms.len()
    }

    /// `m = Σ m_k`.
    pub fn total(&self) -> u64 {
        self.ms.iter().map(|&m| m as u64).sum()
    }

    /// The prescribed lengths `m_k + 1`, ascending.
    pub fn lengths(&self) -> Vec<u32> {
        self.ms.iter().map(|m| m + 1).collect()
    }

    /// Row/column indices `(k, i)`, 1-based, in block order.
    pub fn index_set(&self) -> Vec<BlockIndex> {
        self.ms
            .iter()
            .enumerate()
            .flat_map(|(k, &mk)| (1..=mk).map(move |i| BlockIndex { k: k as u32 + 1, i }))
            .collect()
    }
}

impl TryFrom<Vec<u32>> for LengthSpec {
    type Error = Error;
    fn try_from(ms: Vec<u32>) -> Result<Self> {
        LengthSpec::new(ms)
    }
}

impl From<LengthSpec> for Vec<u32> {
    fn from(s: LengthSpec) -> Self {
        s.ms
    }
}

/// Row (or column) `(k, i)` of the block matrix: the `i`-th row of block `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockIndex {
    pub k: u32,
    pub i: u32,
}

/// Position `(k,i,h,j)` of an element of `R`: row `(k,i)`, column `(h,j)`, `k != h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RIndex {
    pub row: BlockIndex,
    pub col: BlockIndex,
}

impl fmt::Display for RIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.row.k, self.row.i, self.col.k, self.col.i)
    }
}

impl std::str::FromStr for RIndex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(',')
            .map(|t| t.trim().parse::<u32>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::InvalidArgument(format!("bad R index {s:?}")))?;
        match parts[..] {
            [k, i, h, j] => Ok(RIndex {
                row: BlockIndex { k, i },
                col: BlockIndex { k: h, i: j },
            }),
            _ => Err(Error::InvalidArgument(format!("bad R index {s:?}"))),
        }
    }
}

/// `N = (Σ m)^2 - Σ m^2`, the number of off-diagonal-block positions.
pub fn compute_n(spec: &LengthSpec) -> u64 {
    let m = spec.total();
    m * m - spec.ms.iter().map(|&x| (x as u64) * (x as u64)).sum::<u64>()
}

/// Caller overrides for [`choose_parameters`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DesignOptions {
    /// Use this prime instead of the smallest odd prime above `N + 1`.
    pub prime: Option<u64>,
    /// Extra factors `q^e` of `c`; each `q` an odd prime other than `p`.
    pub c_extra: Vec<(u64, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignParams {
    pub p: u64,
    pub c: BigInt,
    /// `(q_i, e_i)` with `c = p · ∏ q_i^{e_i}`.
    pub extra: Vec<(u64, u32)>,
    pub n_r: u64,
    pub tau: u64,
    pub sigma: u64,
}

pub fn choose_parameters(spec: &LengthSpec, opts: &DesignOptions) -> Result<DesignParams> {
    if spec.n() < 2 {
        return Err(Error::SingleBlock);
    }
    let n_r = compute_n(spec);
    let p = match opts.prime {
        Some(p) => {
            if p == 2 || !is_prime_u64(p) {
                return Err(Error::InvalidArgument(format!("{p} is not an odd prime")));
            }
            if p <= n_r + 1 {
                return Err(Error::InvalidArgument(format!(
                    "prime {p} must exceed N + 1 = {}",
                    n_r + 1
                )));
            }
            p
        }
        None => arith::next_prime_excluding(n_r + 1, &[2]),
    };
    let mut seen = BTreeSet::new();
    for &(q, e) in &opts.c_extra {
        if q == 2 {
            return Err(Error::InvalidArgument(
                "c must be odd: no factor of index 2 allowed".into(),
            ));
        }
        if q == p {
            return Err(Error::InvalidArgument(format!(
                "extra factor {q} coincides with p; v_p(c) must be 1"
            )));
        }
        if !is_prime_u64(q) {
            return Err(Error::NotPrime(q));
        }
        if e == 0 {
            return Err(Error::InvalidArgument(format!("exponent of {q} must be >= 1")));
        }
        if !seen.insert(q) {
            return Err(Error::InvalidArgument(format!("factor {q} listed twice")));
        }
    }
    let mut extra = opts.c_extra.clone();
    extra.sort_unstable();
    let c = extra
        .iter()
        .fold(BigInt::from(p), |acc, &(q, e)| acc * BigInt::from(q).pow(e));
    let tau = p - n_r;
    let sigma = extra
        .iter()
        .map(|&(q, e)| q * e as u64)
        .fold(tau, u64::max);
    Ok(DesignParams {
        p,
        c,
        extra,
        n_r,
        tau,
        sigma,
    })
}

/// Concrete sets `R` and `S` with their parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueDesign {
    pub spec: LengthSpec,
    pub p: u64,
    pub c: BigInt,
    pub extra: Vec<(u64, u32)>,
    pub n_r: u64,
    pub tau: u64,
    pub sigma: u64,
    pub s: Vec<BigInt>,
    /// Elements of `R` in ascending index order.
    pub r: Vec<(RIndex, BigInt)>,
    pub avoided_primes: Vec<u64>,
}

/// All positions `(k,i,h,j)` with `k != h`, in lexicographic order.
pub fn r_indices(spec: &LengthSpec) -> Vec<RIndex> {
    let idx = spec.index_set();
    let mut out = Vec::new();
    for &row in &idx {
        for &col in &idx {
            if row.k != col.k {
                out.push(RIndex { row, col });
            }
        }
    }
    out
}

pub fn build_design(spec: &LengthSpec, params: &DesignParams) -> Result<ResidueDesign> {
    if spec.n() < 2 {
        return Err(Error::SingleBlock);
    }
    let r_idx = r_indices(spec);
    debug_assert_eq!(r_idx.len() as u64, params.n_r);
    let (p, tau, sigma) = (params.p, params.tau, params.sigma);
    let total = params.n_r + sigma;
    let mut special: Vec<u64> = vec![p];
    special.extend(params.extra.iter().map(|&(q, _)| q));
    let avoided = arith::primes_in_range(2, total, &special);

    let p_big = BigInt::from(p);
    let mut global = p_big.clone();
    for &(q, _) in &params.extra {
        global *= BigInt::from(q * q);
    }
    for &a in &avoided {
        global *= BigInt::from(a);
    }

    // Congruences shared by every element: 0 modulo each avoided prime.
    let element = |res_p: u64, q_res: &dyn Fn(u64) -> u64| -> Result<BigInt> {
        let mut sys = vec![Congruence::new(res_p, p)?];
        for &(q, _) in &params.extra {
            sys.push(Congruence::new(q_res(q), q * q)?);
        }
        for &a in &avoided {
            sys.push(Congruence::new(0, a)?);
        }
        crt_solve(&sys)
    };

    let mut s = Vec::with_capacity(sigma as usize);
    for idx in 0..sigma {
        // s_0 ≡ 0, s_1..s_{τ-1} take residues 1..τ-1, the rest ≡ 0 (mod p)
        let res_p = if idx < tau { idx } else { 0 };
        let layout = |q: u64| -> u64 {
            let e = params.extra.iter().find(|x| x.0 == q).map_or(0, |x| x.1) as u64;
            if idx < e * q {
                idx % q
            } else {
                0
            }
        };
        s.push(element(res_p, &layout)?);
    }
    let mut r = Vec::with_capacity(r_idx.len());
    for (pos, ri) in r_idx.into_iter().enumerate() {
        let res_p = tau + pos as u64;
        r.push((ri, element(res_p, &|_| 0)?));
    }

    let mut seen: BTreeSet<BigInt> = BTreeSet::new();
    for v in s.iter_mut().chain(r.iter_mut().map(|(_, v)| v)) {
        while seen.contains(v) {
            *v += &global;
        }
        seen.insert(v.clone());
    }

    Ok(ResidueDesign {
        spec: spec.clone(),
        p,
        c: params.c.clone(),
        extra: params.extra.clone(),
        n_r: params.n_r,
        tau,
        sigma,
        s,
        r,
        avoided_primes: avoided,
    })
}

impl ResidueDesign {
    pub fn r_values(&self) -> impl Iterator<Item = &BigInt> {
        self.r.iter().map(|(_, v)| v)
    }

    pub fn r_value(&self, idx: &RIndex) -> Option<&BigInt> {
        self.r.iter().find(|(i, _)| i == idx).map(|(_, v)| v)
    }

    /// `B[k,i]`: the elements of `R` in row `(k,i)` or column `(k,i)`.
    pub fn block_roots(&self, at: BlockIndex) -> Result<Vec<BigInt>> {
        if !self.spec.index_set().contains(&at) {
            return Err(Error::InvalidArgument(format!(
                "({},{}) is not a valid block index",
                at.k, at.i
            )));
        }
        Ok(self
            .r
            .iter()
            .filter(|(ri, _)| ri.row == at || ri.col == at)
            .map(|(_, v)| v.clone())
            .collect())
    }

    /// `f_i^{(k)} = ∏_{r ∈ B[k,i]} (x - r)`.
    pub fn block_poly(&self, at: BlockIndex) -> Result<ZPoly> {
        Ok(ZPoly::from_roots(&self.block_roots(at)?))
    }

    /// `s = ∏ (x - s_j)`.
    pub fn s_poly(&self) -> ZPoly {
        ZPoly::from_roots(&self.s)
    }

    /// Whether the union of `B[k,i]` over `cols` contains all of `R`.
    pub fn covers_r(&self, cols: &[BlockIndex]) -> bool {
        self.r
            .iter()
            .all(|(ri, _)| cols.contains(&ri.row) || cols.contains(&ri.col))
    }

    /// The multiset `R ⊎ R ⊎ S` of roots of `s · ∏ f_i^{(k)}`.
    pub fn doubled_multiset(&self) -> Vec<BigInt> {
        self.r_values()
            .chain(self.r_values())
            .chain(self.s.iter())
            .cloned()
            .collect()
    }

    /// Certificate for `v_p(d(∏_{T}(x-t))) = 1` with `T = R ⊎ R ⊎ S`:
    /// one system `{s_0..s_{τ-1}} ∪ R`, witness `z = s_1`.
    pub fn certificate_at_p(&self) -> SplitCertificate {
        let tau = self.tau as usize;
        let system: Vec<BigInt> = self.s[..tau]
            .iter()
            .chain(self.r_values())
            .cloned()
            .collect();
        let rest = self
            .r_values()
            .chain(self.s[tau..].iter())
            .cloned()
            .collect();
        SplitCertificate {
            q: self.p,
            e: 1,
            systems: vec![system],
            rest,
            z: self.s[1].clone(),
        }
    }

    /// Certificate for `v_q(d(..)) = e` at an extra factor `q^e` of `c`:
    /// the first `e·q` elements of `S` as `e` systems, witness `z = 1`.
    pub fn certificate_at_q(&self, q: u64) -> Result<SplitCertificate> {
        let &(_, e) = self
            .extra
            .iter()
            .find(|x| x.0 == q)
            .ok_or_else(|| Error::InvalidArgument(format!("{q} is not an extra factor of c")))?;
        let width = q as usize;
        let used = width * e as usize;
        let systems = (0..e as usize)
            .map(|t| self.s[t * width..(t + 1) * width].to_vec())
            .collect();
        let rest = self
            .s
            .get(used..)
            .unwrap_or(&[])
            .iter()
            .chain(self.r_values())
            .chain(self.r_values())
            .cloned()
            .collect();
        Ok(SplitCertificate {
            q,
            e,
            systems,
            rest,
            z: BigInt::from(1),
        })
    }

    /// Primes `q <= |R| + |S|` other than `p` and the `q_i`.
    pub fn primes_to_avoid(&self) -> Vec<u64> {
        let mut special = vec![self.p];
        special.extend(self.extra.iter().map(|x| x.0));
        arith::primes_in_range(2, self.n_r + self.sigma, &special)
    }
}

fn residue(v: &BigInt, m: u64) -> u64 {
    v.mod_floor(&BigInt::from(m)).to_u64().expect("residue fits")
}

/// First residue class mod `q` not met by `values`.
fn missing_class<'a>(values: impl IntoIterator<Item = &'a BigInt>, q: u64) -> Option<u64> {
    let hit: BTreeSet<u64> = values.into_iter().map(|v| residue(v, q)).collect();
    (0..q).find(|r| !hit.contains(r))
}

/// Check every condition the construction relies on. Condition numbers
/// follow the list in the construction: (1) `s_0 ≡ 0` and `{s_0..s_{τ-1}} ∪ R`
/// complete mod `p`; (2) `s_i ≡ 0 mod p` for `i >= τ`; (3) `e_i` complete
/// systems mod `q_i` inside `S` with same-class representatives congruent
/// mod `q_i^2`; (4) at most `e_i` elements of `S` are `≡ 1 mod q_i`;
/// (5) `R ≡ 0 mod q_i`; (6) no complete residue system of `R ∪ S` modulo any
/// other prime.
pub fn verify_design(d: &ResidueDesign) -> Report {
    let mut rep = Report::new();
    let p = d.p;

    // parameters
    let expected_n = compute_n(&d.spec);
    let c_expected = d
        .extra
        .iter()
        .fold(BigInt::from(p), |acc, &(q, e)| acc * BigInt::from(q).pow(e));
    let sigma_expected = d
        .extra
        .iter()
        .map(|&(q, e)| q * e as u64)
        .fold(d.tau, u64::max);
    let mut problems = Vec::new();
    if d.n_r != expected_n {
        problems.push(format!("N = {} but expected {expected_n}", d.n_r));
    }
    if !is_prime_u64(p) || p == 2 {
        problems.push(format!("p = {p} is not an odd prime"));
    }
    if p < expected_n + 2 || d.tau != p - expected_n || d.tau < 2 {
        problems.push(format!("tau = {} inconsistent with p - N", d.tau));
    }
    if d.sigma != sigma_expected {
        problems.push(format!("sigma = {} but expected {sigma_expected}", d.sigma));
    }
    if d.c != c_expected {
        problems.push(format!("c = {} but p·∏q^e = {c_expected}", d.c));
    }
    if d.c.is_even() {
        problems.push("c is even".into());
    }
    if d.s.len() as u64 != d.sigma {
        problems.push(format!("|S| = {} but sigma = {}", d.s.len(), d.sigma));
    }
    let idx: Vec<RIndex> = d.r.iter().map(|x| x.0).collect();
    if idx != r_indices(&d.spec) {
        problems.push("R index set does not match the block matrix".into());
    }
    let all: Vec<&BigInt> = d.s.iter().chain(d.r_values()).collect();
    let distinct: BTreeSet<&BigInt> = all.iter().copied().collect();
    if distinct.len() != all.len() {
        problems.push("elements of R ∪ S are not pairwise distinct".into());
    }
    if problems.is_empty() {
        rep.pass("params");
    } else {
        rep.fail("params", problems.join("; "));
        // later checks index into S and R by the stated sizes
        if d.s.len() as u64 != d.sigma || d.tau as usize > d.s.len() || d.tau < 2 {
            return rep;
        }
    }

    // (1)
    let tau = d.tau as usize;
    if residue(&d.s[0], p) != 0 {
        rep.fail("cond1", format!("s_0 = {} is not ≡ 0 mod {p}", d.s[0]));
    } else {
        let head: Vec<&BigInt> = d.s[..tau].iter().chain(d.r_values()).collect();
        let mut owner: HashMap<u64, usize> = HashMap::new();
        let mut clash = None;
        for (pos, v) in head.iter().enumerate() {
            if let Some(prev) = owner.insert(residue(v, p), pos) {
                clash = Some((prev, pos));
                break;
            }
        }
        match (clash, missing_class(head.iter().copied(), p)) {
            (None, None) => rep.pass("cond1"),
            (_, Some(cls)) => rep.fail(
                "cond1",
                format!("residue class {cls} mod {p} missing from {{s_0..s_(tau-1)}} ∪ R"),
            ),
            (Some((a, b)), None) => rep.fail(
                "cond1",
                format!("elements #{a} and #{b} share a residue mod {p}"),
            ),
        }
    }

    // (2)
    match d.s[tau..].iter().position(|v| residue(v, p) != 0) {
        None => rep.pass("cond2"),
        Some(off) => rep.fail(
            "cond2",
            format!("s_{} = {} is not ≡ 0 mod {p}", tau + off, d.s[tau + off]),
        ),
    }

    // (3) and (4)
    let mut c3 = Vec::new();
    let mut c4 = Vec::new();
    for &(q, e) in &d.extra {
        let q2 = q * q;
        for cls in 0..q {
            let mut lifts: BTreeMap<u64, u32> = BTreeMap::new();
            for v in d.s.iter().filter(|v| residue(v, q) == cls) {
                *lifts.entry(residue(v, q2)).or_default() += 1;
            }
            if lifts.values().copied().max().unwrap_or(0) < e {
                c3.push(format!(
                    "class {cls} mod {q} has no {e} elements of S congruent mod {q2}"
                ));
            }
        }
        let ones = d.s.iter().filter(|v| residue(v, q) == 1 % q).count();
        if ones as u64 > e as u64 {
            c4.push(format!("{ones} elements of S are ≡ 1 mod {q}, more than {e}"));
        }
    }
    if c3.is_empty() {
        rep.pass("cond3");
    } else {
        rep.fail("cond3", c3.join("; "));
    }
    if c4.is_empty() {
        rep.pass("cond4");
    } else {
        rep.fail("cond4", c4.join("; "));
    }

    // (5)
    let c5: Vec<String> = d
        .extra
        .iter()
        .flat_map(|&(q, _)| {
            d.r.iter()
                .filter(move |(_, v)| residue(v, q) != 0)
                .map(move |(ri, v)| format!("r_({ri}) = {v} not ≡ 0 mod {q}"))
        })
        .collect();
    if c5.is_empty() {
        rep.pass("cond5");
    } else {
        rep.fail("cond5", c5.join("; "));
    }

    // (6)
    let mut c6 = Vec::new();
    let mut witnesses = Vec::new();
    for q in d.primes_to_avoid() {
        match missing_class(all.iter().copied(), q) {
            Some(cls) => witnesses.push(format!("{q}:{cls}")),
            None => c6.push(format!("R ∪ S is a complete residue system mod {q}")),
        }
    }
    if c6.is_empty() {
        rep.record("cond6", true, format!("missing classes {}", witnesses.join(" ")));
    } else {
        rep.fail("cond6", c6.join("; "));
    }

    // the valuation lemma at p and at each q_i, on R ⊎ R ⊎ S
    let t = d.doubled_multiset();
    let mut certs = vec![("lemma@p".to_string(), Ok(d.certificate_at_p()))];
    for &(q, _) in &d.extra {
        certs.push((format!("lemma@{q}"), d.certificate_at_q(q)));
    }
    for (name, cert) in certs {
        match cert.and_then(|c| check_split_certificate(&t, c.q, &c)) {
            Ok(SplitOutcome::Valid) => rep.pass(name),
            Ok(other) => rep.fail(name, other.to_string()),
            Err(e) => rep.fail(name, e.to_string()),
        }
    }
    rep
}

/// Decomposition `T = T_1 ⊎ .. ⊎ T_e ⊎ T_0` witnessing `v_q(d(∏(x-t))) = e`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCertificate {
    pub q: u64,
    pub e: u32,
    #[serde(with = "big_vec_vec")]
    pub systems: Vec<Vec<BigInt>>,
    #[serde(with = "json::big_vec")]
    pub rest: Vec<BigInt>,
    #[serde(with = "json::big")]
    pub z: BigInt,
}

mod big_vec_vec {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Row(#[serde(with = "crate::json::big_vec")] Vec<BigInt>);

    pub fn serialize<S: Serializer>(v: &[Vec<BigInt>], ser: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Row> = v.iter().map(|r| Row(r.clone())).collect();
        rows.serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<Vec<BigInt>>, D::Error> {
        Ok(Vec::<Row>::deserialize(de)?.into_iter().map(|r| r.0).collect())
    }
}

/// Result of checking a [`SplitCertificate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SplitOutcome {
    Valid,
    /// Lemma condition (1): system `system` misses residue class `class`.
    Incomplete { system: usize, class: u64 },
    /// Lemma condition (1): representatives of `class` differ mod `q^2`.
    NotCongruentModSquare { class: u64 },
    /// Lemma condition (2): an element of `T_0` lies in the class of `z`.
    WitnessHit { element: BigInt },
    /// Conditions hold but the computed valuation differs from `e`.
    ValuationMismatch { expected: u32, actual: u32 },
}

impl fmt::Display for SplitOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitOutcome::Valid => write!(f, "valid"),
            SplitOutcome::Incomplete { system, class } => {
                write!(f, "condition (1): system {system} misses class {class}")
            }
            SplitOutcome::NotCongruentModSquare { class } => write!(
                f,
                "condition (1): representatives of class {class} not congruent mod q^2"
            ),
            SplitOutcome::WitnessHit { element } => {
                write!(f, "condition (2): {element} in T_0 meets the class of z")
            }
            SplitOutcome::ValuationMismatch { expected, actual } => {
                write!(f, "valuation {actual} differs from certified {expected}")
            }
        }
    }
}

/// `v_q(d(∏_{t∈T} (x - t)))`, from the expanded product.
pub fn split_fixdiv_valuation(t: &[BigInt], q: u64) -> Result<u32> {
    if t.is_empty() {
        return Err(Error::InvalidArgument("T must be non-empty".into()));
    }
    let d = fixed_divisor(&ZPoly::from_roots(t))?;
    arith::padic_val(&d, q)
}

fn sorted(v: impl IntoIterator<Item = BigInt>) -> Vec<BigInt> {
    let mut v: Vec<BigInt> = v.into_iter().collect();
    v.sort();
    v
}

/// Checks a certificate against `T`; errors only on structural mismatch.
pub fn check_split_certificate(
    t: &[BigInt],
    q: u64,
    cert: &SplitCertificate,
) -> Result<SplitOutcome> {
    if cert.q != q || !is_prime_u64(q) {
        return Err(Error::InvalidArgument(format!(
            "certificate prime {} does not match {q}",
            cert.q
        )));
    }
    if cert.systems.len() != cert.e as usize {
        return Err(Error::InvalidArgument(format!(
            "certificate lists {} systems for e = {}",
            cert.systems.len(),
            cert.e
        )));
    }
    let parts = cert
        .systems
        .iter()
        .flatten()
        .chain(cert.rest.iter())
        .cloned();
    if sorted(parts) != sorted(t.iter().cloned()) {
        return Err(Error::InvalidArgument(
            "certificate parts do not partition T".into(),
        ));
    }
    let q2 = q * q;
    let mut reps: Vec<Option<u64>> = vec![None; q as usize];
    for (si, sys) in cert.systems.iter().enumerate() {
        let classes: BTreeSet<u64> = sys.iter().map(|v| residue(v, q)).collect();
        if sys.len() as u64 != q || classes.len() as u64 != q {
            let class = (0..q).find(|c| !classes.contains(c)).unwrap_or(0);
            return Ok(SplitOutcome::Incomplete { system: si, class });
        }
        for v in sys {
            let cls = residue(v, q) as usize;
            let lift = residue(v, q2);
            match reps[cls] {
                None => reps[cls] = Some(lift),
                Some(l) if l != lift => {
                    return Ok(SplitOutcome::NotCongruentModSquare { class: cls as u64 })
                }
                _ => {}
            }
        }
    }
    let zc = residue(&cert.z, q);
    if let Some(hit) = cert.rest.iter().find(|v| residue(v, q) == zc) {
        return Ok(SplitOutcome::WitnessHit {
            element: hit.clone(),
        });
    }
    let actual = split_fixdiv_valuation(t, q)?;
    if actual != cert.e {
        return Ok(SplitOutcome::ValuationMismatch {
            expected: cert.e,
            actual,
        });
    }
    Ok(SplitOutcome::Valid)
}

/// True iff the certificate is structurally valid, satisfies both lemma
/// conditions, and the computed valuation equals `e`.
pub fn certify_split_valuation(t: &[BigInt], q: u64, cert: &SplitCertificate) -> Result<bool> {
    Ok(check_split_certificate(t, q, cert)? == SplitOutcome::Valid)
}

// JSON form: {ms, p, c, factors, N, tau, sigma, S, R: {"k,i,h,j": v}, avoided_primes}

#[derive(Serialize, Deserialize)]
struct DesignRepr {
    ms: LengthSpec,
    p: u64,
    #[serde(with = "json::big")]
    c: BigInt,
    factors: Vec<(u64, u32)>,
    #[serde(rename = "N")]
    n_r: u64,
    tau: u64,
    sigma: u64,
    #[serde(rename = "S", with = "json::big_vec")]
    s: Vec<BigInt>,
    #[serde(rename = "R")]
    r: BTreeMap<String, BigText>,
    avoided_primes: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct BigText(#[serde(with = "json::big")] BigInt);

impl Serialize for ResidueDesign {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut factors = vec![(self.p, 1)];
        factors.extend(self.extra.iter().copied());
        DesignRepr {
            ms: self.spec.clone(),
            p: self.p,
            c: self.c.clone(),
            factors,
            n_r: self.n_r,
            tau: self.tau,
            sigma: self.sigma,
            s: self.s.clone(),
            r: self
                .r
                .iter()
                .map(|(i, v)| (i.to_string(), BigText(v.clone())))
                .collect(),
            avoided_primes: self.avoided_primes.clone(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for ResidueDesign {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = DesignRepr::deserialize(de)?;
        let extra: Vec<(u64, u32)> = repr
            .factors
            .into_iter()
            .filter(|&(q, _)| q != repr.p)
            .collect();
        let mut r = repr
            .r
            .into_iter()
            .map(|(k, v)| Ok((k.parse::<RIndex>().map_err(D::Error::custom)?, v.0)))
            .collect::<std::result::Result<Vec<_>, D::Error>>()?;
        r.sort_by_key(|e| e.0);
        Ok(ResidueDesign {
            spec: repr.ms,
            p: repr.p,
            c: repr.c,
            extra,
            n_r: repr.n_r,
            tau: repr.tau,
            sigma: repr.sigma,
            s: repr.s,
            r,
            avoided_primes: repr.avoided_primes,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn spec(ms: &[u32]) -> LengthSpec {
        LengthSpec::new(ms.to_vec()).unwrap()
    }

    fn design(ms: &[u32], opts: &DesignOptions) -> ResidueDesign {
        let s = spec(ms);
        let params = choose_parameters(&s, opts).unwrap();
        build_design(&s, &params).unwrap()
    }

    #[test]
    fn n_examples() {
        assert_eq!(compute_n(&spec(&[1, 1])), 2);
        assert_eq!(compute_n(&spec(&[1])), 0);
        assert_eq!(compute_n(&spec(&[1, 2])), 4);
        assert_eq!(compute_n(&spec(&[1, 1, 2])), 10);
    }

    #[test]
    fn n_counts_off_diagonal_positions() {
        for ms in [&[1, 1][..], &[1, 2], &[2, 3, 1], &[1, 1, 1, 4]] {
            let s = spec(ms);
            assert_eq!(r_indices(&s).len() as u64, compute_n(&s));
        }
    }

    #[test]
    fn parameter_examples() {
        let p = choose_parameters(&spec(&[1, 1]), &DesignOptions::default()).unwrap();
        assert_eq!((p.p, p.c.clone(), p.tau, p.sigma), (5, 5.into(), 3, 3));
        let p = choose_parameters(&spec(&[1, 2]), &DesignOptions::default()).unwrap();
        assert_eq!((p.p, p.c.clone(), p.tau, p.sigma), (7, 7.into(), 3, 3));
        let opts = DesignOptions {
            prime: None,
            c_extra: vec![(3, 2)],
        };
        let p = choose_parameters(&spec(&[1, 1]), &opts).unwrap();
        assert_eq!((p.p, p.c.clone(), p.tau, p.sigma), (5, 45.into(), 3, 6));
        let p = choose_parameters(&spec(&[1, 1, 2]), &DesignOptions::default()).unwrap();
        assert_eq!(p.p, 13);
    }

    #[test]
    fn parameter_errors() {
        let s = spec(&[1, 1]);
        let bad = |prime, c_extra| choose_parameters(&s, &DesignOptions { prime, c_extra });
        assert!(bad(None, vec![(2, 1)]).is_err());
        assert!(bad(None, vec![(5, 1)]).is_err());
        assert!(bad(None, vec![(9, 1)]).is_err());
        assert!(bad(Some(3), vec![]).is_err());
        assert!(bad(Some(2), vec![]).is_err());
        assert!(bad(Some(7), vec![]).is_ok());
        assert!(matches!(
            choose_parameters(&spec(&[1]), &DesignOptions::default()),
            Err(Error::SingleBlock)
        ));
    }

    #[test]
    fn design_1_1() {
        let d = design(&[1, 1], &DesignOptions::default());
        assert_eq!(d.s.len(), 3);
        assert_eq!(d.r.len(), 2);
        for v in d.s.iter().chain(d.r_values()) {
            assert_eq!(residue(v, 2), 0);
            assert_eq!(residue(v, 3), 0);
        }
        let mod5: BTreeSet<u64> = d.s.iter().chain(d.r_values()).map(|v| residue(v, 5)).collect();
        assert_eq!(mod5.len(), 5);
        assert_eq!(residue(&d.s[0], 5), 0);
        assert_eq!(d.avoided_primes, vec![2, 3]);
        let rep = verify_design(&d);
        assert!(rep.all_passed(), "{rep}");
    }

    #[test]
    fn design_1_2_and_composite() {
        let d = design(&[1, 2], &DesignOptions::default());
        assert_eq!((d.s.len(), d.r.len()), (3, 4));
        assert!(verify_design(&d).all_passed());

        let opts = DesignOptions {
            prime: None,
            c_extra: vec![(3, 2)],
        };
        let d = design(&[1, 1], &opts);
        assert_eq!(d.s.len(), 6);
        let rep = verify_design(&d);
        assert!(rep.all_passed(), "{rep}");
    }

    #[test]
    fn single_block_rejected() {
        let params = choose_parameters(&spec(&[1, 1]), &DesignOptions::default()).unwrap();
        assert!(matches!(
            build_design(&spec(&[1]), &params),
            Err(Error::SingleBlock)
        ));
    }

    #[test]
    fn block_degrees() {
        let d = design(&[1, 1], &DesignOptions::default());
        for at in d.spec.index_set() {
            assert_eq!(d.block_poly(at).unwrap().degree(), Some(2));
        }
        assert_eq!(d.s_poly().degree(), Some(3));

        let d = design(&[1, 2], &DesignOptions::default());
        let degs: Vec<usize> = d
            .spec
            .index_set()
            .into_iter()
            .map(|at| d.block_poly(at).unwrap().degree().unwrap())
            .collect();
        assert_eq!(degs, vec![4, 2, 2]);
        assert_eq!(d.s_poly().degree(), Some(3));
        assert_eq!(degs.iter().sum::<usize>() as u64, 2 * d.n_r);
        assert!(d.block_poly(BlockIndex { k: 3, i: 1 }).is_err());
        assert!(d.block_poly(BlockIndex { k: 1, i: 2 }).is_err());
    }

    #[test]
    fn covering_property() {
        let d = design(&[1, 1, 2], &DesignOptions::default());
        let idx = d.spec.index_set();
        for h in 1..=d.spec.n() as u32 {
            let cols: Vec<BlockIndex> = idx.iter().copied().filter(|b| b.k != h).collect();
            assert!(d.covers_r(&cols));
        }
        for a in &idx {
            for b in &idx {
                if a.k == b.k {
                    continue;
                }
                let cols: Vec<BlockIndex> =
                    idx.iter().copied().filter(|x| x != a && x != b).collect();
                assert!(!d.covers_r(&cols));
            }
        }
    }

    #[test]
    fn split_valuation_examples() {
        let b = |v: &[i64]| v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
        assert_eq!(split_fixdiv_valuation(&b(&[0, 1]), 2).unwrap(), 1);
        assert_eq!(split_fixdiv_valuation(&b(&[0, 2, 4]), 2).unwrap(), 0);
        // oracle: gcd of a(a-1)(a-2)(a-3) over a = 0..=40 is 24
        let g = (0..=40i64).fold(BigInt::zero(), |acc, a| {
            acc.gcd(&BigInt::from(a * (a - 1) * (a - 2) * (a - 3)))
        });
        assert_eq!(g, 24.into());
        assert_eq!(split_fixdiv_valuation(&b(&[0, 1, 2, 3]), 2).unwrap(), 3);
    }

    #[test]
    fn certificate_examples() {
        let d = design(&[1, 1], &DesignOptions::default());
        let t = d.doubled_multiset();
        let cert = d.certificate_at_p();
        assert_eq!(cert.z, d.s[1]);
        assert!(certify_split_valuation(&t, 5, &cert).unwrap());
        assert_eq!(split_fixdiv_valuation(&t, 5).unwrap(), 1);

        // z moved into a class that T_0 meets
        let mut bad = cert.clone();
        bad.z = d.r[0].1.clone();
        assert!(matches!(
            check_split_certificate(&t, 5, &bad).unwrap(),
            SplitOutcome::WitnessHit { .. }
        ));

        // e = 0: T_0 = T, z outside every class of T
        let t = vec![BigInt::from(0), BigInt::from(2), BigInt::from(4)];
        let cert0 = SplitCertificate {
            q: 2,
            e: 0,
            systems: vec![],
            rest: t.clone(),
            z: 1.into(),
        };
        assert!(certify_split_valuation(&t, 2, &cert0).unwrap());

        // malformed: parts do not partition T
        let mut broken = cert0.clone();
        broken.rest.pop();
        assert!(certify_split_valuation(&t, 2, &broken).is_err());
    }

    #[test]
    fn certificates_at_extra_factors() {
        let opts = DesignOptions {
            prime: None,
            c_extra: vec![(3, 2), (7, 1)],
        };
        let d = design(&[1, 1], &opts);
        assert_eq!(d.sigma, 7);
        let t = d.doubled_multiset();
        for &(q, e) in &d.extra {
            let cert = d.certificate_at_q(q).unwrap();
            assert!(certify_split_valuation(&t, q, &cert).unwrap());
            assert_eq!(split_fixdiv_valuation(&t, q).unwrap(), e);
        }
        assert!(verify_design(&d).all_passed());
    }

    #[test]
    fn mutation_breaks_condition_2() {
        let opts = DesignOptions {
            prime: None,
            c_extra: vec![(3, 2)],
        };
        let mut d = design(&[1, 1], &opts);
        let last = d.s.len() - 1;
        d.s[last] += 1;
        let rep = verify_design(&d);
        assert!(rep.failed_on("cond2"), "{rep}");
    }

    #[test]
    fn mutation_breaks_condition_1() {
        let mut d = design(&[1, 2], &DesignOptions::default());
        for v in d.s.iter_mut().take(d.tau as usize) {
            *v += 1;
        }
        let rep = verify_design(&d);
        assert!(rep.failed_on("cond1"), "{rep}");
    }

    #[test]
    fn r_element_in_class_of_s1_breaks_witness() {
        let mut d = design(&[1, 1], &DesignOptions::default());
        let shift = BigInt::from(residue(&d.s[1], 5) + 5 - residue(&d.r[0].1, 5));
        d.r[0].1 += shift * BigInt::from(6);
        let rep = verify_design(&d);
        assert!(rep.failed_on("lemma@p"), "{rep}");
        assert!(rep.failed_on("cond1"), "{rep}");
    }

    #[test]
    fn json_round_trip() {
        let opts = DesignOptions {
            prime: Some(7),
            c_extra: vec![(3, 1)],
        };
        let d = design(&[1, 1], &opts);
        let text = serde_json::to_string(&d).unwrap();
        assert!(text.contains(r#""R":{"1,1,2,1""#));
        let back: ResidueDesign = serde_json::from_str(&text).unwrap();
        assert_eq!(back, d);
    }
}
