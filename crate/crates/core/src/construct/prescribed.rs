//! Elements of Int(Z) with a prescribed set of factorization lengths.
//!
//! For block sizes `m_1 <= .. <= m_n` (n >= 2) the result is
//! `H = S · ∏_{(k,i)} F_i^{(k)} / c`, where `S` and the `F_i^{(k)}` are
//! Eisenstein lifts of `s = ∏_{S}(x - s_j)` and `f_i^{(k)} = ∏_{B[k,i]}(x - r)`.
//! Its factorizations are exactly
//! `F_1^{(h)} ⋯ F_{m_h}^{(h)} · (S ∏_{(k,i) ∉ I_h} F_i^{(k)}) / c`
//! for `h = 1..n`, of lengths `m_h + 1`.

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::design::{
    build_design, check_split_certificate, choose_parameters, verify_design, DesignOptions,
    LengthSpec, ResidueDesign, SplitOutcome,
};
use crate::error::{Error, Result};
use crate::factor::{
    check_factorization, enumerate_factorizations, enumerate_factorizations_bruteforce,
    lengths_multiset, lengths_set, same_factorizations, Block, FactoredInput, Factorization,
    BRUTE_FORCE_MAX_PARTS,
};
use crate::json;
use crate::lift::{lift, verify_lift, LiftCertificate};
use crate::poly::{fixed_divisor, poly_product, RationalPoly, ZPoly};
use crate::report::Report;

use super::ARTIFACT_VERSION;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrescribedArtifact {
    pub version: u32,
    /// Block sizes `m_k`; the prescribed lengths are `m_k + 1`.
    pub spec: LengthSpec,
    /// Absent for the single-block case `H = x^{m+1}`.
    pub design: Option<ResidueDesign>,
    pub lift: Option<LiftCertificate>,
    /// Irreducible parts of the numerator: `S` first, then `F_i^{(k)}` in
    /// block order. Factorization indices refer to this list.
    pub parts: Vec<ZPoly>,
    #[serde(with = "json::big")]
    pub c: BigInt,
    #[serde(rename = "H")]
    pub h: RationalPoly,
    pub factorizations: Vec<Factorization>,
    /// One entry per factorization, ascending.
    pub lengths: Vec<usize>,
}

impl PrescribedArtifact {
    pub fn degree(&self) -> usize {
        self.h.degree().unwrap_or(0)
    }

    /// The distinct lengths.
    pub fn length_set(&self) -> Vec<usize> {
        lengths_set(&self.factorizations)
    }

    pub fn factored_input(&self) -> Result<FactoredInput> {
        FactoredInput::new(self.parts.clone(), self.c.clone())
    }
}

pub fn construct_prescribed(spec: &LengthSpec, opts: &DesignOptions) -> Result<PrescribedArtifact> {
    if spec.n() == 1 {
        return Ok(single_block(spec));
    }
    let params = choose_parameters(spec, opts)?;
    let design = build_design(spec, &params)?;
    let mut originals = vec![design.s_poly()];
    for at in spec.index_set() {
        originals.push(design.block_poly(at)?);
    }
    let (parts, cert) = lift(&originals, &Default::default())?;
    let numerator = poly_product(&parts);
    let c = design.c.clone();
    if fixed_divisor(&numerator)? != c {
        return Err(Error::Invariant(format!(
            "fixed divisor of S·∏F is not c = {c}"
        )));
    }
    let h = RationalPoly::new(numerator, c.clone())?;
    let input = FactoredInput::new(parts.clone(), c.clone())?;
    let factorizations = enumerate_factorizations(&input)?;
    let lengths = lengths_multiset(&factorizations);

    let expected: Vec<usize> = spec.lengths().iter().map(|&k| k as usize).collect();
    if lengths != expected || factorizations.len() != spec.n() {
        return Err(Error::Invariant(format!(
            "lengths {lengths:?} differ from the prescribed {expected:?}"
        )));
    }
    if !h.is_image_primitive()? {
        return Err(Error::Invariant("H is not image primitive".into()));
    }
    Ok(PrescribedArtifact {
        version: ARTIFACT_VERSION,
        spec: spec.clone(),
        design: Some(design),
        lift: Some(cert),
        parts,
        c,
        h,
        factorizations,
        lengths,
    })
}

fn single_block(spec: &LengthSpec) -> PrescribedArtifact {
    let len = spec.ms()[0] as usize + 1;
    let parts = vec![ZPoly::x(); len];
    let h = RationalPoly::from_zpoly(poly_product(&parts));
    let blocks = (0..len)
        .map(|i| Block {
            den: BigInt::one(),
            indices: vec![i],
        })
        .collect();
    PrescribedArtifact {
        version: ARTIFACT_VERSION,
        spec: spec.clone(),
        design: None,
        lift: None,
        parts,
        c: BigInt::one(),
        h,
        factorizations: vec![Factorization::new(blocks)],
        lengths: vec![len],
    }
}

/// Re-derives every claim of the artifact from its raw integers.
pub fn verify_prescribed(a: &PrescribedArtifact) -> Report {
    let mut rep = Report::new();
    if a.version != ARTIFACT_VERSION {
        rep.fail("version", format!("unsupported version {}", a.version));
        return rep;
    }
    if a.spec.n() == 1 {
        verify_single_block(a, &mut rep);
        return rep;
    }
    let (Some(design), Some(cert)) = (&a.design, &a.lift) else {
        rep.fail("structure", "design and lift certificate are required for n >= 2");
        return rep;
    };

    if design.spec == a.spec {
        rep.pass("spec");
    } else {
        rep.fail("spec", "design was built for a different length spec");
    }
    rep.absorb("design", verify_design(design));
    rep.absorb("lift", verify_lift(cert));

    let mut originals = vec![design.s_poly()];
    let mut shape_ok = true;
    for at in a.spec.index_set() {
        match design.block_poly(at) {
            Ok(f) => originals.push(f),
            Err(_) => shape_ok = false,
        }
    }
    if shape_ok && originals == cert.originals && cert.companions.is_empty() {
        rep.pass("lift-originals");
    } else {
        rep.fail("lift-originals", "lifted polynomials are not s and the f_i^(k) of the design");
    }
    if a.parts == cert.lifted {
        rep.pass("parts");
    } else {
        rep.fail("parts", "parts differ from the lifted polynomials");
    }

    let numerator = poly_product(&a.parts);
    if a.h.num() == &numerator && a.h.den() == &a.c && a.c == design.c {
        rep.pass("H");
    } else {
        rep.fail("H", "H is not (S·∏F)/c for the recorded c");
    }

    match fixed_divisor(&numerator) {
        Ok(d) if d == a.c => rep.pass("fixdiv-gcd"),
        Ok(d) => rep.fail("fixdiv-gcd", format!("d(S·∏F) = {d}, c = {}", a.c)),
        Err(e) => rep.fail("fixdiv-gcd", e.to_string()),
    }
    match fixdiv_by_certificates(design, numerator.degree().unwrap_or(0) as u64) {
        Ok(d) if d == a.c => rep.pass("fixdiv-lemma"),
        Ok(d) => rep.fail(
            "fixdiv-lemma",
            format!("certificates give d(s·∏f) = {d}, c = {}", a.c),
        ),
        Err(e) => rep.fail("fixdiv-lemma", e),
    }
    match a.h.is_image_primitive() {
        Ok(true) => rep.pass("image-primitive"),
        Ok(false) => rep.fail("image-primitive", "d(H) != 1"),
        Err(e) => rep.fail("image-primitive", e.to_string()),
    }

    let input = match FactoredInput::new(a.parts.clone(), a.c.clone()) {
        Ok(i) => i,
        Err(e) => {
            rep.fail("factorizations", e.to_string());
            return rep;
        }
    };
    let invalid: Vec<String> = a
        .factorizations
        .iter()
        .filter_map(|f| check_factorization(&input, f).err().map(|e| format!("{f}: {e}")))
        .collect();
    if invalid.is_empty() {
        rep.pass("factorizations-valid");
    } else {
        rep.fail("factorizations-valid", invalid.join("; "));
    }
    compare_with_routes(&input, &a.factorizations, &mut rep);

    let expected: Vec<usize> = a.spec.lengths().iter().map(|&k| k as usize).collect();
    let recorded = lengths_multiset(&a.factorizations);
    if recorded == expected && a.lengths == expected && a.factorizations.len() == a.spec.n() {
        rep.pass("lengths");
    } else {
        rep.fail(
            "lengths",
            format!(
                "recorded {:?}, from factorizations {recorded:?}, prescribed {expected:?}",
                a.lengths
            ),
        );
    }
    rep
}

/// Checks the stored factorizations against the lemma route and, when the
/// index set is small enough, against the brute-force oracle.
pub(crate) fn compare_with_routes(input: &FactoredInput, stored: &[Factorization], rep: &mut Report) {
    match enumerate_factorizations(input) {
        Ok(lemma) if same_factorizations(input, &lemma, stored) => rep.pass("lemma-route"),
        Ok(lemma) => rep.fail(
            "lemma-route",
            format!("lemma route finds {} factorizations, artifact lists {}", lemma.len(), stored.len()),
        ),
        Err(e) => rep.fail("lemma-route", e.to_string()),
    }
    if input.parts().len() > BRUTE_FORCE_MAX_PARTS {
        rep.record("oracle", true, "skipped: index set above the brute-force limit");
        return;
    }
    match enumerate_factorizations_bruteforce(input) {
        Ok(brute) if same_factorizations(input, &brute, stored) => rep.pass("oracle"),
        Ok(brute) => rep.fail(
            "oracle",
            format!(
                "oracle finds {} factorizations, artifact lists {}",
                brute.len(),
                stored.len()
            ),
        ),
        Err(e) => rep.fail("oracle", e.to_string()),
    }
}

/// `d(s · ∏ f_i^{(k)})` assembled prime by prime: the split certificates
/// give the exponent at `p` and at each `q_i`; every other prime up to the
/// degree misses a residue class of `R ∪ S` and contributes nothing.
fn fixdiv_by_certificates(design: &ResidueDesign, degree: u64) -> std::result::Result<BigInt, String> {
    let t = design.doubled_multiset();
    let mut d = BigInt::one();
    let mut certs = vec![design.certificate_at_p()];
    for &(q, _) in &design.extra {
        certs.push(design.certificate_at_q(q).map_err(|e| e.to_string())?);
    }
    let mut special = Vec::new();
    for cert in certs {
        match check_split_certificate(&t, cert.q, &cert).map_err(|e| e.to_string())? {
            SplitOutcome::Valid => d *= BigInt::from(cert.q).pow(cert.e),
            other => return Err(format!("certificate at {}: {other}", cert.q)),
        }
        special.push(cert.q);
    }
    for q in arith::primes_in_range(2, degree, &special) {
        let hit: std::collections::BTreeSet<BigInt> = t
            .iter()
            .map(|v| num_integer::Integer::mod_floor(v, &BigInt::from(q)))
            .collect();
        if hit.len() as u64 == q {
            return Err(format!("R ⊎ R ⊎ S is complete modulo {q}"));
        }
    }
    Ok(d)
}

fn verify_single_block(a: &PrescribedArtifact, rep: &mut Report) {
    let len = a.spec.ms()[0] as usize + 1;
    let expected = poly_product(&vec![ZPoly::x(); len]);
    if a.h.num() == &expected && a.h.den().is_one() && a.c.is_one() {
        rep.pass("H");
    } else {
        rep.fail("H", format!("H must be x^{len}"));
    }
    let ok = a.factorizations.len() == 1
        && a.factorizations[0].len() == len
        && a.factorizations[0]
            .blocks
            .iter()
            .all(|b| b.den.is_one() && b.indices.len() == 1)
        && a.parts.iter().all(|p| p == &ZPoly::x())
        && a.parts.len() == len;
    if ok {
        rep.pass("factorizations-valid");
    } else {
        rep.fail("factorizations-valid", format!("x^{len} has the single factorization x·…·x"));
    }
    if a.lengths == vec![len] {
        rep.pass("lengths");
    } else {
        rep.fail("lengths", format!("expected [{len}], recorded {:?}", a.lengths));
    }
}
