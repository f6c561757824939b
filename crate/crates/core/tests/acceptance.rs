//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Signed};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use intval::arith::factor_small;
use intval::construct::{
    construct_prescribed, construct_transfer, verify_prescribed, verify_transfer, Artifact,
    PrescribedArtifact, TransferOptions,
};
use intval::design::{
    build_design, certify_split_valuation, choose_parameters, compute_n, split_fixdiv_valuation,
    DesignOptions, LengthSpec, ResidueDesign,
};
use intval::factor::{
    enumerate_factorizations, enumerate_factorizations_bruteforce, lengths_multiset,
    same_factorizations,
};
use intval::lift::{lift, verify_lift};
use intval::poly::{fixed_divisor, fixed_divisor_bruteforce, RationalPoly, ZPoly};
use intval::report::Report;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, u64);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn prescribed(ms: &[u32], opts: &DesignOptions) -> Result<PrescribedArtifact, String> {
    let spec = LengthSpec::new(ms.to_vec()).map_err(|e| e.to_string())?;
    construct_prescribed(&spec, opts).map_err(|e| e.to_string())
}

fn design(ms: &[u32], opts: &DesignOptions) -> Result<ResidueDesign, String> {
    let spec = LengthSpec::new(ms.to_vec()).map_err(|e| e.to_string())?;
    let params = choose_parameters(&spec, opts).map_err(|e| e.to_string())?;
    build_design(&spec, &params).map_err(|e| e.to_string())
}

fn composite() -> DesignOptions {
    DesignOptions {
        prime: None,
        c_extra: vec![(3, 2)],
    }
}

/// Designs exercised by the lift and split-certificate criteria.
fn design_suite() -> Vec<(Vec<u32>, DesignOptions)> {
    vec![
        (vec![1, 1], DesignOptions::default()),
        (vec![1, 2], DesignOptions::default()),
        (vec![1, 1, 2], DesignOptions::default()),
        (vec![2, 2], DesignOptions::default()),
        (vec![1, 3], DesignOptions::default()),
        (vec![1, 4], DesignOptions::default()),
        (vec![1, 1, 1], DesignOptions::default()),
        (vec![1, 1], composite()),
        (vec![1, 2], composite()),
        (
            vec![1, 1],
            DesignOptions {
                prime: None,
                c_extra: vec![(3, 1), (7, 2)],
            },
        ),
    ]
}

/// Rebuilds the artifact from its JSON text and checks every claim again.
fn reload_and_verify(a: &Artifact) -> Result<Report, String> {
    let text = a.to_json().map_err(|e| e.to_string())?;
    let back = Artifact::from_json(&text).map_err(|e| e.to_string())?;
    ensure(&back == a, || "JSON round trip changed the artifact".into())?;
    Ok(back.verify())
}

fn prescribed_case(ms: &[u32], expect_degree: Option<usize>) -> Outcome {
    let a = prescribed(ms, &DesignOptions::default())?;
    let expected: Vec<usize> = ms.iter().map(|&m| m as usize + 1).collect();
    if let Some(deg) = expect_degree {
        ensure(a.degree() == deg, || format!("degree {} instead of {deg}", a.degree()))?;
    }
    ensure(a.factorizations.len() == ms.len(), || {
        format!("{} factorizations", a.factorizations.len())
    })?;
    ensure(a.lengths == expected, || format!("lengths {:?}", a.lengths))?;
    let input = a.factored_input().map_err(|e| e.to_string())?;
    let oracle = enumerate_factorizations_bruteforce(&input).map_err(|e| e.to_string())?;
    let lemma = enumerate_factorizations(&input).map_err(|e| e.to_string())?;
    ensure(same_factorizations(&input, &oracle, &a.factorizations), || {
        format!("oracle finds {} factorizations", oracle.len())
    })?;
    ensure(same_factorizations(&input, &lemma, &oracle), || "lemma route differs from oracle".into())?;
    let rep = reload_and_verify(&Artifact::Prescribed(a.clone()))?;
    ensure(rep.all_passed(), || rep.to_string().replace('\n', "; "))?;
    Ok(format!(
        "p={} c={} degree={} parts={} lengths={:?}",
        a.design.as_ref().map_or(0, |d| d.p),
        a.c,
        a.degree(),
        a.parts.len(),
        lengths_multiset(&oracle)
    ))
}

fn criterion_1() -> Outcome {
    prescribed_case(&[1, 1], Some(7))
}

fn criterion_2() -> Outcome {
    prescribed_case(&[1, 2], Some(11))
}

fn criterion_3() -> Outcome {
    let spec = LengthSpec::new(vec![1, 1, 2]).unwrap();
    ensure(compute_n(&spec) == 10, || format!("N = {}", compute_n(&spec)))?;
    let params = choose_parameters(&spec, &DesignOptions::default()).map_err(|e| e.to_string())?;
    ensure(params.p == 13, || format!("p = {}", params.p))?;
    let detail = prescribed_case(&[1, 1, 2], None)?;
    ensure(detail.contains("parts=5"), || format!("expected 5 parts: {detail}"))?;
    Ok(detail)
}

fn random_poly(rng: &mut StdRng) -> ZPoly {
    loop {
        let deg = rng.gen_range(0..=8);
        let coeffs: Vec<BigInt> = (0..=deg)
            .map(|_| BigInt::from(rng.gen_range(-10_000i64..=10_000)))
            .collect();
        let g = ZPoly::new(coeffs);
        if !g.is_zero() {
            return g;
        }
    }
}

fn criterion_4() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x1d1d_2024);
    let mut nontrivial = 0;
    for k in 0..200 {
        let g = random_poly(&mut rng);
        let d = fixed_divisor(&g).map_err(|e| e.to_string())?;
        let brute = fixed_divisor_bruteforce(&g, 40).map_err(|e| e.to_string())?;
        ensure(d == brute, || format!("#{k} {g}: {d} vs {brute}"))?;
        let content = g.content();
        let primitive = if content.is_one() {
            g.clone()
        } else {
            ZPoly::new(g.coeffs().iter().map(|c| c / &content).collect())
        };
        let dp = fixed_divisor(&primitive).map_err(|e| e.to_string())?;
        let deg = primitive.degree().unwrap_or(0) as u64;
        for (q, _) in factor_small(&dp).map_err(|e| e.to_string())? {
            ensure(q <= deg, || format!("#{k}: prime {q} divides d of a primitive degree-{deg} polynomial"))?;
        }
        if !dp.abs().is_one() {
            nontrivial += 1;
        }
    }
    // falling factorials attain the largest fixed divisor for their degree
    for deg in 1..=8u32 {
        let g = ZPoly::from_roots(&(0..deg).map(BigInt::from).collect::<Vec<_>>());
        let d = fixed_divisor(&g).map_err(|e| e.to_string())?;
        ensure(d == fixed_divisor_bruteforce(&g, 40).map_err(|e| e.to_string())?, || {
            format!("falling factorial of degree {deg}")
        })?;
        let h = RationalPoly::new(g, d).map_err(|e| e.to_string())?;
        ensure(h.is_int_valued(), || format!("binomial of degree {deg} not integer-valued"))?;
    }
    Ok(format!("200 random polynomials, {nontrivial} with nontrivial primitive fixed divisor"))
}

fn criterion_5() -> Outcome {
    let mut lines = Vec::new();
    for (ms, opts) in design_suite() {
        let spec = LengthSpec::new(ms.clone()).unwrap();
        if spec.total() > 5 {
            continue;
        }
        let d = design(&ms, &opts)?;
        let mut originals = vec![d.s_poly()];
        for at in spec.index_set() {
            originals.push(d.block_poly(at).map_err(|e| e.to_string())?);
        }
        let started = Instant::now();
        let (_, cert) = lift(&originals, &Default::default()).map_err(|e| e.to_string())?;
        let rep = verify_lift(&cert);
        let took = started.elapsed();
        ensure(rep.all_passed(), || format!("{ms:?}: {}", rep.to_string().replace('\n', "; ")))?;
        ensure(took < Duration::from_secs(60), || format!("{ms:?} took {took:?}"))?;
        lines.push(format!("{ms:?}/c={}: 3^{}", d.c, originals.len()));
    }
    Ok(lines.join(", "))
}

fn criterion_6() -> Outcome {
    let mut checked = 0;
    for (ms, opts) in design_suite() {
        let d = design(&ms, &opts)?;
        let t = d.doubled_multiset();
        let cert = d.certificate_at_p();
        ensure(cert.e == 1, || format!("{ms:?}: e = {} at p", cert.e))?;
        ensure(cert.z == d.s[1], || format!("{ms:?}: witness at p is not s_1"))?;
        let ok = certify_split_valuation(&t, d.p, &cert).map_err(|e| e.to_string())?;
        let v = split_fixdiv_valuation(&t, d.p).map_err(|e| e.to_string())?;
        ensure(ok && v == 1, || format!("{ms:?}: at p={} certified={ok} valuation={v}", d.p))?;
        checked += 1;
        for &(q, e) in &d.extra {
            let cert = d.certificate_at_q(q).map_err(|e| e.to_string())?;
            ensure(cert.e == e && cert.z == BigInt::one(), || {
                format!("{ms:?}: certificate at {q} has e={} z={}", cert.e, cert.z)
            })?;
            let ok = certify_split_valuation(&t, q, &cert).map_err(|e| e.to_string())?;
            let v = split_fixdiv_valuation(&t, q).map_err(|e| e.to_string())?;
            ensure(ok && v == e, || format!("{ms:?}: at q={q} certified={ok} valuation={v}, e={e}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} certificates over {} designs", design_suite().len()))
}

fn criterion_7() -> Outcome {
    let mut lines = Vec::new();
    for n in 1..=3u32 {
        let started = Instant::now();
        let t = construct_transfer(n, &TransferOptions::default()).map_err(|e| format!("n={n}: {e}"))?;
        let rep = reload_and_verify(&Artifact::Transfer(t.clone()))?;
        ensure(rep.all_passed(), || format!("n={n}: {}", rep.to_string().replace('\n', "; ")))?;
        let mut expected = vec![2, n as usize + 1];
        expected.dedup();
        ensure(t.xh_lengths == expected, || format!("n={n}: lengths {:?}", t.xh_lengths))?;
        let took = started.elapsed();
        ensure(took < Duration::from_secs(60), || format!("n={n} took {took:?}"))?;
        lines.push(format!("n={n} c={} lengths={:?}", t.c, t.xh_lengths));
    }
    Ok(lines.join(", "))
}

fn with_constant_shift(f: &ZPoly, by: i64) -> ZPoly {
    let mut coeffs = f.coeffs().to_vec();
    coeffs[0] += by;
    ZPoly::new(coeffs)
}

fn criterion_8() -> Outcome {
    let base = prescribed(&[1, 1], &DesignOptions::default())?;
    let rep = verify_prescribed(&base);
    ensure(rep.all_passed(), || format!("unmutated artifact fails: {rep}"))?;
    let transfer = construct_transfer(2, &TransferOptions::default()).map_err(|e| e.to_string())?;
    let mut detected = Vec::new();

    let mut expect = |label: &str, rep: Report, check: &str| -> Result<(), String> {
        ensure(rep.failed_on(check), || {
            format!("{label}: check {check} did not fail ({})", rep.to_string().replace('\n', "; "))
        })?;
        detected.push(format!("{label}->{check}"));
        Ok(())
    };

    // wrong c
    let mut a = base.clone();
    let p = a.design.as_ref().unwrap().p;
    a.c *= p;
    a.h = RationalPoly::new(a.h.num().clone(), a.c.clone()).map_err(|e| e.to_string())?;
    expect("wrong c", verify_prescribed(&a), "fixdiv-gcd")?;

    // deleted factorization
    let mut a = base.clone();
    a.factorizations.pop();
    expect("deleted factorization", verify_prescribed(&a), "oracle")?;

    // perturbed a_1
    let mut t = transfer.clone();
    t.a[0] += 1;
    expect("perturbed a1", verify_transfer(&t), "identity")?;

    // broken condition (2) on a design with composite c
    let mut a = prescribed(&[1, 1], &composite())?;
    let d = a.design.as_mut().unwrap();
    let last = d.s.len() - 1;
    d.s[last] += 1;
    expect("broken condition (2)", verify_prescribed(&a), "cond2")?;

    // non-Eisenstein lift: a part replaced by the polynomial it was lifted from
    let mut a = base.clone();
    let cert = a.lift.as_mut().unwrap();
    cert.lifted[1] = cert.originals[1].clone();
    cert.offsets[1] = vec![BigInt::from(0); cert.offsets[1].len()];
    a.parts[1] = cert.lifted[1].clone();
    a.h = RationalPoly::new(intval::poly::poly_product(&a.parts), a.c.clone()).map_err(|e| e.to_string())?;
    expect("non-Eisenstein lift", verify_prescribed(&a), "eisenstein")?;
    let mut t = transfer.clone();
    t.big_f = t.f.clone();
    expect("unlifted F", verify_transfer(&t), "F-eisenstein")?;

    // altered constant term of a lifted part, with the recorded offset
    // adjusted so the certificate stays internally consistent
    let mut a = base.clone();
    let cert = a.lift.as_mut().unwrap();
    cert.lifted[2] = with_constant_shift(&cert.lifted[2], 1);
    cert.offsets[2][0] += 1;
    a.parts[2] = cert.lifted[2].clone();
    a.h = RationalPoly::new(intval::poly::poly_product(&a.parts), a.c.clone()).map_err(|e| e.to_string())?;
    let rep = verify_prescribed(&a);
    ensure(!rep.failed_on("lift/shape"), || "offset adjustment left the shape check failing".into())?;
    expect("altered constant term", rep, "lift/congruence")?;

    Ok(detected.join(", "))
}

/// Writes to the process stdout handle, which the test harness does not
/// capture, so the lines appear in a plain `cargo test` run.
fn report_line(line: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("1 prescribed lengths {2,2}", criterion_1, 10),
        ("2 prescribed lengths {2,3}", criterion_2, 60),
        ("3 prescribed lengths {2,2,3}", criterion_3, 600),
        ("4 fixed-divisor oracle equivalence", criterion_4, 10),
        ("5 lift preservation", criterion_5, 600),
        ("6 split valuation certificates", criterion_6, 600),
        ("7 transfer family n=1,2,3", criterion_7, 180),
        ("8 mutation suite", criterion_8, 600),
    ];
    report_line("");
    let mut failed = Vec::new();
    for (name, run, budget) in criteria {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = started.elapsed().as_secs_f64();
        let outcome = match outcome {
            Ok(_) if secs > budget as f64 => Err(format!("took {secs:.2}s, budget {budget}s")),
            other => other,
        };
        match outcome {
            Ok(detail) => report_line(&format!("PASS {name} ({secs:.2}s): {detail}")),
            Err(why) => {
                report_line(&format!("FAIL {name} ({secs:.2}s): {why}"));
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
