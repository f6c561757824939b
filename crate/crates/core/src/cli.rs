//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a verification or computation fails,
//! 2 on malformed arguments or unreadable input.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use serde::Serialize;

use crate::construct::{
    construct_prescribed, construct_transfer, Artifact, TransferOptions,
};
use crate::design::{DesignOptions, LengthSpec};
use crate::error::Error;
use crate::factor::{
    enumerate_factorizations, enumerate_factorizations_bruteforce, lengths_multiset, lengths_set,
    FactoredInput, Factorization,
};
use crate::json;
use crate::poly::{fixed_divisor, RationalPoly, ZPoly};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "intval", version, about = "Factorizations in the ring of integer-valued polynomials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the fixed divisor of a polynomial such as "[0,-1,1]".
    Fixdiv { poly: String },
    /// Print whether "[c0,c1,...]/den" lies in Int(Z).
    Member { poly: String },
    /// Build an element whose set of factorization lengths is the given set.
    ConstructLengths {
        /// Comma-separated lengths, each at least 2, e.g. "2,3,5".
        lengths: String,
        /// Use this prime instead of the smallest admissible one.
        #[arg(long)]
        prime: Option<u64>,
        /// Extra prime-power factor of the denominator, e.g. "3^2". Repeatable.
        #[arg(long = "c-extra", value_name = "Q^E")]
        c_extra: Vec<String>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Print the artifact JSON to standard output.
        #[arg(long)]
        json: bool,
    },
    /// Build the witness x·H = G·(x - a_1)⋯(x - a_n).
    ConstructTransfer {
        n: u32,
        /// Comma-separated odd primes p_1..p_n.
        #[arg(long)]
        primes: Option<String>,
        #[arg(long = "c-extra", value_name = "Q^E")]
        c_extra: Vec<String>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Enumerate the factorizations of (f_0 ⋯ f_{n-1}) / den.
    Factorize {
        /// File with the parts: a JSON array of polynomial strings or
        /// coefficient arrays, or one polynomial per line.
        #[arg(long, value_name = "FILE")]
        parts: PathBuf,
        #[arg(long, value_name = "C")]
        den: String,
        /// Use the brute-force enumerator.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        json: bool,
    },
    /// Re-run every check on an artifact file.
    Verify {
        file: PathBuf,
        /// Print only failing checks.
        #[arg(long)]
        quiet: bool,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_)
            | Error::Parse { .. }
            | Error::NotPrime(_)
            | Error::Io(_)
            | Error::Json(_) => EXIT_USAGE,
            _ => EXIT_FAILED,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

/// Parses `argv` (including the program name) and executes the command.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let line = f.message.replace('\n', " ");
            let _ = writeln!(err, "error: {line}");
            f.code
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Fixdiv { poly } => {
            let g: RationalPoly = poly.parse()?;
            let d = if g.den() == &BigInt::from(1) {
                fixed_divisor(g.num())?
            } else {
                g.fixed_divisor()?
            };
            writeln!(out, "{d}")?;
            Ok(EXIT_OK)
        }
        Command::Member { poly } => {
            let g: RationalPoly = poly.parse()?;
            writeln!(out, "{}", g.is_int_valued())?;
            Ok(EXIT_OK)
        }
        Command::ConstructLengths {
            lengths,
            prime,
            c_extra,
            out: path,
            json,
        } => {
            let ks = parse_u32_list(&lengths)?;
            let spec = LengthSpec::from_lengths(&ks)?;
            let opts = DesignOptions {
                prime,
                c_extra: parse_prime_powers(&c_extra)?,
            };
            let a = construct_prescribed(&spec, &opts)?;
            writeln!(
                out,
                "n={} lengths={} degree={} factorizations={}",
                spec.n(),
                list(&a.lengths),
                a.degree(),
                a.factorizations.len()
            )?;
            emit(Artifact::Prescribed(a), path.as_deref(), json, out)?;
            Ok(EXIT_OK)
        }
        Command::ConstructTransfer {
            n,
            primes,
            c_extra,
            out: path,
            json,
        } => {
            let opts = TransferOptions {
                primes: primes.as_deref().map(parse_u64_list).transpose()?,
                c_extra: parse_prime_powers(&c_extra)?,
            };
            let t = construct_transfer(n, &opts)?;
            writeln!(
                out,
                "n={} c={} degree={} xH_lengths={} factorizations={}",
                t.n,
                t.c,
                t.h.degree().unwrap_or(0),
                list(&t.xh_lengths),
                t.xh_factorizations.len()
            )?;
            emit(Artifact::Transfer(t), path.as_deref(), json, out)?;
            Ok(EXIT_OK)
        }
        Command::Factorize {
            parts,
            den,
            oracle,
            json,
        } => {
            let text = std::fs::read_to_string(&parts)?;
            let polys = parse_parts(&text)?;
            let c: BigInt = den
                .trim()
                .parse()
                .map_err(|_| usage(format!("invalid denominator {den:?}")))?;
            let input = FactoredInput::new(polys, c)?;
            let fs = if oracle {
                enumerate_factorizations_bruteforce(&input)?
            } else {
                enumerate_factorizations(&input)?
            };
            if json {
                let doc = FactorizeOutput {
                    route: if oracle { "oracle" } else { "lemma" },
                    c: input.c().clone(),
                    parts: input.parts().to_vec(),
                    lengths: lengths_multiset(&fs),
                    factorizations: fs,
                };
                writeln!(out, "{}", serde_json::to_string_pretty(&doc).map_err(Error::from)?)?;
            } else {
                for f in &fs {
                    writeln!(out, "{f}")?;
                }
                writeln!(
                    out,
                    "factorizations={} lengths={}",
                    fs.len(),
                    list(&lengths_set(&fs))
                )?;
            }
            Ok(EXIT_OK)
        }
        Command::Verify { file, quiet } => {
            let artifact = Artifact::load(&file)?;
            let rep = artifact.verify();
            for check in &rep.checks {
                if !quiet || !check.passed {
                    writeln!(out, "{}", check_line(check))?;
                }
            }
            let failed = rep.failures().count();
            if failed == 0 {
                writeln!(out, "verified: {} checks passed", rep.checks.len())?;
                Ok(EXIT_OK)
            } else {
                writeln!(out, "verification failed: {failed} of {} checks", rep.checks.len())?;
                Ok(EXIT_FAILED)
            }
        }
    }
}

fn list(xs: &[usize]) -> String {
    let items: Vec<String> = xs.iter().map(ToString::to_string).collect();
    format!("[{}]", items.join(","))
}

fn check_line(c: &crate::report::Check) -> String {
    if c.passed {
        format!("PASS {}", c.name)
    } else {
        format!("FAIL {}: {}", c.name, c.detail.replace('\n', " "))
    }
}

#[derive(Serialize)]
struct FactorizeOutput {
    route: &'static str,
    #[serde(with = "json::big")]
    c: BigInt,
    parts: Vec<ZPoly>,
    factorizations: Vec<Factorization>,
    lengths: Vec<usize>,
}

fn emit(a: Artifact, path: Option<&Path>, json: bool, out: &mut dyn Write) -> Result<(), Failure> {
    if let Some(p) = path {
        a.save(p)?;
    }
    if json {
        writeln!(out, "{}", a.to_json()?)?;
    }
    Ok(())
}

fn parse_u64_list(s: &str) -> Result<Vec<u64>, Failure> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| usage(format!("invalid integer {t:?} in {s:?}")))
        })
        .collect()
}

fn parse_u32_list(s: &str) -> Result<Vec<u32>, Failure> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| usage(format!("invalid integer {t:?} in {s:?}")))
        })
        .collect()
}

/// Parses "q^e" (or a bare "q", meaning e = 1).
fn parse_prime_powers(items: &[String]) -> Result<Vec<(u64, u32)>, Failure> {
    items
        .iter()
        .map(|item| {
            let bad = || usage(format!("invalid prime power {item:?}, expected q^e"));
            match item.split_once('^') {
                Some((q, e)) => Ok((
                    q.trim().parse().map_err(|_| bad())?,
                    e.trim().parse().map_err(|_| bad())?,
                )),
                None => Ok((item.trim().parse().map_err(|_| bad())?, 1)),
            }
        })
        .collect()
}

fn parse_parts(text: &str) -> Result<Vec<ZPoly>, Failure> {
    let trimmed = text.trim();
    if let Ok(strings) = serde_json::from_str::<Vec<String>>(trimmed) {
        return strings
            .iter()
            .map(|s| s.parse::<ZPoly>().map_err(Failure::from))
            .collect();
    }
    if let Ok(polys) = serde_json::from_str::<Vec<ZPoly>>(trimmed) {
        return Ok(polys);
    }
    let polys: Vec<ZPoly> = trimmed
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.parse::<ZPoly>().map_err(Failure::from))
        .collect::<Result<_, _>>()?;
    if polys.is_empty() {
        return Err(usage("parts file lists no polynomials"));
    }
    Ok(polys)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["intval"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn fixdiv_and_member() {
        assert_eq!(call(&["fixdiv", "[0,-1,1]"]), (0, "2\n".into(), String::new()));
        assert_eq!(call(&["member", "[0,-1,1]/2"]).1, "true\n");
        assert_eq!(call(&["member", "[0,1]/2"]).1, "false\n");
    }

    #[test]
    fn construct_summary() {
        let (code, out, _) = call(&["construct-lengths", "2,2"]);
        assert_eq!(code, 0);
        assert_eq!(out, "n=2 lengths=[2,2] degree=7 factorizations=2\n");
    }

    #[test]
    fn argument_errors_exit_two() {
        assert_eq!(call(&["construct-lengths", "1,2"]).0, 2);
        assert_eq!(call(&["construct-lengths", "2,x"]).0, 2);
        assert_eq!(call(&["construct-lengths", "2,2", "--c-extra", "3^"]).0, 2);
        assert_eq!(call(&["fixdiv", "[0,1"]).0, 2);
        assert_eq!(call(&["bogus"]).0, 2);
        let (code, _, err) = call(&["verify", "/nonexistent/file.json"]);
        assert_eq!(code, 2);
        assert_eq!(err.lines().count(), 1);
    }

    #[test]
    fn prime_powers() {
        assert_eq!(
            parse_prime_powers(&["3^2".into(), "7".into()]).ok().unwrap(),
            vec![(3, 2), (7, 1)]
        );
    }

    #[test]
    fn parts_formats() {
        let a = parse_parts("[\"[0,1]\", \"[-1,1]\"]").ok().unwrap();
        let b = parse_parts("[[\"0\",\"1\"],[-1,1]]").ok().unwrap();
        let c = parse_parts("[0,1]\n# comment\n[-1,1]\n").ok().unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }
}
