//! Polynomials over Z and over Q written as `g / b`, with the fixed-divisor
//! calculus used to decide membership in Int(Z).

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json;

/// Polynomial with integer coefficients in ascending degree. Never carries
/// trailing zeros, so the zero polynomial is the empty vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ZPoly {
    coeffs: Vec<BigInt>,
}

impl ZPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        ZPoly { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        ZPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    /// The indeterminate `x`.
    pub fn x() -> Self {
        Self::from_i64s(&[0, 1])
    }

    /// `x - root`.
    pub fn linear(root: &BigInt) -> Self {
        Self::new(vec![-root.clone(), BigInt::one()])
    }

    /// `∏ (x - r)` over the multiset `roots`.
    pub fn from_roots<'a>(roots: impl IntoIterator<Item = &'a BigInt>) -> Self {
        roots
            .into_iter()
            .fold(Self::one(), |acc, r| &acc * &Self::linear(r))
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Coefficient of `x^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(One::is_one)
    }

    /// gcd of the coefficients (0 for the zero polynomial).
    pub fn content(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn eval(&self, a: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * a + c)
    }

    fn scale_down(&self, d: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|c| c / d).collect())
    }
}

impl Add for &ZPoly {
    type Output = ZPoly;
    fn add(self, rhs: &ZPoly) -> ZPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ZPoly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &ZPoly {
    type Output = ZPoly;
    fn sub(self, rhs: &ZPoly) -> ZPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ZPoly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &ZPoly {
    type Output = ZPoly;
    fn mul(self, rhs: &ZPoly) -> ZPoly {
        if self.is_zero() || rhs.is_zero() {
            return ZPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ZPoly::new(out)
    }
}

/// Product of a list of polynomials; the empty product is 1.
pub fn poly_product<'a>(fs: impl IntoIterator<Item = &'a ZPoly>) -> ZPoly {
    fs.into_iter().fold(ZPoly::one(), |acc, f| &acc * f)
}

/// Positive generator of the fixed divisor `d(g) = (g(a) : a ∈ Z)`.
///
/// The values at `0..=deg g` suffice: every value of `g` is an integer
/// combination of them (Newton forward differences), so their gcd divides
/// all values.
pub fn fixed_divisor(g: &ZPoly) -> Result<BigInt> {
    let deg = g.degree().ok_or(Error::ZeroPolynomial)?;
    Ok(gcd_of_values(g, 0..=deg as i64))
}

/// gcd of `g(a)` for `a ∈ [0, range]`. Independent check of
/// [`fixed_divisor`]; agrees with it whenever `range >= deg g`.
pub fn fixed_divisor_bruteforce(g: &ZPoly, range: u64) -> Result<BigInt> {
    let deg = g.degree().ok_or(Error::ZeroPolynomial)?;
    if (range as usize) < deg {
        return Err(Error::InvalidArgument(format!(
            "range {range} below degree {deg}"
        )));
    }
    Ok(gcd_of_values(g, 0..=range as i64))
}

fn gcd_of_values(g: &ZPoly, points: impl Iterator<Item = i64>) -> BigInt {
    let mut acc = BigInt::zero();
    for a in points {
        acc = acc.gcd(&g.eval(&BigInt::from(a)));
        if acc.is_one() {
            break;
        }
    }
    acc
}

/// Element `num / den` of Q[x], kept reduced: `gcd(content(num), den) = 1`
/// and `den >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalPoly {
    num: ZPoly,
    den: BigInt,
}

impl RationalPoly {
    pub fn new(num: ZPoly, den: BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidArgument("denominator must be nonzero".into()));
        }
        let (num, den) = if den.is_negative() {
            (&ZPoly::zero() - &num, -den)
        } else {
            (num, den)
        };
        if num.is_zero() {
            return Ok(RationalPoly { num, den: BigInt::one() });
        }
        let g = num.content().gcd(&den);
        Ok(RationalPoly {
            num: num.scale_down(&g),
            den: den / g,
        })
    }

    pub fn from_zpoly(num: ZPoly) -> Self {
        RationalPoly { num, den: BigInt::one() }
    }

    pub fn num(&self) -> &ZPoly {
        &self.num
    }

    pub fn den(&self) -> &BigInt {
        &self.den
    }

    pub fn degree(&self) -> Option<usize> {
        self.num.degree()
    }

    /// Exact value at `a` as a reduced fraction `(numerator, denominator)`.
    pub fn eval(&self, a: &BigInt) -> (BigInt, BigInt) {
        let v = self.num.eval(a);
        let g = v.gcd(&self.den);
        if g.is_zero() {
            return (v, self.den.clone());
        }
        (v / &g, &self.den / g)
    }

    /// Membership in Int(Z): `den | d(num)`.
    pub fn is_int_valued(&self) -> bool {
        if self.num.is_zero() {
            return true;
        }
        let d = fixed_divisor(&self.num).expect("nonzero numerator");
        d.is_multiple_of(&self.den)
    }

    /// Fixed divisor of an integer-valued polynomial.
    pub fn fixed_divisor(&self) -> Result<BigInt> {
        if !self.is_int_valued() {
            return Err(Error::NotIntegerValued);
        }
        Ok(fixed_divisor(&self.num)? / &self.den)
    }

    pub fn is_image_primitive(&self) -> Result<bool> {
        Ok(self.fixed_divisor()?.is_one())
    }
}

impl Mul for &RationalPoly {
    type Output = RationalPoly;
    fn mul(self, rhs: &RationalPoly) -> RationalPoly {
        RationalPoly::new(&self.num * &rhs.num, &self.den * &rhs.den)
            .expect("nonzero denominators")
    }
}

// Text format: ascending coefficient list, optional "/den", e.g. "[0,-1,1]/2".

impl fmt::Display for ZPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        if self.coeffs.is_empty() {
            write!(f, "0")?;
        }
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.num)?;
        if !self.den.is_one() {
            write!(f, "/{}", self.den)?;
        }
        Ok(())
    }
}

fn parse_err(input: &str, reason: impl Into<String>) -> Error {
    Error::Parse {
        input: input.to_string(),
        reason: reason.into(),
    }
}

impl FromStr for ZPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| parse_err(s, "expected [c0,c1,...]"))?;
        if body.trim().is_empty() {
            return Err(parse_err(s, "empty coefficient list"));
        }
        let coeffs = body
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<BigInt>()
                    .map_err(|_| parse_err(s, format!("bad integer {:?}", t.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ZPoly::new(coeffs))
    }
}

impl FromStr for RationalPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let close = s.rfind(']').ok_or_else(|| parse_err(s, "missing ]"))?;
        let (head, tail) = s.split_at(close + 1);
        let num: ZPoly = head.parse()?;
        let tail = tail.trim();
        let den = if tail.is_empty() {
            BigInt::one()
        } else {
            let d = tail
                .strip_prefix('/')
                .ok_or_else(|| parse_err(s, "expected /den after ]"))?
                .trim()
                .parse::<BigInt>()
                .map_err(|_| parse_err(s, "bad denominator"))?;
            if !d.is_positive() {
                return Err(parse_err(s, "denominator must be positive"));
            }
            d
        };
        RationalPoly::new(num, den)
    }
}

impl Serialize for ZPoly {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        json::big_vec::serialize(&self.coeffs, ser)
    }
}

impl<'de> Deserialize<'de> for ZPoly {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        Ok(ZPoly::new(json::big_vec::deserialize(de)?))
    }
}

#[derive(Serialize, Deserialize)]
struct RationalPolyRepr {
    num: ZPoly,
    #[serde(with = "json::big")]
    den: BigInt,
}

impl Serialize for RationalPoly {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        RationalPolyRepr {
            num: self.num.clone(),
            den: self.den.clone(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for RationalPoly {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let r = RationalPolyRepr::deserialize(de)?;
        if !r.den.is_positive() {
            return Err(serde::de::Error::custom("denominator must be positive"));
        }
        RationalPoly::new(r.num, r.den).map_err(serde::de::Error::custom)
    }
}
