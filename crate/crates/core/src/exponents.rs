//! Lebesgue exponents stored exactly through their reciprocals.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::classifier::OperatorConfig;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExponentError {
    #[error("exponent must be positive, got {0}")]
    NonPositive(String),
    #[error("reciprocal must be non-negative, got {0}")]
    NegativeReciprocal(String),
    #[error("conjugate exponent is undefined for p = {0} < 1")]
    ConjugateUndefined(String),
    #[error("cannot parse rational literal {0:?}")]
    Parse(String),
}

/// Parses `"a/b"`, integers and plain decimals (`"0.25"`) into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational, ExponentError> {
    let s = text.trim();
    let err = || ExponentError::Parse(text.to_string());
    if s.is_empty() {
        return Err(err());
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if s.contains('/') || frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let negative = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        let numer = BigInt::from_str(&digits).map_err(|_| err())?;
        let denom = num::pow(BigInt::from(10), frac.len());
        let value = BigRational::new(numer, denom);
        return Ok(if negative { -value } else { value });
    }
    BigRational::from_str(s).map_err(|_| err())
}

/// Formats a rational as `"a/b"` or `"a"`.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// A Lebesgue exponent `p ∈ (0, ∞]`, held as `1/p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Exponent {
    recip: BigRational,
}

impl Exponent {
    pub fn from_recip(recip: BigRational) -> Result<Self, ExponentError> {
        if recip.is_negative() {
            return Err(ExponentError::NegativeReciprocal(format_rational(&recip)));
        }
        Ok(Self { recip })
    }

    pub fn new(p: BigRational) -> Result<Self, ExponentError> {
        if !p.is_positive() {
            return Err(ExponentError::NonPositive(format_rational(&p)));
        }
        Ok(Self { recip: p.recip() })
    }

    /// `p = num/den`; panics when the ratio is not positive.
    pub fn ratio(num: i64, den: i64) -> Self {
        Self::new(ratio(num, den)).expect("positive exponent")
    }

    pub fn integer(p: i64) -> Self {
        Self::ratio(p, 1)
    }

    /// Exponent with reciprocal `num/den`; panics when negative.
    pub fn with_recip(num: i64, den: i64) -> Self {
        Self::from_recip(ratio(num, den)).expect("non-negative reciprocal")
    }

    pub fn infinity() -> Self {
        Self {
            recip: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        Self {
            recip: BigRational::one(),
        }
    }

    pub fn recip(&self) -> &BigRational {
        &self.recip
    }

    /// `p` itself, or `None` for `p = ∞`.
    pub fn value(&self) -> Option<BigRational> {
        if self.recip.is_zero() {
            None
        } else {
            Some(self.recip.recip())
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.recip.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.recip.is_one()
    }

    /// `p ≥ 1`.
    pub fn at_least_one(&self) -> bool {
        self.recip <= BigRational::one()
    }

    /// `1 < p < ∞`.
    pub fn is_interior(&self) -> bool {
        self.recip.is_positive() && self.recip < BigRational::one()
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_infinite() {
            f64::INFINITY
        } else {
            1.0 / self.recip_f64()
        }
    }

    pub fn recip_f64(&self) -> f64 {
        self.recip.to_f64().unwrap_or(f64::NAN)
    }
}

/// Orders by the value of `p`, so `∞` is the largest exponent.
impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        other.recip.cmp(&self.recip)
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            None => write!(f, "inf"),
            Some(p) => write!(f, "{}", format_rational(&p)),
        }
    }
}

impl FromStr for Exponent {
    type Err = ExponentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Self::infinity()),
            _ => Self::new(parse_rational(s)?),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let lit = RationalLiteral::deserialize(deserializer)?;
        lit.text().parse().map_err(serde::de::Error::custom)
    }
}

/// A rational literal as it appears in JSON: a string or an integer.
#[derive(Deserialize)]
#[serde(untagged)]
pub(crate) enum RationalLiteral {
    Int(i64),
    Str(String),
}

impl RationalLiteral {
    pub(crate) fn text(&self) -> String {
        match self {
            RationalLiteral::Int(i) => i.to_string(),
            RationalLiteral::Str(s) => s.clone(),
        }
    }
}

pub(crate) fn serialize_rational<S: Serializer>(
    r: &BigRational,
    serializer: S,
) -> Result<S::Ok, S::Error> {
    serializer.serialize_str(&format_rational(r))
}

pub(crate) fn deserialize_rational<'de, D: Deserializer<'de>>(
    deserializer: D,
) -> Result<BigRational, D::Error> {
    let lit = RationalLiteral::deserialize(deserializer)?;
    parse_rational(&lit.text()).map_err(serde::de::Error::custom)
}

/// The order `λ` of the kernel.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Order {
    #[serde(
        serialize_with = "serialize_rational",
        deserialize_with = "deserialize_rational"
    )]
    pub lambda: BigRational,
}

impl Order {
    pub fn new(lambda: BigRational) -> Self {
        Self { lambda }
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::new(ratio(num, den))
    }

    pub fn to_f64(&self) -> f64 {
        self.lambda.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_rational(&self.lambda))
    }
}

impl FromStr for Order {
    type Err = ExponentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(Self::new(parse_rational(s)?))
    }
}

/// `p'` with `1/p + 1/p' = 1`.
pub fn conjugate(p: &Exponent) -> Result<Exponent, ExponentError> {
    if !p.at_least_one() {
        return Err(ExponentError::ConjugateUndefined(p.to_string()));
    }
    Exponent::from_recip(BigRational::one() - p.recip())
}

/// `λ = n1/p1' + n2/p2' + m/q`.
pub fn homogeneous_lambda(
    n1: usize,
    n2: usize,
    m: usize,
    p1: &Exponent,
    p2: &Exponent,
    q: &Exponent,
) -> Result<Order, ExponentError> {
    let c1 = conjugate(p1)?;
    let c2 = conjugate(p2)?;
    let dim = |n: usize| BigRational::from_integer(BigInt::from(n));
    Ok(Order::new(
        dim(n1) * c1.recip() + dim(n2) * c2.recip() + dim(m) * q.recip(),
    ))
}

/// Exact test of the homogeneity relation; false when an exponent is below one.
pub fn check_homogeneity(cfg: &OperatorConfig) -> bool {
    homogeneous_lambda(cfg.n1, cfg.n2, cfg.m, &cfg.p1, &cfg.p2, &cfg.q)
        .map(|l| l == cfg.lambda)
        .unwrap_or(false)
}
