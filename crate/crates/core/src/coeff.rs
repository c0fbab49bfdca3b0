//! Exact coefficient ring: arbitrary-precision rationals and univariate
//! polynomials in the formal family parameter `c`.
//!
//! Every structure constant of the algebra is an integer and every operator
//! table entry is a rational multiple of a power of `c`, so identities that
//! are quadratic in the operator are decided exactly, for all values of `c`
//! at once.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always stored reduced with a positive
/// denominator.
pub type Rational = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Canonical text form: `p/q`, or `p` when `q = 1`.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(
            BigInt::from_str(s).map_err(|_| bad())?,
        )),
    }
}

/// Polynomial in `c` with rational coefficients. `coeffs[i]` multiplies
/// `c^i`; the zero polynomial is the empty vector and the last stored
/// coefficient is never zero, so structural equality is mathematical
/// equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct CoeffPoly {
    coeffs: Vec<Rational>,
}

impl CoeffPoly {
    pub fn zero() -> Self {
        CoeffPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(r: Rational) -> Self {
        Self::monomial(r, 0)
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(int(n))
    }

    /// `r * c^degree`.
    pub fn monomial(r: Rational, degree: usize) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![Rational::zero(); degree + 1];
        coeffs[degree] = r;
        CoeffPoly { coeffs }
    }

    /// The formal parameter `c` itself.
    pub fn c() -> Self {
        Self::monomial(Rational::one(), 1)
    }

    /// `r * c`.
    pub fn c_times(r: Rational) -> Self {
        Self::monomial(r, 1)
    }

    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        let mut p = CoeffPoly { coeffs };
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, degree: usize) -> Rational {
        self.coeffs.get(degree).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// If `self = r * c^degree` for a single monomial, return `(r, degree)`.
    pub fn as_monomial(&self) -> Option<(Rational, usize)> {
        let d = self.degree()?;
        if self.coeffs[..d].iter().all(Zero::is_zero) {
            Some((self.coeffs[d].clone(), d))
        } else {
            None
        }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        CoeffPoly {
            coeffs: self.coeffs.iter().map(|a| a * r).collect(),
        }
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self.scale(&int(n))
    }

    /// Horner evaluation at `c = v`.
    pub fn evaluate_at(&self, v: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, a| acc * v + a)
    }

    /// Substitute `c -> lambda * c`.
    pub fn rescale_parameter(&self, lambda: &Rational) -> Self {
        let mut pow = Rational::one();
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            coeffs.push(a * &pow);
            pow *= lambda;
        }
        Self::from_coeffs(coeffs)
    }
}

impl fmt::Display for CoeffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (d, a) in self.coeffs.iter().enumerate().rev() {
            if a.is_zero() {
                continue;
            }
            let sign = if a.is_negative() { "-" } else { "+" };
            if first {
                if a.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = a.abs();
            let mag_str = format_rational(&mag);
            match d {
                0 => f.write_str(&mag_str)?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "({mag_str})")?;
                    }
                    f.write_str("c")?;
                    if d > 1 {
                        write!(f, "^{d}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl Serialize for CoeffPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let strs: Vec<String> = self.coeffs.iter().map(format_rational).collect();
        strs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoeffPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let strs = Vec::<String>::deserialize(d)?;
        let coeffs = strs
            .iter()
            .map(|s| parse_rational(s).map_err(D::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(CoeffPoly::from_coeffs(coeffs))
    }
}

impl<'a> Add<&'a CoeffPoly> for &'a CoeffPoly {
    type Output = CoeffPoly;
    fn add(self, rhs: &CoeffPoly) -> CoeffPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|i| match (self.coeffs.get(i), rhs.coeffs.get(i)) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) | (None, Some(a)) => a.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        CoeffPoly::from_coeffs(coeffs)
    }
}

impl<'a> Sub<&'a CoeffPoly> for &'a CoeffPoly {
    type Output = CoeffPoly;
    fn sub(self, rhs: &CoeffPoly) -> CoeffPoly {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a CoeffPoly> for &'a CoeffPoly {
    type Output = CoeffPoly;
    fn mul(self, rhs: &CoeffPoly) -> CoeffPoly {
        if self.is_zero() || rhs.is_zero() {
            return CoeffPoly::zero();
        }
        let mut coeffs = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        CoeffPoly::from_coeffs(coeffs)
    }
}

impl Neg for &CoeffPoly {
    type Output = CoeffPoly;
    fn neg(self) -> CoeffPoly {
        CoeffPoly {
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }
}

impl Neg for CoeffPoly {
    type Output = CoeffPoly;
    fn neg(self) -> CoeffPoly {
        -&self
    }
}

impl Add for CoeffPoly {
    type Output = CoeffPoly;
    fn add(self, rhs: CoeffPoly) -> CoeffPoly {
        &self + &rhs
    }
}

impl Sub for CoeffPoly {
    type Output = CoeffPoly;
    fn sub(self, rhs: CoeffPoly) -> CoeffPoly {
        &self - &rhs
    }
}

impl Mul for CoeffPoly {
    type Output = CoeffPoly;
    fn mul(self, rhs: CoeffPoly) -> CoeffPoly {
        &self * &rhs
    }
}

impl AddAssign<&CoeffPoly> for CoeffPoly {
    fn add_assign(&mut self, rhs: &CoeffPoly) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&CoeffPoly> for CoeffPoly {
    fn sub_assign(&mut self, rhs: &CoeffPoly) {
        *self = &*self - rhs;
    }
}

impl From<Rational> for CoeffPoly {
    fn from(r: Rational) -> Self {
        CoeffPoly::constant(r)
    }
}

/// Serde adapter writing a `Rational` as its canonical `"p/q"` string.
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(D::Error::custom)
    }
}
