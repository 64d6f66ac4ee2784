//! Exact rational scalars and Gaussian-rational complex numbers.

use alloc::format;
use alloc::string::{String, ToString};
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};
use core::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Why a string could not be read as an exact rational.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("`{0}` is not an exact rational (expected an integer or p/q)")]
    NotRational(String),
    #[error("`{0}` has a zero denominator")]
    ZeroDenominator(String),
}

fn normalize_minus(s: &str) -> String {
    s.trim().replace('\u{2212}', "-")
}

/// Parses an integer or `p/q` literal. The result is always reduced with a
/// positive denominator.
pub fn parse_rational(text: &str) -> Result<BigRational, ParseRationalError> {
    let s = normalize_minus(text);
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.as_str(), "1"),
    };
    let num = parse_integer(num).ok_or_else(|| ParseRationalError::NotRational(text.to_string()))?;
    let den = parse_integer(den).ok_or_else(|| ParseRationalError::NotRational(text.to_string()))?;
    if den.is_zero() {
        return Err(ParseRationalError::ZeroDenominator(text.to_string()));
    }
    Ok(BigRational::new(num, den))
}

fn parse_integer(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix('+').unwrap_or(s);
    let body = digits.strip_prefix('-').unwrap_or(digits);
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    BigInt::from_str(digits).ok()
}

/// Parses a real literal exactly: integers, `p/q`, and finite decimals with
/// an optional exponent (`1.5`, `-2e-3`). Decimal literals are rationals, so
/// `1.5` becomes exactly `3/2`.
pub fn parse_exact_real(text: &str) -> Result<BigRational, ParseRationalError> {
    let s = normalize_minus(text);
    if s.contains('/') || !(s.contains('.') || s.contains('e') || s.contains('E')) {
        return parse_rational(&s);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], &s[pos + 1..]),
        None => (s.as_str(), "0"),
    };
    let exponent: i32 = exponent
        .strip_prefix('+')
        .unwrap_or(exponent)
        .parse()
        .map_err(|_| ParseRationalError::NotRational(text.to_string()))?;
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let negative = int_part.starts_with('-');
    let int_digits = int_part.trim_start_matches(['+', '-']);
    if int_digits.is_empty() && frac_part.is_empty() {
        return Err(ParseRationalError::NotRational(text.to_string()));
    }
    if !int_digits.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(ParseRationalError::NotRational(text.to_string()));
    }
    let joined = format!("{int_digits}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str(&joined).map_err(|_| ParseRationalError::NotRational(text.to_string()))?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Ok(if negative { -value } else { value })
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Formats as `p` or `p/q`.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A complex number with exact rational real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExactComplex {
    pub re: BigRational,
    pub im: BigRational,
}

impl ExactComplex {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        Self { re, im: BigRational::zero() }
    }

    pub fn zero() -> Self {
        Self::real(BigRational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    /// Parses `a`, `bi`, `a+bi`, `a-bi` where each part is an exact real
    /// literal accepted by [`parse_exact_real`]. `i` alone means `1i`.
    pub fn parse(text: &str) -> Result<Self, ParseRationalError> {
        let s: String = normalize_minus(text).chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(ParseRationalError::Empty);
        }
        let Some(body) = s.strip_suffix(['i', 'j']) else {
            return Ok(Self::real(parse_exact_real(&s)?));
        };
        // Split at the last sign that is not the leading sign and not part of an exponent.
        let bytes = body.as_bytes();
        let mut split = None;
        for idx in (1..bytes.len()).rev() {
            if (bytes[idx] == b'+' || bytes[idx] == b'-') && !matches!(bytes[idx - 1], b'e' | b'E') {
                split = Some(idx);
                break;
            }
        }
        let (re_text, im_text) = match split {
            Some(idx) => (&body[..idx], &body[idx..]),
            None => ("", body),
        };
        let im = match im_text {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            t => parse_exact_real(t)?,
        };
        let re = if re_text.is_empty() { BigRational::zero() } else { parse_exact_real(re_text)? };
        Ok(Self { re, im })
    }
}

impl fmt::Display for ExactComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return f.write_str(&format_rational(&self.re));
        }
        let sign = if self.im.is_negative() { '-' } else { '+' };
        let mag = format_rational(&self.im.abs());
        if self.re.is_zero() {
            if self.im.is_negative() {
                write!(f, "-{mag}i")
            } else {
                write!(f, "{mag}i")
            }
        } else {
            write!(f, "{}{sign}{mag}i", format_rational(&self.re))
        }
    }
}

impl Add for &ExactComplex {
    type Output = ExactComplex;
    fn add(self, rhs: Self) -> ExactComplex {
        ExactComplex::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &ExactComplex {
    type Output = ExactComplex;
    fn sub(self, rhs: Self) -> ExactComplex {
        ExactComplex::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul for &ExactComplex {
    type Output = ExactComplex;
    fn mul(self, rhs: Self) -> ExactComplex {
        ExactComplex::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for &ExactComplex {
    type Output = ExactComplex;
    fn neg(self) -> ExactComplex {
        ExactComplex::new(-&self.re, -&self.im)
    }
}
