//! Univariate polynomials with exact rational coefficients.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::rational::{format_rational, rational_to_f64, ExactComplex};

/// Coefficients in ascending powers; trailing zeros are trimmed so the zero
/// polynomial is the empty list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct RationalPoly {
    coeffs: Vec<BigRational>,
}

impl RationalPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Coefficient of `x^i`, zero beyond the degree.
    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(rational_to_f64).collect()
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_exact(&self, x: &ExactComplex) -> ExactComplex {
        self.coeffs.iter().rev().fold(ExactComplex::zero(), |acc, c| {
            let prod = &acc * x;
            ExactComplex::new(prod.re + c, prod.im)
        })
    }

    pub fn eval_complex(&self, x: Complex64) -> Complex64 {
        horner(&self.to_f64(), x)
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Euclidean division. Panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let d_deg = divisor.degree().expect("division by the zero polynomial");
        let lead = divisor.leading().unwrap();
        let mut rem = self.coeffs.clone();
        let Some(deg) = self.degree().filter(|&d| d >= d_deg) else {
            return (Self::zero(), self.clone());
        };
        let mut quot = vec![BigRational::zero(); deg - d_deg + 1];
        for shift in (0..=deg - d_deg).rev() {
            let factor = &rem[shift + d_deg] / lead;
            if factor.is_zero() {
                continue;
            }
            for (i, c) in divisor.coeffs.iter().enumerate() {
                rem[shift + i] -= &factor * c;
            }
            quot[shift] = factor;
        }
        rem.truncate(d_deg);
        (Self::new(quot), Self::new(rem))
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(lead) => self.scale(&lead.recip()),
            None => Self::zero(),
        }
    }

    /// Resultant as the determinant of the Sylvester matrix, computed by exact
    /// Gaussian elimination. Zero iff the polynomials share a complex root
    /// (or one of them is the zero polynomial).
    pub fn resultant(&self, other: &Self) -> BigRational {
        let (Some(m), Some(n)) = (self.degree(), other.degree()) else {
            return BigRational::zero();
        };
        if m == 0 && n == 0 {
            return BigRational::one();
        }
        let size = m + n;
        let mut rows = Vec::with_capacity(size);
        // Rows hold coefficients in descending powers.
        for shift in 0..n {
            let mut row = vec![BigRational::zero(); size];
            for (i, c) in self.coeffs.iter().rev().enumerate() {
                row[shift + i] = c.clone();
            }
            rows.push(row);
        }
        for shift in 0..m {
            let mut row = vec![BigRational::zero(); size];
            for (i, c) in other.coeffs.iter().rev().enumerate() {
                row[shift + i] = c.clone();
            }
            rows.push(row);
        }
        determinant(rows)
    }
}

fn determinant(mut rows: Vec<Vec<BigRational>>) -> BigRational {
    let n = rows.len();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !rows[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if pivot != col {
            rows.swap(pivot, col);
            det = -det;
        }
        let p = rows[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if rows[r][col].is_zero() {
                continue;
            }
            let factor = &rows[r][col] / &p;
            for c in col..n {
                let delta = &factor * &rows[col][c];
                rows[r][c] -= delta;
            }
        }
    }
    det
}

/// Horner evaluation with ascending coefficients.
pub fn horner(coeffs: &[f64], x: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

/// Horner evaluation with complex ascending coefficients.
pub fn horner_complex(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

impl RationalPoly {
    /// Ascending-power rendering such as `3 - 2*x`.
    pub fn to_string_in(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if out.is_empty() {
                if c.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(if c.is_negative() { " - " } else { " + " });
            }
            match (i, mag.is_one()) {
                (0, _) => out.push_str(&format_rational(&mag)),
                (_, true) => {}
                (_, false) => {
                    out.push_str(&format_rational(&mag));
                    out.push('*');
                }
            }
            match i {
                0 => {}
                1 => out.push_str(var),
                _ => out.push_str(&alloc::format!("{var}^{i}")),
            }
        }
        out
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_in("x"))
    }
}
