//! The characteristic polynomial `Φ(ζ, μ) = Σ_ℓ C_ℓ(μ) ζ^ℓ` and its
//! exceptional set `E = {μ : C_k(μ) = 0}`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::method::MultistepScheme;
use crate::poly::{horner, RationalPoly};
use crate::rational::ExactComplex;
use crate::rootfind;
use crate::tolerance::Tolerances;

/// `Φ` stored as `k+1` exact polynomials in μ, `c[ℓ] = C_ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharPoly {
    name: String,
    s: usize,
    c: Vec<RationalPoly>,
    c_f64: Vec<Vec<f64>>,
    /// `a_f64[j][ℓ]`, used when Φ is viewed as a polynomial in μ.
    a_f64: Vec<Vec<f64>>,
}

impl CharPoly {
    pub fn new(scheme: &MultistepScheme) -> Self {
        let a = scheme.coefficients();
        let c: Vec<RationalPoly> = (0..=scheme.k())
            .map(|l| RationalPoly::new(a.iter().map(|row| row[l].clone()).collect()))
            .collect();
        let c_f64 = c.iter().map(RationalPoly::to_f64).collect();
        let a_f64 = a
            .iter()
            .map(|row| row.iter().map(crate::rational::rational_to_f64).collect())
            .collect();
        Self { name: scheme.name().into(), s: scheme.s(), c, c_f64, a_f64 }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn k(&self) -> usize {
        self.c.len() - 1
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// `C_0 .. C_k`.
    pub fn coefficient_polys(&self) -> &[RationalPoly] {
        &self.c
    }

    pub fn leading(&self) -> &RationalPoly {
        &self.c[self.k()]
    }

    pub fn is_implicit(&self) -> bool {
        self.leading().degree().unwrap_or(0) >= 1
    }

    /// `C_0(μ) .. C_k(μ)` by Horner's rule.
    pub fn coefficients_at(&self, mu: Complex64) -> Vec<Complex64> {
        self.c_f64.iter().map(|p| horner(p, mu)).collect()
    }

    pub fn coefficients_at_exact(&self, mu: &ExactComplex) -> Vec<ExactComplex> {
        self.c.iter().map(|p| p.eval_exact(mu)).collect()
    }

    pub fn eval(&self, zeta: Complex64, mu: Complex64) -> Complex64 {
        crate::poly::horner_complex(&self.coefficients_at(mu), zeta)
    }

    /// `Φ(ζ, ·)` as a polynomial in μ: entry `j` is `Σ_ℓ a[j][ℓ] ζ^ℓ`.
    pub fn mu_polynomial_at(&self, zeta: Complex64) -> Vec<Complex64> {
        self.a_f64.iter().map(|row| horner(row, zeta)).collect()
    }

    /// `Σ_{j,ℓ} |a[j][ℓ]| |μ|^j |ζ|^ℓ`, the natural scale for residuals of Φ.
    pub fn magnitude(&self, zeta: Complex64, mu: Complex64) -> f64 {
        let (zr, mr) = (zeta.norm(), mu.norm());
        let mut total = 0.0;
        let mut mu_pow = 1.0;
        for row in &self.a_f64 {
            let mut z_pow = 1.0;
            for &a in row {
                total += a.abs() * mu_pow * z_pow;
                z_pow *= zr;
            }
            mu_pow *= mr;
        }
        total
    }

    /// Effective degree of `Φ(·, μ)`: the largest ℓ with
    /// `|C_ℓ(μ)| > tau_drop · max_m |C_m(μ)|`, or -1 if all vanish.
    pub fn degree_at(&self, mu: Complex64, tau_drop: f64) -> isize {
        degree_of(&self.coefficients_at(mu), tau_drop)
    }

    /// Exact degree at a rational point: largest ℓ with `C_ℓ(μ) ≠ 0`.
    pub fn degree_at_exact(&self, mu: &ExactComplex) -> isize {
        self.coefficients_at_exact(mu)
            .iter()
            .rposition(|v| !v.is_zero())
            .map_or(-1, |i| i as isize)
    }
}

/// Relative-threshold degree of a coefficient list.
pub fn degree_of(coeffs: &[Complex64], tau_drop: f64) -> isize {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return -1;
    }
    coeffs
        .iter()
        .rposition(|c| c.norm() > tau_drop * scale)
        .map_or(-1, |i| i as isize)
}

/// Exact description of an exceptional point when `C_k` has degree ≤ 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClosedForm {
    /// Gaussian rational `re + i·im`.
    Rational(ExactComplex),
    /// `(numer + coeff·√radicand) / denom` with squarefree `radicand`,
    /// `|radicand| > 1`; a negative radicand means `i√|radicand|`.
    Surd { numer: BigInt, coeff: BigInt, radicand: BigInt, denom: BigInt },
}

impl ClosedForm {
    pub fn to_complex64(&self) -> Complex64 {
        match self {
            ClosedForm::Rational(z) => z.to_complex64(),
            ClosedForm::Surd { numer, coeff, radicand, denom } => {
                let d = denom.to_f64().unwrap();
                let center = numer.to_f64().unwrap() / d;
                let offset = coeff.to_f64().unwrap() * radicand.abs().to_f64().unwrap().sqrt() / d;
                if radicand.is_negative() {
                    Complex64::new(center, offset)
                } else {
                    Complex64::new(center + offset, 0.0)
                }
            }
        }
    }

    /// The point as a Gaussian rational, when it is one.
    pub fn as_exact(&self) -> Option<&ExactComplex> {
        match self {
            ClosedForm::Rational(z) => Some(z),
            ClosedForm::Surd { .. } => None,
        }
    }
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClosedForm::Rational(z) => write!(f, "{z}"),
            ClosedForm::Surd { numer, coeff, radicand, denom } => {
                let unit = if radicand.is_negative() { "i" } else { "" };
                let sign = if coeff.is_negative() { '-' } else { '+' };
                let mag = coeff.abs();
                let mag = if mag.is_one() { String::new() } else { alloc::format!("{mag}") };
                let surd = alloc::format!("{mag}{unit}\u{221a}{}", radicand.abs());
                let body = if numer.is_zero() {
                    if coeff.is_negative() { alloc::format!("-{surd}") } else { surd }
                } else {
                    alloc::format!("{numer} {sign} {surd}")
                };
                if denom.is_one() {
                    f.write_str(&body)
                } else {
                    write!(f, "({body})/{denom}")
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExceptionalPoint {
    pub value: Complex64,
    pub exact: Option<ClosedForm>,
}

/// Zeros of the leading coefficient `C_k`, multiplicities collapsed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExceptionalSet {
    pub points: Vec<ExceptionalPoint>,
}

impl ExceptionalSet {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn values(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.points.iter().map(|p| p.value)
    }

    /// Index of and distance to the nearest exceptional point.
    pub fn nearest(&self, mu: Complex64) -> Option<(usize, f64)> {
        self.points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, (p.value - mu).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Computes `E` from the exact coefficients of `C_k`: closed forms up to
/// degree two, the numeric root finder above that.
pub fn exceptional_set(cp: &CharPoly, tol: &Tolerances) -> ExceptionalSet {
    let lead = cp.leading();
    let degree = lead.degree().unwrap_or(0);
    let mut points: Vec<ExceptionalPoint> = match degree {
        0 => Vec::new(),
        1 => {
            let root = -(lead.coeff(0) / lead.coeff(1));
            let form = ClosedForm::Rational(ExactComplex::real(root));
            alloc::vec![ExceptionalPoint { value: form.to_complex64(), exact: Some(form) }]
        }
        2 => quadratic_roots(lead)
            .into_iter()
            .map(|form| ExceptionalPoint { value: form.to_complex64(), exact: Some(form) })
            .collect(),
        _ => {
            let coeffs: Vec<Complex64> = lead.to_f64().into_iter().map(|c| Complex64::new(c, 0.0)).collect();
            // The residual contract is checked inside; conditioning for s ≤ 6 is mild.
            let set = rootfind::roots(&coeffs, tol.residual, tol.separation)
                .unwrap_or_else(|err| match err {
                    rootfind::RootError::NoConvergence { best, .. } => {
                        let clusters = rootfind::cluster(&best, tol.separation);
                        rootfind::RootSet { roots: best, clusters, max_residual: f64::NAN }
                    }
                    _ => rootfind::RootSet::empty(),
                });
            set.clusters
                .iter()
                .map(|c| ExceptionalPoint { value: c.center, exact: None })
                .collect()
        }
    };
    points.sort_by(|a, b| a.value.re.total_cmp(&b.value.re).then(a.value.im.total_cmp(&b.value.im)));
    ExceptionalSet { points }
}

/// Roots of `c0 + c1 x + c2 x²` in exact closed form.
fn quadratic_roots(p: &RationalPoly) -> Vec<ClosedForm> {
    // Clear denominators and content so that a, b, c are coprime integers with a > 0.
    let lcm = p.coeffs().iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = p.coeffs().iter().map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let content = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    let sign = if ints[2].is_negative() { -BigInt::one() } else { BigInt::one() };
    let (c, b, a) = (&ints[0] / &content * &sign, &ints[1] / &content * &sign, &ints[2] / &content * &sign);

    let disc = &b * &b - BigInt::from(4) * &a * &c;
    let two_a = BigInt::from(2) * &a;
    if disc.is_zero() {
        let root = BigRational::new(-b, two_a);
        return alloc::vec![ClosedForm::Rational(ExactComplex::real(root))];
    }
    let (factor, radicand) = split_square(&disc);
    if radicand.abs().is_one() {
        let center = BigRational::new(-b.clone(), two_a.clone());
        let offset = BigRational::new(factor, two_a);
        return if radicand.is_negative() {
            alloc::vec![
                ClosedForm::Rational(ExactComplex::new(center.clone(), -offset.clone())),
                ClosedForm::Rational(ExactComplex::new(center, offset)),
            ]
        } else {
            alloc::vec![
                ClosedForm::Rational(ExactComplex::real(&center - &offset)),
                ClosedForm::Rational(ExactComplex::real(center + offset)),
            ]
        };
    }
    let g = b.gcd(&factor).gcd(&two_a);
    let numer = -&b / &g;
    let coeff = &factor / &g;
    let denom = &two_a / &g;
    alloc::vec![
        ClosedForm::Surd { numer: numer.clone(), coeff: -coeff.clone(), radicand: radicand.clone(), denom: denom.clone() },
        ClosedForm::Surd { numer, coeff, radicand, denom },
    ]
}

/// Writes `n = factor² · radicand` with `radicand` squarefree (up to the
/// trial-division bound) and carrying the sign of `n`.
fn split_square(n: &BigInt) -> (BigInt, BigInt) {
    let negative = n.is_negative();
    let mut rest = n.abs();
    let mut factor = BigInt::one();
    let root = rest.sqrt();
    if &root * &root == rest {
        let unit = if negative { -BigInt::one() } else { BigInt::one() };
        return (root, unit);
    }
    let mut p = BigInt::from(2u32);
    let limit = BigInt::from(1_000_000u32);
    while &p * &p <= rest && p <= limit {
        let sq = &p * &p;
        while (&rest % &sq).is_zero() {
            rest /= &sq;
            factor *= &p;
        }
        p += 1;
    }
    if negative {
        rest = -rest;
    }
    (factor, rest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn cp(name: &str) -> CharPoly {
        CharPoly::new(&builtin(name).unwrap())
    }

    #[test]
    fn implicit_euler_coefficients() {
        let p = cp("implicit_euler");
        assert_eq!(p.coefficient_polys()[1], RationalPoly::from_i64(&[1, -1]));
        assert_eq!(p.coefficient_polys()[0], RationalPoly::from_i64(&[-1]));
    }

    #[test]
    fn bdf2_coefficients() {
        let p = cp("bdf2");
        assert_eq!(p.coefficient_polys()[2], RationalPoly::from_i64(&[3, -2]));
        assert_eq!(p.coefficient_polys()[1], RationalPoly::from_i64(&[-4]));
        assert_eq!(p.coefficient_polys()[0], RationalPoly::from_i64(&[1]));
    }

    #[test]
    fn enright3_low_coefficients() {
        let p = cp("enright3");
        assert_eq!(p.coefficient_polys()[1], RationalPoly::new(alloc::vec![q(0, 1), q(1, 20)]));
        assert_eq!(p.coefficient_polys()[0], RationalPoly::new(alloc::vec![q(0, 1), q(-7, 1080)]));
        assert_eq!(p.coefficient_polys()[2], RationalPoly::new(alloc::vec![q(-1, 1), q(-19, 40)]));
    }

    #[test]
    fn coefficients_at_examples() {
        let ie = cp("implicit_euler");
        let one = ExactComplex::real(q(1, 1));
        assert_eq!(ie.coefficients_at_exact(&one), alloc::vec![ExactComplex::real(q(-1, 1)), ExactComplex::zero()]);
        let bdf2 = cp("bdf2");
        let mu = ExactComplex::real(q(3, 2));
        assert_eq!(
            bdf2.coefficients_at_exact(&mu),
            alloc::vec![ExactComplex::real(q(1, 1)), ExactComplex::real(q(-4, 1)), ExactComplex::zero()]
        );
        let at_zero = bdf2.coefficients_at(Complex64::new(0.0, 0.0));
        assert_eq!(at_zero, alloc::vec![Complex64::new(1.0, 0.0), Complex64::new(-4.0, 0.0), Complex64::new(3.0, 0.0)]);
        assert_eq!(bdf2.coefficients_at(Complex64::new(1.5, 0.0))[2], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn exceptional_sets_of_the_examples() {
        let tol = Tolerances::default();
        let e = exceptional_set(&cp("implicit_euler"), &tol);
        assert_eq!(e.len(), 1);
        assert_eq!(e.points[0].exact, Some(ClosedForm::Rational(ExactComplex::real(q(1, 1)))));

        let e = exceptional_set(&cp("bdf2"), &tol);
        assert_eq!(e.points[0].exact, Some(ClosedForm::Rational(ExactComplex::real(q(3, 2)))));
        assert_eq!(alloc::format!("{}", e.points[0].exact.as_ref().unwrap()), "3/2");

        let e = exceptional_set(&cp("enright3"), &tol);
        assert_eq!(e.len(), 2);
        let shown: Vec<String> = e.points.iter().map(|p| alloc::format!("{}", p.exact.as_ref().unwrap())).collect();
        assert_eq!(shown, ["(307 - i\u{221a}28871)/114", "(307 + i\u{221a}28871)/114"]);
        // Closed form evaluated independently.
        let re = 307.0 / 114.0;
        let im = 28871f64.sqrt() / 114.0;
        assert!((e.points[1].value - Complex64::new(re, im)).norm() < 1e-14);
        assert!((e.points[1].value - Complex64::new(2.692982, 1.490480)).norm() < 1e-6);

        assert!(exceptional_set(&cp("explicit_euler"), &tol).is_empty());
    }

    #[test]
    fn degree_at_examples() {
        let ie = cp("implicit_euler");
        assert_eq!(ie.degree_at(Complex64::new(1.0, 0.0), 1e-9), 0);
        let bdf2 = cp("bdf2");
        assert_eq!(bdf2.degree_at(Complex64::new(1.5, 0.0), 1e-9), 1);
        assert_eq!(bdf2.degree_at(Complex64::new(0.0, 0.0), 1e-9), 2);
        assert_eq!(degree_of(&[Complex64::new(0.0, 0.0)], 1e-9), -1);
    }

    #[test]
    fn quadratic_closed_forms() {
        // x² - 2 → ±√2.
        let p = RationalPoly::from_i64(&[-2, 0, 1]);
        let roots = quadratic_roots(&p);
        assert_eq!(alloc::format!("{}", roots[1]), "\u{221a}2");
        assert!((roots[1].to_complex64().re - 2f64.sqrt()).abs() < 1e-15);
        // x² + 1 → ±i, Gaussian rationals.
        let p = RationalPoly::from_i64(&[1, 0, 1]);
        let roots = quadratic_roots(&p);
        assert_eq!(roots[1].as_exact(), Some(&ExactComplex::new(q(0, 1), q(1, 1))));
        // 4x² - 12x + 9 → 3/2 double, collapsed.
        let p = RationalPoly::from_i64(&[9, -12, 4]);
        assert_eq!(quadratic_roots(&p).len(), 1);
        // 2x² - 2x - 4 = 2(x-2)(x+1).
        let p = RationalPoly::from_i64(&[-4, -2, 2]);
        let roots = quadratic_roots(&p);
        assert_eq!(roots[0].as_exact().unwrap().re, q(-1, 1));
        assert_eq!(roots[1].as_exact().unwrap().re, q(2, 1));
        // 8 = 2² · 2 with a leftover square factor.
        assert_eq!(split_square(&BigInt::from(-72)), (BigInt::from(6), BigInt::from(-2)));
    }
}
