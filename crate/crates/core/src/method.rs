//! The method model: an `(s+1) × (k+1)` matrix of exact coefficients
//! `a[j][ℓ]` multiplying `μ^j y_{n+ℓ}` in the recurrence obtained from the
//! linear test equation.

use alloc::string::String;
use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::Zero;

use crate::poly::RationalPoly;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemeError {
    #[error("step count k must be at least 1")]
    NoSteps,
    #[error("degree in mu s must be at least 1")]
    NoMuDependence,
    #[error("row {row} has {found} entries, expected k+1 = {expected}")]
    RowLength { row: usize, found: usize, expected: usize },
    #[error("leading alpha vanishes (a[0][k] = 0)")]
    LeadingAlphaVanishes,
    #[error("scheme is not a linear multistep view: s = {0}, expected 1")]
    NotLinearMultistep(usize),
}

/// A linear multistep or multiderivative multistep method.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultistepScheme {
    name: String,
    a: Vec<Vec<BigRational>>,
}

impl MultistepScheme {
    /// Builds a scheme from rows `a[0..=s]`, each with `k+1` entries.
    pub fn new(name: impl Into<String>, a: Vec<Vec<BigRational>>) -> Result<Self, SchemeError> {
        if a.len() < 2 {
            return Err(SchemeError::NoMuDependence);
        }
        let width = a[0].len();
        if width < 2 {
            return Err(SchemeError::NoSteps);
        }
        for (row, entries) in a.iter().enumerate() {
            if entries.len() != width {
                return Err(SchemeError::RowLength { row, found: entries.len(), expected: width });
            }
        }
        // a[0][k] != 0 also covers the weaker requirement that some a[j][k] is nonzero.
        if a[0][width - 1].is_zero() {
            return Err(SchemeError::LeadingAlphaVanishes);
        }
        Ok(Self { name: name.into(), a })
    }

    /// Linear multistep form `Σ α_ℓ y_{n+ℓ} - h Σ β_ℓ f_{n+ℓ} = 0`, so that
    /// `Φ = ρ - μσ`.
    pub fn from_lmm(name: impl Into<String>, alpha: Vec<BigRational>, beta: Vec<BigRational>) -> Result<Self, SchemeError> {
        let minus_beta = beta.into_iter().map(|b| -b).collect();
        Self::new(name, alloc::vec![alpha, minus_beta])
    }

    /// Second-derivative form, adding `-h² Σ γ_ℓ g_{n+ℓ}`.
    pub fn from_second_derivative(
        name: impl Into<String>,
        alpha: Vec<BigRational>,
        beta: Vec<BigRational>,
        gamma: Vec<BigRational>,
    ) -> Result<Self, SchemeError> {
        let minus_beta = beta.into_iter().map(|b| -b).collect();
        let minus_gamma = gamma.into_iter().map(|g| -g).collect();
        Self::new(name, alloc::vec![alpha, minus_beta, minus_gamma])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of steps.
    pub fn k(&self) -> usize {
        self.a[0].len() - 1
    }

    /// Highest power of μ.
    pub fn s(&self) -> usize {
        self.a.len() - 1
    }

    pub fn coefficients(&self) -> &[Vec<BigRational>] {
        &self.a
    }

    pub fn coefficient(&self, j: usize, l: usize) -> &BigRational {
        &self.a[j][l]
    }

    /// Leading coefficient `C_k` as a polynomial in μ.
    pub fn leading_polynomial(&self) -> RationalPoly {
        let k = self.k();
        RationalPoly::new(self.a.iter().map(|row| row[k].clone()).collect())
    }

    /// Implicit iff `C_k(μ)` actually depends on μ.
    pub fn is_implicit(&self) -> bool {
        self.leading_polynomial().degree().unwrap_or(0) >= 1
    }

    /// `ρ(1) = Σ_ℓ a[0][ℓ] = 0`.
    pub fn is_consistent(&self) -> bool {
        self.a[0].iter().fold(BigRational::zero(), |acc, c| acc + c).is_zero()
    }

    /// Multiplies every coefficient by `factor` (nonzero); the characteristic
    /// polynomial changes only by that constant.
    pub fn scaled(&self, factor: &BigRational) -> Self {
        assert!(!factor.is_zero(), "scale factor must be nonzero");
        Self {
            name: self.name.clone(),
            a: self.a.iter().map(|row| row.iter().map(|c| c * factor).collect()).collect(),
        }
    }

    pub fn lmm_view(&self) -> Result<LmmView, SchemeError> {
        LmmView::new(self)
    }
}

/// `ρ` and `σ` of a scheme with `s = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LmmView {
    rho: RationalPoly,
    sigma: RationalPoly,
    k: usize,
}

impl LmmView {
    pub fn new(scheme: &MultistepScheme) -> Result<Self, SchemeError> {
        if scheme.s() != 1 {
            return Err(SchemeError::NotLinearMultistep(scheme.s()));
        }
        let a = scheme.coefficients();
        Ok(Self {
            rho: RationalPoly::new(a[0].clone()),
            sigma: RationalPoly::new(a[1].iter().map(|c| -c).collect()),
            k: scheme.k(),
        })
    }

    pub fn rho(&self) -> &RationalPoly {
        &self.rho
    }

    pub fn sigma(&self) -> &RationalPoly {
        &self.sigma
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// True iff `ρ` and `σ` share no complex root, decided by the exact
    /// resultant. A vanishing `σ` counts as reducible.
    pub fn irreducible(&self) -> bool {
        !self.rho.resultant(&self.sigma).is_zero()
    }
}
