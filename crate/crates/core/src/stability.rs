//! Point classification under the classical root condition and under the
//! refined definition that also demands full degree `k`, plus detection of
//! isolated stable points in the exceptional set and the comparison of
//! one-step methods with their Runge–Kutta stability function.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::fmt;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;

use crate::charpoly::{exceptional_set, CharPoly, ClosedForm, ExceptionalSet};
use crate::locus;
use crate::method::{LmmView, MultistepScheme, SchemeError};
use crate::poly::RationalPoly;
use crate::rational::ExactComplex;
use crate::region::{self, GridSpec, RegionError};
use crate::rootfind::{self, RootError, RootSet};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Stable,
    Unstable,
    /// A repeated root sits in the unit-circle band, where the strict
    /// inequality for multiple roots cannot be decided numerically.
    Marginal,
}

impl Status {
    pub fn is_stable(self) -> bool {
        self == Status::Stable
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Stable => "stable",
            Status::Unstable => "unstable",
            Status::Marginal => "marginal",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityVerdict {
    pub mu: Complex64,
    pub classical: Status,
    pub refined: Status,
    /// μ is (within τ_E of) an exceptional point.
    pub degenerate: bool,
    /// Degree of the polynomial the root condition was applied to; -1 when
    /// `Φ(·, μ)` vanishes identically.
    pub effective_degree: isize,
    pub roots: RootSet,
    pub max_modulus: f64,
}

impl StabilityVerdict {
    /// Stable only because `Φ(·, μ)` is a nonzero constant.
    pub fn is_vacuous(&self) -> bool {
        self.classical == Status::Stable && self.effective_degree == 0
    }

    fn conjugated(mut self) -> Self {
        self.mu = self.mu.conj();
        for z in &mut self.roots.roots {
            *z = z.conj();
        }
        for c in &mut self.roots.clusters {
            c.center = c.center.conj();
        }
        self.roots
            .roots
            .sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        self
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassifyError {
    #[error("mu = {0} is not finite")]
    NonFinite(Complex64),
    #[error("root finding failed at mu = {mu}: {source}")]
    RootFinding { mu: Complex64, source: RootError },
}

/// Root condition on a polynomial with nonzero leading coefficient. A
/// nonzero constant is vacuously stable.
pub fn root_condition(coeffs: &[Complex64], tol: &Tolerances) -> Result<(Status, RootSet), RootError> {
    if coeffs.len() <= 1 {
        return Ok((Status::Stable, RootSet::empty()));
    }
    let set = rootfind::roots(coeffs, tol.residual, tol.multiplicity)?;
    let mut status = Status::Stable;
    for cluster in &set.clusters {
        let modulus = cluster.center.norm();
        if modulus > 1.0 + tol.unit_circle {
            return Ok((Status::Unstable, set));
        }
        if modulus >= 1.0 - tol.unit_circle && cluster.multiplicity > 1 {
            status = Status::Marginal;
        }
    }
    Ok((status, set))
}

fn verdict_from(mu: Complex64, degenerate: bool, degree: isize, refined_ok: bool, result: (Status, RootSet)) -> StabilityVerdict {
    let (classical, roots) = result;
    let refined = if degenerate || !refined_ok { Status::Unstable } else { classical };
    let max_modulus = roots.max_modulus();
    StabilityVerdict { mu, classical, refined, degenerate, effective_degree: degree, roots, max_modulus }
}

fn identically_zero(mu: Complex64) -> StabilityVerdict {
    // Every ζ solves Φ(ζ, μ) = 0, including |ζ| > 1.
    StabilityVerdict {
        mu,
        classical: Status::Unstable,
        refined: Status::Unstable,
        degenerate: true,
        effective_degree: -1,
        roots: RootSet::empty(),
        max_modulus: f64::INFINITY,
    }
}

/// Classifies a floating-point μ.
///
/// Within τ_E of an exceptional point the leading coefficients that vanish
/// there are dropped and the root condition is applied to the reduced
/// polynomial; the refined verdict is then unstable. Elsewhere the full
/// degree-`k` polynomial is used and both verdicts coincide unless the
/// leading coefficient is negligible.
pub fn classify(cp: &CharPoly, exc: &ExceptionalSet, mu: Complex64, tol: &Tolerances) -> Result<StabilityVerdict, ClassifyError> {
    if !(mu.re.is_finite() && mu.im.is_finite()) {
        return Err(ClassifyError::NonFinite(mu));
    }
    // Real coefficients: Φ(conj ζ, conj μ) = conj Φ(ζ, μ). Classifying the
    // upper half-plane representative makes conjugate points agree exactly.
    if mu.im < 0.0 {
        return classify_upper(cp, exc, mu.conj(), tol).map(StabilityVerdict::conjugated);
    }
    classify_upper(cp, exc, mu, tol)
}

fn classify_upper(cp: &CharPoly, exc: &ExceptionalSet, mu: Complex64, tol: &Tolerances) -> Result<StabilityVerdict, ClassifyError> {
    let k = cp.k() as isize;
    let coeffs = cp.coefficients_at(mu);
    let wrap = |source| ClassifyError::RootFinding { mu, source };

    let near = exc
        .points
        .iter()
        .map(|p| p.value)
        .filter(|p| (p - mu).norm() < tol.degeneracy_radius || (p.conj() - mu).norm() < tol.degeneracy_radius)
        .min_by(|a, b| (a - mu).norm().total_cmp(&(b - mu).norm()));
    if let Some(star) = near {
        let degree = cp.degree_at(star, tol.degree_drop).min(k - 1);
        if degree < 0 {
            return Ok(identically_zero(mu));
        }
        let result = root_condition(&coeffs[..=degree as usize], tol).map_err(wrap)?;
        return Ok(verdict_from(mu, true, degree, false, result));
    }

    let degree = crate::charpoly::degree_of(&coeffs, tol.degree_drop);
    // An exactly vanishing leading coefficient off the computed E can only
    // come from rounding in a numerically computed E; treat it as degenerate.
    let exact_degree = coeffs.iter().rposition(|c| c.norm() != 0.0).map_or(-1, |i| i as isize);
    if exact_degree < 0 {
        return Ok(identically_zero(mu));
    }
    if exact_degree < k {
        let result = root_condition(&coeffs[..=exact_degree as usize], tol).map_err(wrap)?;
        return Ok(verdict_from(mu, true, exact_degree, false, result));
    }
    let result = root_condition(&coeffs, tol).map_err(wrap)?;
    Ok(verdict_from(mu, false, degree, degree == k, result))
}

/// Classifies an exact Gaussian-rational μ. If `C_k(μ)` vanishes exactly the
/// reduced polynomial is determined exactly; otherwise this defers to
/// [`classify`].
pub fn classify_exact(cp: &CharPoly, exc: &ExceptionalSet, mu: &ExactComplex, tol: &Tolerances) -> Result<StabilityVerdict, ClassifyError> {
    let values = cp.coefficients_at_exact(mu);
    if !values[cp.k()].is_zero() {
        return classify(cp, exc, mu.to_complex64(), tol);
    }
    let point = mu.to_complex64();
    let Some(degree) = values.iter().rposition(|v| !v.is_zero()) else {
        return Ok(identically_zero(point));
    };
    let coeffs: Vec<Complex64> = values[..=degree].iter().map(ExactComplex::to_complex64).collect();
    let result = root_condition(&coeffs, tol).map_err(|source| ClassifyError::RootFinding { mu: point, source })?;
    Ok(verdict_from(point, true, degree as isize, false, result))
}

/// Classifies an exceptional point, using its exact form when it has one.
pub fn classify_exceptional_point(
    cp: &CharPoly,
    exc: &ExceptionalSet,
    index: usize,
    tol: &Tolerances,
) -> Result<StabilityVerdict, ClassifyError> {
    let point = &exc.points[index];
    match point.exact.as_ref().and_then(ClosedForm::as_exact) {
        Some(exact) => classify_exact(cp, exc, exact, tol),
        None => classify(cp, exc, point.value, tol),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsolatedPointReport {
    pub mu_star: Complex64,
    pub exact: Option<ClosedForm>,
    pub verdict: StabilityVerdict,
    pub classical_stable_at_point: bool,
    pub unstable_probes: usize,
    pub probe_count: usize,
    /// Every probe on the circle around μ* is classically unstable.
    pub neighborhood_unstable: bool,
    /// The method is an implicit, irreducible linear multistep method, for
    /// which a stable μ* is provably isolated and off the root locus.
    pub proposition_applies: bool,
    pub min_locus_distance: f64,
}

impl IsolatedPointReport {
    /// μ* is stable and isolated, either by the probes or by the guarantee
    /// for irreducible linear multistep methods.
    pub fn isolated(&self) -> bool {
        self.classical_stable_at_point && (self.proposition_applies || self.neighborhood_unstable)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IsolationError {
    #[error("probe radius must be positive and finite")]
    BadRadius,
    #[error("at least 8 probes are required, got {0}")]
    TooFewProbes(usize),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

/// Probes each exceptional point: its own verdict, the verdicts on a circle
/// of `probe_radius` around it, and its distance to the root locus traced
/// with `locus_samples` angles.
pub fn detect_isolated(
    cp: &CharPoly,
    scheme: &MultistepScheme,
    exc: &ExceptionalSet,
    probe_radius: f64,
    probe_count: usize,
    locus_samples: usize,
    tol: &Tolerances,
) -> Result<Vec<IsolatedPointReport>, IsolationError> {
    if !(probe_radius.is_finite() && probe_radius > 0.0) {
        return Err(IsolationError::BadRadius);
    }
    if probe_count < 8 {
        return Err(IsolationError::TooFewProbes(probe_count));
    }
    if exc.is_empty() {
        return Ok(Vec::new());
    }
    let proposition_applies = scheme.s() == 1
        && scheme.is_implicit()
        && scheme.lmm_view().map(|v| v.irreducible()).unwrap_or(false);
    let curve = locus::trace(cp, locus_samples.max(locus::MIN_SAMPLES), tol);

    let mut reports = Vec::with_capacity(exc.len());
    for (index, point) in exc.points.iter().enumerate() {
        let verdict = classify_exceptional_point(cp, exc, index, tol)?;
        let mut unstable_probes = 0;
        for p in 0..probe_count {
            let offset = Complex64::from_polar(probe_radius, TAU * p as f64 / probe_count as f64);
            let probe = classify(cp, exc, point.value + offset, tol)?;
            if probe.classical == Status::Unstable {
                unstable_probes += 1;
            }
        }
        let min_locus_distance = locus::min_distance(&curve, point.value).unwrap_or(f64::INFINITY);
        reports.push(IsolatedPointReport {
            mu_star: point.value,
            exact: point.exact.clone(),
            classical_stable_at_point: verdict.classical == Status::Stable,
            verdict,
            unstable_probes,
            probe_count,
            neighborhood_unstable: unstable_probes == probe_count,
            proposition_applies,
            min_locus_distance,
        });
    }
    Ok(reports)
}

/// A rational function `numerator / denominator` in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunction {
    pub numerator: RationalPoly,
    pub denominator: RationalPoly,
}

impl RationalFunction {
    /// `None` at a pole.
    pub fn eval(&self, z: Complex64) -> Option<Complex64> {
        let den = self.denominator.eval_complex(z);
        if den.norm() == 0.0 {
            return None;
        }
        let value = self.numerator.eval_complex(z) / den;
        (value.re.is_finite() && value.im.is_finite()).then_some(value)
    }

    pub fn to_string_in(&self, var: &str) -> String {
        let num = self.numerator.to_string_in(var);
        if self.denominator.degree() == Some(0) && self.denominator.coeff(0) == BigRational::from_integer(1.into()) {
            return num;
        }
        let wrap = |p: &RationalPoly, s: String| if p.coeffs().iter().filter(|c| !c.is_zero()).count() > 1 { alloc::format!("({s})") } else { s };
        alloc::format!("{}/{}", wrap(&self.numerator, num), wrap(&self.denominator, self.denominator.to_string_in(var)))
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_in("z"))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RkError {
    #[error("the stability function is defined for one-step methods only (k = {0})")]
    NotOneStep(usize),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Region(#[from] RegionError),
}

/// `R(z) = -C_0(z) / C_1(z)` of a one-step method, reduced to lowest terms
/// and normalised so the denominator has constant term 1 where possible.
pub fn rk_stability_function(view: &LmmView) -> Result<RationalFunction, RkError> {
    if view.k() != 1 {
        return Err(RkError::NotOneStep(view.k()));
    }
    let c = |l: usize| {
        RationalPoly::new(alloc::vec![view.rho().coeff(l), -view.sigma().coeff(l)])
    };
    let mut numerator = c(0).scale(&BigRational::from_integer((-1).into()));
    let mut denominator = c(1);
    let g = numerator.gcd(&denominator);
    if g.degree().is_some_and(|d| d > 0) {
        numerator = numerator.div_rem(&g).0;
        denominator = denominator.div_rem(&g).0;
    }
    let norm = if !denominator.coeff(0).is_zero() {
        denominator.coeff(0)
    } else {
        denominator.leading().cloned().expect("alpha_1 != 0 keeps C_1 nonzero")
    };
    let inv = norm.recip();
    Ok(RationalFunction { numerator: numerator.scale(&inv), denominator: denominator.scale(&inv) })
}

/// Grid points whose membership in `{z : |R(z)| ≤ 1}` differs from the
/// classical verdict of the method viewed as a one-step multistep method.
/// Poles of `R` count as unstable. The same unit-circle band τ_circ is used
/// on both sides.
pub fn rk_vs_lmm_discrepancy(scheme: &MultistepScheme, spec: &GridSpec, tol: &Tolerances) -> Result<Vec<Complex64>, RkError> {
    let view = scheme.lmm_view()?;
    let r = rk_stability_function(&view)?;
    let cp = CharPoly::new(scheme);
    let exc = exceptional_set(&cp, tol);
    let grid = region::scan(&cp, &exc, spec, tol)?;
    Ok(grid
        .cells()
        .iter()
        .filter(|cell| {
            let rk_stable = r.eval(cell.mu).is_some_and(|v| v.norm() <= 1.0 + tol.unit_circle);
            rk_stable != cell.classical.is_stable()
        })
        .map(|cell| cell.mu)
        .collect())
}
