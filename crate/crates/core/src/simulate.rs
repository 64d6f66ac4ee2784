//! Direct iteration of the recurrence `Σ_ℓ C_ℓ(μ) y_{n+ℓ} = 0`, used to
//! check that boundedness of the numerical solution matches the classifier,
//! and to exhibit the blow-up near exceptional points.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::charpoly::{CharPoly, ExceptionalSet};
use crate::locus::{self, LocusCurve};
use crate::region::{GridSpec, Viewport};
use crate::stability::{self, ClassifyError, Status};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Bounded,
    Blowup,
    Inconclusive,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Bounded => "bounded",
            Outcome::Blowup => "blowup",
            Outcome::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    /// `|y_n|` above this ends the run as a blow-up.
    pub blowup_threshold: f64,
    /// Bounded when the final-window maximum is at most this multiple of
    /// the largest initial magnitude.
    pub bound_factor: f64,
    pub record_trajectory: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { blowup_threshold: 1e12, bound_factor: 10.0, record_trajectory: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceRun {
    pub mu: Complex64,
    pub initial_values: Vec<Complex64>,
    pub n_steps: usize,
    /// Order of the recurrence actually iterated.
    pub order: usize,
    /// Iterated at reduced order because μ is an exceptional point.
    pub reduced_order: bool,
    pub trajectory_max: f64,
    /// Max `|y_n|` over the last 10% of the computed values.
    pub final_window_max: f64,
    pub final_value: Complex64,
    /// First `n` with `|y_n|` above the blow-up threshold.
    pub blowup_step: Option<usize>,
    pub outcome: Outcome,
    /// `y_0 ..`, only when requested.
    pub trajectory: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimulateError {
    #[error("{required} initial values required ({mode} recurrence), got {found}")]
    InitLength { required: usize, found: usize, mode: &'static str },
    #[error("leading coefficient C_k({mu}) is negligible; this point needs reduced-order mode")]
    NearSingularLeading { mu: Complex64 },
    #[error("at least 10 steps are required, got {0}")]
    TooFewSteps(usize),
    #[error("mu or an initial value is not finite")]
    NonFinite,
    #[error("Phi vanishes identically at mu = {0}")]
    IdenticallyZero(Complex64),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

/// Coefficients of the recurrence to iterate at μ and whether the order is
/// reduced.
fn recurrence(cp: &CharPoly, exc: &ExceptionalSet, mu: Complex64, tol: &Tolerances) -> Result<(Vec<Complex64>, bool), SimulateError> {
    let k = cp.k() as isize;
    let coeffs = cp.coefficients_at(mu);
    let star = exc
        .points
        .iter()
        .map(|p| p.value)
        .find(|p| (p - mu).norm() < tol.degeneracy_radius);
    if let Some(star) = star {
        let degree = cp.degree_at(star, tol.degree_drop).min(k - 1);
        if degree < 0 {
            return Err(SimulateError::IdenticallyZero(mu));
        }
        return Ok((coeffs[..=degree as usize].to_vec(), true));
    }
    if cp.degree_at(mu, tol.degree_drop) < k {
        return Err(SimulateError::NearSingularLeading { mu });
    }
    Ok((coeffs, false))
}

/// Number of initial values `run` expects at μ, and whether μ is degenerate.
pub fn required_order(cp: &CharPoly, exc: &ExceptionalSet, mu: Complex64, tol: &Tolerances) -> Result<(usize, bool), SimulateError> {
    let (coeffs, reduced) = recurrence(cp, exc, mu, tol)?;
    Ok((coeffs.len() - 1, reduced))
}

/// Iterates `y_{n+d} = -Σ_{ℓ<d} C_ℓ(μ) y_{n+ℓ} / C_d(μ)` for `n_steps`
/// values `y_0 .. y_{n_steps-1}`, where `d = k` normally and `d` is the
/// reduced degree at an exceptional point.
pub fn run(
    cp: &CharPoly,
    exc: &ExceptionalSet,
    mu: Complex64,
    init: &[Complex64],
    n_steps: usize,
    config: &RunConfig,
    tol: &Tolerances,
) -> Result<RecurrenceRun, SimulateError> {
    if n_steps < 10 {
        return Err(SimulateError::TooFewSteps(n_steps));
    }
    let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
    if !finite(&mu) || !init.iter().all(finite) {
        return Err(SimulateError::NonFinite);
    }
    let (coeffs, reduced) = recurrence(cp, exc, mu, tol)?;
    let order = coeffs.len() - 1;
    if init.len() != order {
        let mode = if reduced { "reduced-order" } else { "full-order" };
        return Err(SimulateError::InitLength { required: order, found: init.len(), mode });
    }

    let lead = coeffs[order];
    let mut window: Vec<Complex64> = init.to_vec();
    let mut trajectory = Vec::new();
    let window_len = (n_steps / 10).max(1);
    let window_start = n_steps - window_len;
    let mut trajectory_max = 0.0f64;
    let mut final_window_max = 0.0f64;
    let mut final_value = Complex64::new(0.0, 0.0);
    let mut blowup_step = None;

    for n in 0..n_steps {
        let y = if n < order {
            init[n]
        } else if order == 0 {
            // C_0 y_n = 0 with C_0 ≠ 0.
            Complex64::new(0.0, 0.0)
        } else {
            let acc: Complex64 = (0..order).map(|l| coeffs[l] * window[l]).sum();
            let next = -acc / lead;
            window.rotate_left(1);
            window[order - 1] = next;
            next
        };
        let size = y.norm();
        if config.record_trajectory {
            trajectory.push(y);
        }
        trajectory_max = trajectory_max.max(size);
        if n >= window_start {
            final_window_max = final_window_max.max(size);
        }
        final_value = y;
        if !(size <= config.blowup_threshold) {
            blowup_step = Some(n);
            break;
        }
    }

    let init_max = init.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let outcome = if blowup_step.is_some() {
        Outcome::Blowup
    } else if final_window_max <= config.bound_factor * init_max {
        Outcome::Bounded
    } else {
        Outcome::Inconclusive
    };
    Ok(RecurrenceRun {
        mu,
        initial_values: init.to_vec(),
        n_steps,
        order,
        reduced_order: reduced,
        trajectory_max,
        final_window_max,
        final_value,
        blowup_step,
        outcome,
        trajectory,
    })
}

/// Initial vector with components uniform in the unit square.
pub fn random_init(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceRow {
    pub mu: Complex64,
    pub verdict: Status,
    pub outcomes: Vec<Outcome>,
    /// Trials whose outcome matches the verdict (stable/bounded or
    /// unstable/blowup).
    pub agreeing: usize,
    pub inconclusive: usize,
    /// Every conclusive trial agrees, and at least one is conclusive.
    pub agree: bool,
}

/// Runs `trials` random initial vectors at every μ and compares boundedness
/// with the classical verdict. Randomness comes from one ChaCha8 stream
/// seeded with `seed`.
pub fn equivalence_check(
    cp: &CharPoly,
    exc: &ExceptionalSet,
    mus: &[Complex64],
    trials: usize,
    n_steps: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<Vec<EquivalenceRow>, SimulateError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = RunConfig::default();
    let mut rows = Vec::with_capacity(mus.len());
    for &mu in mus {
        let verdict = stability::classify(cp, exc, mu, tol)?.classical;
        let (order, _) = required_order(cp, exc, mu, tol)?;
        let mut outcomes = Vec::with_capacity(trials);
        for _ in 0..trials {
            let init = random_init(&mut rng, order);
            outcomes.push(run(cp, exc, mu, &init, n_steps, &config, tol)?.outcome);
        }
        let agreeing = outcomes
            .iter()
            .filter(|&&o| matches!((verdict, o), (Status::Stable, Outcome::Bounded) | (Status::Unstable, Outcome::Blowup)))
            .count();
        let inconclusive = outcomes.iter().filter(|&&o| o == Outcome::Inconclusive).count();
        let conclusive = trials - inconclusive;
        rows.push(EquivalenceRow {
            mu,
            verdict,
            outcomes,
            agreeing,
            inconclusive,
            agree: conclusive > 0 && agreeing == conclusive,
        });
    }
    Ok(rows)
}

/// Picks up to `per_class` stable and `per_class` unstable points from a
/// lattice over `viewport`, keeping only points whose largest root modulus
/// is at least `modulus_margin` away from 1 and that lie farther than
/// `distance` from the root locus and from the exceptional set. Stable
/// points come first.
pub fn interior_sample_points(
    cp: &CharPoly,
    exc: &ExceptionalSet,
    viewport: &Viewport,
    per_class: usize,
    modulus_margin: f64,
    distance: f64,
    tol: &Tolerances,
) -> Result<Vec<Complex64>, SimulateError> {
    let spec = GridSpec::new(*viewport, 41, 41).expect("viewport was validated");
    let curve: LocusCurve = locus::trace(cp, 4096, tol);
    let mut stable = Vec::new();
    let mut unstable = Vec::new();
    for j in 0..spec.ny {
        for i in 0..spec.nx {
            let mu = spec.node(i, j);
            if exc.nearest(mu).is_some_and(|(_, d)| d <= distance) {
                continue;
            }
            if locus::min_distance(&curve, mu).is_ok_and(|d| d <= distance) {
                continue;
            }
            let v = stability::classify(cp, exc, mu, tol)?;
            match v.classical {
                Status::Stable if v.max_modulus <= 1.0 - modulus_margin => stable.push(mu),
                Status::Unstable if v.max_modulus >= 1.0 + modulus_margin => unstable.push(mu),
                _ => {}
            }
        }
    }
    let pick = |pool: Vec<Complex64>| -> Vec<Complex64> {
        if pool.len() <= per_class {
            return pool;
        }
        (0..per_class).map(|t| pool[t * pool.len() / per_class]).collect()
    };
    let mut out = pick(stable);
    out.extend(pick(unstable));
    Ok(out)
}
