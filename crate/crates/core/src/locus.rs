//! Root locus curves: the μ solving `Φ(e^{iϑ}, μ) = 0` as ϑ sweeps the unit
//! circle.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;

use crate::charpoly::{degree_of, CharPoly};
use crate::rootfind;
use crate::tolerance::Tolerances;

pub const MIN_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocusSample {
    pub theta: f64,
    pub branch: usize,
    pub mu: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocusCurve {
    /// Ordered by angle, then branch.
    pub samples: Vec<LocusSample>,
    /// Angles where the leading μ-coefficient of `Φ(e^{iϑ}, ·)` vanishes.
    pub singular_thetas: Vec<f64>,
    pub branches: usize,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LocusError {
    #[error("locus curve has no samples")]
    Empty,
}

impl LocusCurve {
    pub fn branch(&self, b: usize) -> impl Iterator<Item = &LocusSample> + '_ {
        self.samples.iter().filter(move |s| s.branch == b)
    }

    /// Largest `|Φ(e^{iϑ}, μ)|` relative to `Σ |a[j][ℓ]| |μ|^j` over all samples.
    pub fn max_relative_residual(&self, cp: &CharPoly) -> f64 {
        self.samples
            .iter()
            .map(|s| {
                let zeta = Complex64::from_polar(1.0, s.theta);
                let scale = cp.magnitude(zeta, s.mu);
                if scale == 0.0 {
                    0.0
                } else {
                    cp.eval(zeta, s.mu).norm() / scale
                }
            })
            .fold(0.0, f64::max)
    }
}

/// μ-roots of `Σ_j p[j] μ^j` with nonzero leading coefficient.
fn mu_roots(p: &[Complex64], tol: &Tolerances) -> Vec<Complex64> {
    match p.len() {
        0 | 1 => Vec::new(),
        2 => alloc::vec![-p[0] / p[1]],
        3 => {
            let (c, b, a) = (p[0], p[1], p[2]);
            let root = (b * b - 4.0 * a * c).sqrt();
            // Choose the sign that avoids cancellation.
            let q = if (b.conj() * root).re >= 0.0 { -(b + root) / 2.0 } else { -(b - root) / 2.0 };
            if q.norm() == 0.0 {
                alloc::vec![Complex64::new(0.0, 0.0); 2]
            } else {
                alloc::vec![q / a, c / q]
            }
        }
        _ => match rootfind::roots(p, tol.residual, tol.multiplicity) {
            Ok(set) => set.roots,
            Err(rootfind::RootError::NoConvergence { best, .. }) => best,
            Err(_) => Vec::new(),
        },
    }
}

/// Best injective assignment of `roots` to branch slots.
fn assign(roots: &[Complex64], prev: &[Option<Complex64>], predicted: &[Option<Complex64>]) -> Vec<usize> {
    let slots = prev.len();
    let cost = |targets: &[Option<Complex64>], perm: &[usize]| -> f64 {
        perm.iter()
            .zip(roots)
            .map(|(&b, &z)| targets[b].map_or(0.0, |t| (z - t).norm()))
            .sum()
    };
    let mut perms = Vec::new();
    let mut current = Vec::with_capacity(roots.len());
    let mut used = alloc::vec![false; slots];
    enumerate(roots.len(), slots, &mut current, &mut used, &mut perms);

    let costs: Vec<f64> = perms.iter().map(|p| cost(prev, p)).collect();
    let best = costs.iter().cloned().fold(f64::INFINITY, f64::min);
    let tie = 1e-12 * (1.0 + best);
    let tied: Vec<usize> = (0..perms.len()).filter(|&i| costs[i] - best <= tie).collect();
    let chosen = if tied.len() > 1 {
        *tied
            .iter()
            .min_by(|&&x, &&y| cost(predicted, &perms[x]).total_cmp(&cost(predicted, &perms[y])))
            .unwrap()
    } else {
        tied[0]
    };
    perms.swap_remove(chosen)
}

fn enumerate(len: usize, slots: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
    if current.len() == len {
        out.push(current.clone());
        return;
    }
    for b in 0..slots {
        if !used[b] {
            used[b] = true;
            current.push(b);
            enumerate(len, slots, current, used, out);
            current.pop();
            used[b] = false;
        }
    }
}

/// Samples the locus at `ϑ_i = 2πi/n`, `i = 0..n`.
///
/// At each angle all μ-roots of the degree-≤ s polynomial `Φ(e^{iϑ}, ·)` are
/// collected (ratio formula for s = 1, quadratic formula for s = 2, the root
/// finder above). Branch labels follow nearest-neighbour continuation from
/// the previous angle, with ties broken by linear extrapolation.
pub fn trace(cp: &CharPoly, n_samples: usize, tol: &Tolerances) -> LocusCurve {
    let n = n_samples.max(MIN_SAMPLES);
    let s = cp.s();
    let mut samples = Vec::with_capacity(n * s);
    let mut singular_thetas = Vec::new();
    let mut prev: Vec<Option<Complex64>> = alloc::vec![None; s];
    let mut prev2: Vec<Option<Complex64>> = alloc::vec![None; s];

    for i in 0..n {
        let theta = TAU * i as f64 / n as f64;
        let zeta = Complex64::from_polar(1.0, theta);
        let p = cp.mu_polynomial_at(zeta);
        let degree = degree_of(&p, tol.degree_drop);
        if degree < s as isize {
            singular_thetas.push(theta);
        }
        if degree < 1 {
            prev2 = core::mem::replace(&mut prev, alloc::vec![None; s]);
            continue;
        }
        let mut roots = mu_roots(&p[..=degree as usize], tol);
        let labels = if prev.iter().all(Option::is_none) {
            roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
            (0..roots.len()).collect()
        } else {
            let predicted: Vec<Option<Complex64>> = prev
                .iter()
                .zip(&prev2)
                .map(|(a, b)| match (a, b) {
                    (Some(a), Some(b)) => Some(2.0 * a - b),
                    (a, _) => *a,
                })
                .collect();
            assign(&roots, &prev, &predicted)
        };
        let mut next: Vec<Option<Complex64>> = alloc::vec![None; s];
        for (&branch, &mu) in labels.iter().zip(&roots) {
            next[branch] = Some(mu);
        }
        let mut ordered: Vec<(usize, Complex64)> = labels.into_iter().zip(roots).collect();
        ordered.sort_by_key(|&(b, _)| b);
        samples.extend(ordered.into_iter().map(|(branch, mu)| LocusSample { theta, branch, mu }));
        prev2 = core::mem::replace(&mut prev, next);
    }
    LocusCurve { samples, singular_thetas, branches: s, n_samples: n }
}

/// Smallest Euclidean distance from `p` to a sample of the curve.
pub fn min_distance(curve: &LocusCurve, p: Complex64) -> Result<f64, LocusError> {
    curve
        .samples
        .iter()
        .map(|s| (s.mu - p).norm())
        .min_by(f64::total_cmp)
        .ok_or(LocusError::Empty)
}
