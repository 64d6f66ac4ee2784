//! All complex roots of a complex polynomial by Aberth–Ehrlich simultaneous
//! iteration, with a backward-error residual check and multiplicity
//! clustering.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;

const MAX_ITERATIONS: usize = 500;

/// A group of computed roots closer than the clustering radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    /// Centroid of the members.
    pub center: Complex64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    /// Roots with multiplicity, sorted by real then imaginary part.
    pub roots: Vec<Complex64>,
    pub clusters: Vec<Cluster>,
    /// Largest relative residual `|p(z)| / Σ|c_i||z|^i` over the roots.
    pub max_residual: f64,
}

impl RootSet {
    pub fn empty() -> Self {
        Self { roots: Vec::new(), clusters: Vec::new(), max_residual: 0.0 }
    }

    pub fn degree(&self) -> usize {
        self.roots.len()
    }

    pub fn max_modulus(&self) -> f64 {
        self.roots.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RootError {
    #[error("coefficient {index} is not finite")]
    NonFinite { index: usize },
    #[error("leading coefficient is zero or the coefficient list is empty")]
    ZeroLeading,
    #[error("root finder did not reach residual {target:e} (best {residual:e})")]
    NoConvergence { best: Vec<Complex64>, residual: f64, target: f64 },
}

/// Relative backward-error residual of `z` as a root of `coeffs` (ascending).
pub fn relative_residual(coeffs: &[Complex64], z: Complex64) -> f64 {
    let r = z.norm();
    let mut value = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for c in coeffs.iter().rev() {
        value = value * z + c;
        scale = scale * r + c.norm();
    }
    if scale == 0.0 {
        0.0
    } else {
        value.norm() / scale
    }
}

/// Finds every root of `Σ coeffs[i] z^i`.
///
/// The leading coefficient must be nonzero; a constant polynomial has no
/// roots and yields an empty set. Roots whose relative residual exceeds
/// `residual_tol` after the iteration budget produce
/// [`RootError::NoConvergence`] carrying the best iterate.
pub fn roots(coeffs: &[Complex64], residual_tol: f64, multiplicity_tol: f64) -> Result<RootSet, RootError> {
    if let Some(index) = coeffs.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(RootError::NonFinite { index });
    }
    let Some(lead) = coeffs.last() else {
        return Err(RootError::ZeroLeading);
    };
    if lead.norm() == 0.0 {
        return Err(RootError::ZeroLeading);
    }
    if coeffs.len() == 1 {
        return Ok(RootSet::empty());
    }

    // Exact zero roots from vanishing low-order coefficients.
    let zeros = coeffs.iter().take_while(|c| c.norm() == 0.0).count();
    let reduced: Vec<Complex64> = coeffs[zeros..].iter().map(|c| c / lead).collect();
    let mut found = vec![Complex64::new(0.0, 0.0); zeros];
    found.extend(solve_nonzero(&reduced));

    found.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let max_residual = found
        .iter()
        .map(|&z| relative_residual(coeffs, z))
        .fold(0.0, f64::max);
    if !(max_residual <= residual_tol) {
        return Err(RootError::NoConvergence { best: found, residual: max_residual, target: residual_tol });
    }
    let mut clusters = cluster(&found, multiplicity_tol);
    for c in clusters.iter_mut().filter(|c| c.multiplicity > 1) {
        c.center = refine_multiple(coeffs, c.center, c.multiplicity, multiplicity_tol);
    }
    Ok(RootSet { roots: found, clusters, max_residual })
}

/// Roots of a monic polynomial with nonzero constant term.
fn solve_nonzero(p: &[Complex64]) -> Vec<Complex64> {
    let m = p.len() - 1;
    match m {
        0 => Vec::new(),
        1 => vec![-p[0] / p[1]],
        _ => aberth(p),
    }
}

fn eval_with_derivative(p: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut value = Complex64::new(0.0, 0.0);
    let mut deriv = Complex64::new(0.0, 0.0);
    for c in p.iter().rev() {
        deriv = deriv * z + value;
        value = value * z + c;
    }
    (value, deriv)
}

fn aberth(p: &[Complex64]) -> Vec<Complex64> {
    let m = p.len() - 1;
    let lead = p[m].norm();
    // Cauchy-style radius from coefficient ratios.
    let radius = (0..m)
        .map(|i| (p[i].norm() / lead).powf(1.0 / (m - i) as f64))
        .fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..m)
        .map(|j| Complex64::from_polar(radius, TAU * j as f64 / m as f64 + 0.4))
        .collect();

    let roundoff = 8.0 * f64::EPSILON * m as f64;
    for _ in 0..MAX_ITERATIONS {
        let mut max_step = 0.0f64;
        let mut max_residual = 0.0f64;
        for j in 0..m {
            let (value, deriv) = eval_with_derivative(p, z[j]);
            if value.norm() == 0.0 {
                continue;
            }
            let ratio = value / deriv;
            let repulsion: Complex64 = (0..m)
                .filter(|&i| i != j)
                .map(|i| (z[j] - z[i]).inv())
                .sum();
            let mut step = ratio / (1.0 - ratio * repulsion);
            if !(step.re.is_finite() && step.im.is_finite()) {
                step = if ratio.re.is_finite() && ratio.im.is_finite() { ratio } else { Complex64::new(radius * 1e-3, 0.0) };
            }
            z[j] -= step;
            max_step = max_step.max(step.norm() / z[j].norm().max(f64::MIN_POSITIVE));
        }
        for &root in &z {
            max_residual = max_residual.max(relative_residual(p, root));
        }
        if max_residual <= roundoff || max_step <= 4.0 * f64::EPSILON {
            break;
        }
    }
    z
}

/// A root of multiplicity `m` is a simple root of the `(m-1)`-th derivative;
/// a few Newton steps there recover the digits the centroid loses. The
/// centroid is kept if Newton wanders off by more than `radius`.
fn refine_multiple(coeffs: &[Complex64], start: Complex64, multiplicity: usize, radius: f64) -> Complex64 {
    let mut d: Vec<Complex64> = coeffs.to_vec();
    for _ in 1..multiplicity {
        d = d.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect();
    }
    if d.len() < 2 {
        return start;
    }
    let mut z = start;
    for _ in 0..8 {
        let (value, deriv) = eval_with_derivative(&d, z);
        if value.norm() == 0.0 || deriv.norm() == 0.0 {
            break;
        }
        let step = value / deriv;
        z -= step;
        if step.norm() <= f64::EPSILON * z.norm() {
            break;
        }
    }
    if (z - start).norm() <= radius && z.re.is_finite() && z.im.is_finite() {
        z
    } else {
        start
    }
}

/// Single-linkage clustering at `radius`; each cluster is reported by its
/// centroid. Clusters appear in order of their first member.
pub fn cluster(roots: &[Complex64], radius: f64) -> Vec<Cluster> {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (roots[i] - roots[j]).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut out: Vec<(usize, Complex64, usize)> = Vec::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        match out.iter_mut().find(|(r, _, _)| *r == root) {
            Some(entry) => {
                entry.1 += roots[i];
                entry.2 += 1;
            }
            None => out.push((root, roots[i], 1)),
        }
    }
    out.into_iter()
        .map(|(_, sum, count)| Cluster { center: sum / count as f64, multiplicity: count })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn solve(coeffs: &[Complex64]) -> RootSet {
        roots(coeffs, 1e-10, 1e-7).unwrap()
    }

    #[test]
    fn bdf2_reduced_polynomial_at_exceptional_point() {
        // Φ(ζ, 3/2) = -4ζ + 1.
        let set = solve(&[c(1.0), c(-4.0)]);
        assert_eq!(set.roots.len(), 1);
        assert!((set.roots[0] - c(0.25)).norm() < 1e-12);
    }

    #[test]
    fn implicit_euler_at_origin() {
        let set = solve(&[c(-1.0), c(1.0)]);
        assert!((set.roots[0] - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn bdf2_rho_roots() {
        // 3ζ² - 4ζ + 1 = (3ζ - 1)(ζ - 1).
        let set = solve(&[c(1.0), c(-4.0), c(3.0)]);
        assert!((set.roots[0] - c(1.0 / 3.0)).norm() < 1e-14);
        assert!((set.roots[1] - c(1.0)).norm() < 1e-14);
        assert_eq!(set.clusters.len(), 2);
    }

    #[test]
    fn constant_has_no_roots() {
        let set = solve(&[c(-2.0)]);
        assert!(set.roots.is_empty() && set.clusters.is_empty());
    }

    #[test]
    fn zero_roots_are_exact() {
        let set = solve(&[c(0.0), c(0.0), c(-1.0), c(1.0)]);
        assert_eq!(set.roots.iter().filter(|z| z.norm() == 0.0).count(), 2);
    }

    #[test]
    fn double_root_clusters() {
        // (ζ - 1/2)².
        let set = solve(&[c(0.25), c(-1.0), c(1.0)]);
        assert_eq!(set.clusters.len(), 1);
        assert_eq!(set.clusters[0].multiplicity, 2);
        assert!((set.clusters[0].center - c(0.5)).norm() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(roots(&[c(1.0), c(0.0)], 1e-10, 1e-7).unwrap_err(), RootError::ZeroLeading);
        assert_eq!(roots(&[], 1e-10, 1e-7).unwrap_err(), RootError::ZeroLeading);
        assert_eq!(roots(&[c(f64::NAN), c(1.0)], 1e-10, 1e-7).unwrap_err(), RootError::NonFinite { index: 0 });
    }

    #[test]
    fn cluster_examples() {
        let pair = [c(0.5 + 1e-12), c(0.5 - 1e-12)];
        let cl = cluster(&pair, 1e-7);
        assert_eq!(cl.len(), 1);
        assert_eq!(cl[0].multiplicity, 2);
        let simple = cluster(&[c(1.0), c(1.0 / 3.0)], 1e-8);
        assert_eq!(simple.len(), 2);
        assert!(simple.iter().all(|k| k.multiplicity == 1));
        assert!(cluster(&[], 1e-7).is_empty());
    }

    #[test]
    fn widely_spread_roots() {
        // Near an exceptional point: tiny leading coefficient, one root ~ 2000.
        let eps = Complex64::new(-2e-3, 0.0);
        let set = solve(&[c(1.0), c(-4.0), eps]);
        let big = set.roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!((big - 2000.0).abs() / 2000.0 < 1e-2);
        assert!(set.max_residual < 1e-14);
    }
}
