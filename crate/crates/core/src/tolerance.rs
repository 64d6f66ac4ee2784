/// Numerical thresholds shared by the classifier, locus tracer and simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Absolute distance to a computed exceptional point below which μ is
    /// treated as degenerate (τ_E).
    pub degeneracy_radius: f64,
    /// Half-width of the band around the unit circle (τ_circ).
    pub unit_circle: f64,
    /// Clustering radius for repeated roots (τ_mult).
    pub multiplicity: f64,
    /// Relative size below which a coefficient counts as vanished (τ_drop).
    pub degree_drop: f64,
    /// Relative residual a computed root must satisfy (τ_res).
    pub residual: f64,
    /// Separation below which two exceptional points are merged (τ_sep).
    pub separation: f64,
    /// Relative residual bound for locus samples (τ_locus).
    pub locus: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            degeneracy_radius: 1e-8,
            unit_circle: 1e-9,
            multiplicity: 1e-7,
            degree_drop: 1e-9,
            residual: 1e-10,
            separation: 1e-8,
            locus: 1e-9,
        }
    }
}

impl Tolerances {
    /// Names of any non-positive or non-finite fields.
    pub fn invalid_fields(&self) -> alloc::vec::Vec<&'static str> {
        let fields = [
            ("degeneracy_radius", self.degeneracy_radius),
            ("unit_circle", self.unit_circle),
            ("multiplicity", self.multiplicity),
            ("degree_drop", self.degree_drop),
            ("residual", self.residual),
            ("separation", self.separation),
            ("locus", self.locus),
        ];
        fields
            .into_iter()
            .filter(|(_, v)| !(v.is_finite() && *v > 0.0))
            .map(|(name, _)| name)
            .collect()
    }
}
