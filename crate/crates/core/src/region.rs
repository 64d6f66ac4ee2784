//! Rasterized stability verdicts over a rectangle of the complex plane.
//!
//! Verdicts are taken at lattice nodes. A point of the exceptional set is a
//! single point of measure zero and would almost never coincide with a node,
//! so the node whose cell contains an exceptional point is evaluated at that
//! point instead (and marked `snapped`). A node that already coincides with
//! the point is unaffected by this.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::charpoly::{CharPoly, ExceptionalSet};
use crate::stability::{self, ClassifyError, Status};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegionError {
    #[error("degenerate viewport: re [{re_min}, {re_max}], im [{im_min}, {im_max}]")]
    DegenerateViewport { re_min: f64, re_max: f64, im_min: f64, im_max: f64 },
    #[error("grid needs at least 2 nodes per axis, got {nx}x{ny}")]
    TooFewNodes { nx: usize, ny: usize },
    #[error("grids have different specifications")]
    SpecMismatch,
    #[error("classification failed at node ({i}, {j}): {source}")]
    Classify { i: usize, j: usize, source: ClassifyError },
}

/// A rectangle `[re_min, re_max] × [im_min, im_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Viewport {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self, RegionError> {
        let v = Self { re_min, re_max, im_min, im_max };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<(), RegionError> {
        let ok = [self.re_min, self.re_max, self.im_min, self.im_max].iter().all(|x| x.is_finite())
            && self.re_min < self.re_max
            && self.im_min < self.im_max;
        if ok {
            Ok(())
        } else {
            Err(RegionError::DegenerateViewport {
                re_min: self.re_min,
                re_max: self.re_max,
                im_min: self.im_min,
                im_max: self.im_max,
            })
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (self.re_min..=self.re_max).contains(&z.re) && (self.im_min..=self.im_max).contains(&z.im)
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    /// Smallest box containing all `points`, padded by `pad` of its span on
    /// every side (at least 1 unit).
    pub fn enclosing(points: impl IntoIterator<Item = Complex64>, pad: f64) -> Option<Self> {
        let mut it = points.into_iter().filter(|z| z.re.is_finite() && z.im.is_finite());
        let first = it.next()?;
        let (mut a, mut b, mut c, mut d) = (first.re, first.re, first.im, first.im);
        for z in it {
            a = a.min(z.re);
            b = b.max(z.re);
            c = c.min(z.im);
            d = d.max(z.im);
        }
        let span = (b - a).max(d - c).max(1.0);
        let margin = span * pad;
        Self::new(a - margin, b + margin, c - margin, d + margin).ok()
    }
}

/// Lattice of `nx × ny` nodes spanning a viewport, corners included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub viewport: Viewport,
    pub nx: usize,
    pub ny: usize,
}

/// Node `i` of `n` on `[lo, hi]`, computed about the midpoint so that
/// intervals symmetric about zero give exactly negated coordinates and an
/// odd node count hits the midpoint exactly.
fn lattice(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let steps = (n - 1) as f64;
    mid + half * (2.0 * i as f64 - steps) / steps
}

impl GridSpec {
    pub fn new(viewport: Viewport, nx: usize, ny: usize) -> Result<Self, RegionError> {
        viewport.validate()?;
        if nx < 2 || ny < 2 {
            return Err(RegionError::TooFewNodes { nx, ny });
        }
        Ok(Self { viewport, nx, ny })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        self.viewport.width() / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        self.viewport.height() / (self.ny - 1) as f64
    }

    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        let v = &self.viewport;
        Complex64::new(lattice(v.re_min, v.re_max, i, self.nx), lattice(v.im_min, v.im_max, j, self.ny))
    }

    /// Row-major index, rows running from `im_min` upwards.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Node whose cell (half a spacing in each direction) contains `z`.
    pub fn cell_of(&self, z: Complex64) -> Option<(usize, usize)> {
        let fi = ((z.re - self.viewport.re_min) / self.dx()).round();
        let fj = ((z.im - self.viewport.im_min) / self.dy()).round();
        if !(fi >= 0.0 && fj >= 0.0 && fi < self.nx as f64 && fj < self.ny as f64) {
            return None;
        }
        let (i, j) = (fi as usize, fj as usize);
        let node = self.node(i, j);
        let inside = (z.re - node.re).abs() <= 0.5 * self.dx() && (z.im - node.im).abs() <= 0.5 * self.dy();
        inside.then_some((i, j))
    }
}

/// Compact verdict record for one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    /// Point at which the verdict was evaluated: the node, or the exceptional
    /// point its cell contains.
    pub mu: Complex64,
    pub classical: Status,
    pub refined: Status,
    pub degenerate: bool,
    pub snapped: bool,
    pub max_modulus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictField {
    Classical,
    Refined,
}

impl Cell {
    pub fn field(&self, field: VerdictField) -> Status {
        match field {
            VerdictField::Classical => self.classical,
            VerdictField::Refined => self.refined,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionGrid {
    spec: GridSpec,
    cells: Vec<Cell>,
}

impl RegionGrid {
    /// Assembles a grid from rows produced by [`scan_row`], in row order.
    pub fn from_rows(spec: GridSpec, rows: Vec<Vec<Cell>>) -> Self {
        let cells: Vec<Cell> = rows.into_iter().flatten().collect();
        assert_eq!(cells.len(), spec.len(), "row data does not match the grid");
        Self { spec, cells }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, i: usize, j: usize) -> &Cell {
        &self.cells[self.spec.index(i, j)]
    }

    pub fn count(&self, pred: impl Fn(&Cell) -> bool) -> usize {
        self.cells.iter().filter(|c| pred(c)).count()
    }
}

/// Exceptional points claimed by nodes of row `j`: `(i, point index)`.
fn snapped_in_row(exc: &ExceptionalSet, spec: &GridSpec, j: usize) -> Vec<(usize, usize)> {
    let mut claimed: Vec<(usize, usize, f64)> = Vec::new();
    for (index, value) in exc.values().enumerate() {
        let Some((i, row)) = spec.cell_of(value) else { continue };
        if row != j {
            continue;
        }
        let dist = (value - spec.node(i, j)).norm();
        match claimed.iter_mut().find(|c| c.0 == i) {
            Some(c) if dist < c.2 => *c = (i, index, dist),
            Some(_) => {}
            None => claimed.push((i, index, dist)),
        }
    }
    claimed.into_iter().map(|(i, index, _)| (i, index)).collect()
}

/// Classifies every node of row `j`.
pub fn scan_row(cp: &CharPoly, exc: &ExceptionalSet, spec: &GridSpec, j: usize, tol: &Tolerances) -> Result<Vec<Cell>, RegionError> {
    let snapped = snapped_in_row(exc, spec, j);
    (0..spec.nx)
        .map(|i| {
            let wrap = |source| RegionError::Classify { i, j, source };
            let (verdict, was_snapped) = match snapped.iter().find(|(si, _)| *si == i) {
                Some(&(_, index)) => (stability::classify_exceptional_point(cp, exc, index, tol).map_err(wrap)?, true),
                None => (stability::classify(cp, exc, spec.node(i, j), tol).map_err(wrap)?, false),
            };
            Ok(Cell {
                mu: verdict.mu,
                classical: verdict.classical,
                refined: verdict.refined,
                degenerate: verdict.degenerate,
                snapped: was_snapped,
                max_modulus: verdict.max_modulus,
            })
        })
        .collect()
}

/// Classifies every node, row by row.
pub fn scan(cp: &CharPoly, exc: &ExceptionalSet, spec: &GridSpec, tol: &Tolerances) -> Result<RegionGrid, RegionError> {
    let rows = (0..spec.ny)
        .map(|j| scan_row(cp, exc, spec, j, tol))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RegionGrid::from_rows(*spec, rows))
}

/// A node where the selected verdict fields of two grids differ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Difference {
    pub index: usize,
    pub mu: Complex64,
    pub left: Status,
    pub right: Status,
}

/// Nodes where `a.field_a` and `b.field_b` differ.
pub fn compare(a: &RegionGrid, field_a: VerdictField, b: &RegionGrid, field_b: VerdictField) -> Result<Vec<Difference>, RegionError> {
    if a.spec != b.spec {
        return Err(RegionError::SpecMismatch);
    }
    Ok(a.cells
        .iter()
        .zip(&b.cells)
        .enumerate()
        .filter(|(_, (x, y))| x.field(field_a) != y.field(field_b))
        .map(|(index, (x, y))| Difference { index, mu: x.mu, left: x.field(field_a), right: y.field(field_b) })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{builtin, standard_viewport};
    use crate::charpoly::exceptional_set;

    fn setup(name: &str) -> (CharPoly, ExceptionalSet, Tolerances) {
        let cp = CharPoly::new(&builtin(name).unwrap());
        let tol = Tolerances::default();
        let exc = exceptional_set(&cp, &tol);
        (cp, exc, tol)
    }

    #[test]
    fn spec_validation() {
        assert!(Viewport::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(Viewport::new(0.0, 1.0, 2.0, -1.0).is_err());
        let v = Viewport::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        assert_eq!(GridSpec::new(v, 1, 5).unwrap_err(), RegionError::TooFewNodes { nx: 1, ny: 5 });
    }

    #[test]
    fn lattice_is_symmetric_and_hits_midpoint() {
        let spec = GridSpec::new(Viewport::new(-3.0, 3.0, -3.0, 3.0).unwrap(), 401, 401).unwrap();
        for j in 0..401 {
            assert_eq!(spec.node(0, j).im, -spec.node(0, 400 - j).im);
        }
        assert_eq!(spec.node(200, 200), Complex64::new(0.0, 0.0));
        assert_eq!(spec.node(0, 0), Complex64::new(-3.0, -3.0));
        assert_eq!(spec.node(400, 400), Complex64::new(3.0, 3.0));
        let bdf2 = GridSpec::new(Viewport::new(-2.0, 5.0, -3.0, 3.0).unwrap(), 15, 13).unwrap();
        assert_eq!(bdf2.node(7, 6), Complex64::new(1.5, 0.0));
    }

    #[test]
    fn implicit_euler_differs_only_at_one() {
        let (cp, exc, tol) = setup("implicit_euler");
        let spec = GridSpec::new(Viewport::new(-3.0, 3.0, -3.0, 3.0).unwrap(), 101, 101).unwrap();
        let grid = scan(&cp, &exc, &spec, &tol).unwrap();
        let classical = grid.count(|c| c.classical.is_stable());
        let refined = grid.count(|c| c.refined.is_stable());
        assert_eq!(classical, refined + 1);
        let diff = compare(&grid, VerdictField::Classical, &grid, VerdictField::Refined).unwrap();
        assert_eq!(diff.len(), 1);
        assert_eq!(diff[0].mu, Complex64::new(1.0, 0.0));
        assert!(compare(&grid, VerdictField::Classical, &grid, VerdictField::Classical).unwrap().is_empty());
    }

    #[test]
    fn bdf2_has_one_degenerate_stable_cell() {
        let (cp, exc, tol) = setup("bdf2");
        // 3/2 is a lattice point of this grid.
        let spec = GridSpec::new(standard_viewport("bdf2").unwrap(), 71, 61).unwrap();
        assert_eq!(spec.node(35, 30), Complex64::new(1.5, 0.0));
        let grid = scan(&cp, &exc, &spec, &tol).unwrap();
        let degenerate: Vec<&Cell> = grid.cells().iter().filter(|c| c.degenerate).collect();
        assert_eq!(degenerate.len(), 1);
        assert!(degenerate[0].classical.is_stable());
        assert_eq!(degenerate[0].mu, Complex64::new(1.5, 0.0));
        let diff = compare(&grid, VerdictField::Classical, &grid, VerdictField::Refined).unwrap();
        assert_eq!(diff.len(), 1);
        assert_eq!(diff[0].index, spec.index(35, 30));
    }

    #[test]
    fn explicit_scheme_has_no_degenerate_cells() {
        let (cp, exc, tol) = setup("explicit_euler");
        let spec = GridSpec::new(standard_viewport("explicit_euler").unwrap(), 41, 41).unwrap();
        let grid = scan(&cp, &exc, &spec, &tol).unwrap();
        assert_eq!(grid.count(|c| c.degenerate), 0);
    }

    #[test]
    fn compare_rejects_mismatched_specs() {
        let (cp, exc, tol) = setup("bdf2");
        let v = standard_viewport("bdf2").unwrap();
        let a = scan(&cp, &exc, &GridSpec::new(v, 5, 5).unwrap(), &tol).unwrap();
        let b = scan(&cp, &exc, &GridSpec::new(v, 6, 5).unwrap(), &tol).unwrap();
        assert_eq!(compare(&a, VerdictField::Classical, &b, VerdictField::Classical).unwrap_err(), RegionError::SpecMismatch);
    }

    #[test]
    fn off_lattice_exceptional_point_is_snapped() {
        let (cp, exc, tol) = setup("implicit_euler");
        // Node spacing 0.06: 1 is not a lattice point.
        let spec = GridSpec::new(Viewport::new(-3.0, 3.0, -3.0, 3.0).unwrap(), 101, 101).unwrap();
        let (i, j) = spec.cell_of(Complex64::new(1.0, 0.0)).unwrap();
        assert!((spec.node(i, j).re - 1.0).abs() > 1e-3);
        let grid = scan(&cp, &exc, &spec, &tol).unwrap();
        let cell = grid.cell(i, j);
        assert!(cell.snapped && cell.degenerate && cell.classical.is_stable());
        assert_eq!(cell.mu, Complex64::new(1.0, 0.0));
    }
}
