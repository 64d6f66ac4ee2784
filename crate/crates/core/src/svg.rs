//! Standalone SVG rendering of region grids, locus curves and exceptional
//! points.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use num_complex::Complex64;

use crate::charpoly::ExceptionalSet;
use crate::locus::LocusCurve;
use crate::region::{RegionError, RegionGrid, Viewport};
use crate::stability::Status;

/// Fill and stroke colours, as SVG colour strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Palette {
    pub stable: String,
    pub unstable: String,
    pub marginal: String,
    pub exceptional_stable: String,
    pub exceptional_unstable: String,
    pub locus: String,
    pub axis: String,
}

impl Default for Palette {
    fn default() -> Self {
        Self {
            stable: "#a0522d".into(),
            unstable: "#ffffff".into(),
            marginal: "#d2b48c".into(),
            exceptional_stable: "#e00000".into(),
            exceptional_unstable: "#1f4fd0".into(),
            locus: "#202020".into(),
            axis: "#000000".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub width_px: u32,
    pub height_px: u32,
    pub palette: Palette,
    pub marker_radius_px: f64,
    pub include_locus: bool,
    pub include_exceptional: bool,
}

impl Default for PlotSpec {
    fn default() -> Self {
        Self {
            width_px: 640,
            height_px: 560,
            palette: Palette::default(),
            marker_radius_px: 5.0,
            include_locus: true,
            include_exceptional: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SvgError {
    #[error("image must be at least 64x64 pixels, got {width}x{height}")]
    TooSmall { width: u32, height: u32 },
    #[error("marker radius must be positive and finite, got {0}")]
    BadMarkerRadius(f64),
    #[error("palette entry `{0}` is empty")]
    EmptyColor(&'static str),
    #[error(transparent)]
    Region(#[from] RegionError),
}

impl PlotSpec {
    pub fn validate(&self) -> Result<(), SvgError> {
        if self.width_px < 64 || self.height_px < 64 {
            return Err(SvgError::TooSmall { width: self.width_px, height: self.height_px });
        }
        if !(self.marker_radius_px > 0.0 && self.marker_radius_px.is_finite()) {
            return Err(SvgError::BadMarkerRadius(self.marker_radius_px));
        }
        let p = &self.palette;
        for (name, color) in [
            ("stable", &p.stable),
            ("unstable", &p.unstable),
            ("marginal", &p.marginal),
            ("exceptional_stable", &p.exceptional_stable),
            ("exceptional_unstable", &p.exceptional_unstable),
            ("locus", &p.locus),
            ("axis", &p.axis),
        ] {
            if color.trim().is_empty() {
                return Err(SvgError::EmptyColor(name));
            }
        }
        Ok(())
    }
}

const MARGIN_LEFT: f64 = 56.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 16.0;
const MARGIN_BOTTOM: f64 = 40.0;

/// Affine map from the viewport to the plot area, imaginary axis pointing up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotTransform {
    pub viewport: Viewport,
    pub left: f64,
    pub top: f64,
    pub plot_width: f64,
    pub plot_height: f64,
}

impl PlotTransform {
    pub fn new(viewport: Viewport, width_px: u32, height_px: u32) -> Self {
        let plot_width = (width_px as f64 - MARGIN_LEFT - MARGIN_RIGHT).max(1.0);
        let plot_height = (height_px as f64 - MARGIN_TOP - MARGIN_BOTTOM).max(1.0);
        Self { viewport, left: MARGIN_LEFT, top: MARGIN_TOP, plot_width, plot_height }
    }

    pub fn to_px(&self, z: Complex64) -> (f64, f64) {
        let v = &self.viewport;
        let x = self.left + (z.re - v.re_min) / v.width() * self.plot_width;
        let y = self.top + (v.im_max - z.im) / v.height() * self.plot_height;
        (x, y)
    }

    pub fn from_px(&self, x: f64, y: f64) -> Complex64 {
        let v = &self.viewport;
        let re = v.re_min + (x - self.left) / self.plot_width * v.width();
        let im = v.im_max - (y - self.top) / self.plot_height * v.height();
        Complex64::new(re, im)
    }
}

/// Tick positions: a 1-2-5 step giving roughly six ticks.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|t| t as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let s = format!("{:.6}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// Renders an SVG document. Cells are drawn as rectangles centred on their
/// nodes, clipped to the viewport; unstable cells show the background.
/// Exceptional points inside the viewport get one circle each, coloured by
/// the classical verdict recorded for them in the grid.
pub fn render(
    grid: &RegionGrid,
    curve: Option<&LocusCurve>,
    exc: Option<&ExceptionalSet>,
    spec: &PlotSpec,
) -> Result<String, SvgError> {
    spec.validate()?;
    let gs = grid.spec();
    gs.viewport.validate()?;
    let v = gs.viewport;
    let t = PlotTransform::new(v, spec.width_px, spec.height_px);
    let pal = &spec.palette;
    let mut out = String::new();

    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = spec.width_px,
        h = spec.height_px
    );
    let _ = writeln!(
        out,
        r#"<rect class="background" x="0" y="0" width="{}" height="{}" fill="{}"/>"#,
        spec.width_px, spec.height_px, pal.unstable
    );

    // Region cells.
    let _ = writeln!(out, r#"<g class="region">"#);
    let (hx, hy) = (0.5 * gs.dx(), 0.5 * gs.dy());
    for j in 0..gs.ny {
        for i in 0..gs.nx {
            let cell = grid.cell(i, j);
            let (class, fill) = match cell.classical {
                Status::Stable => ("stable", &pal.stable),
                Status::Marginal => ("marginal", &pal.marginal),
                Status::Unstable => continue,
            };
            let node = gs.node(i, j);
            let lo = Complex64::new((node.re - hx).max(v.re_min), (node.im - hy).max(v.im_min));
            let hi = Complex64::new((node.re + hx).min(v.re_max), (node.im + hy).min(v.im_max));
            let (x0, y0) = t.to_px(Complex64::new(lo.re, hi.im));
            let (x1, y1) = t.to_px(Complex64::new(hi.re, lo.im));
            let _ = writeln!(
                out,
                r#"<rect class="{class}" x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                x1 - x0,
                y1 - y0
            );
        }
    }
    let _ = writeln!(out, "</g>");

    // Locus branches, split where the curve leaves the viewport or jumps.
    if let (true, Some(curve)) = (spec.include_locus, curve) {
        let _ = writeln!(out, r#"<g class="locus" fill="none" stroke="{}" stroke-width="1.5">"#, pal.locus);
        let step = core::f64::consts::TAU / curve.n_samples.max(1) as f64;
        let jump = 0.25 * v.width().max(v.height());
        for b in 0..curve.branches {
            let mut run: Vec<(f64, f64)> = Vec::new();
            let mut last: Option<(f64, Complex64)> = None;
            let flush = |run: &mut Vec<(f64, f64)>, out: &mut String| {
                if run.len() >= 2 {
                    let pts: Vec<String> = run.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                    let _ = writeln!(out, r#"<polyline class="branch-{b}" points="{}"/>"#, pts.join(" "));
                }
                run.clear();
            };
            for s in curve.branch(b) {
                let broken = last.is_some_and(|(theta, mu)| s.theta - theta > 1.5 * step || (s.mu - mu).norm() > jump);
                if broken || !v.contains(s.mu) {
                    flush(&mut run, &mut out);
                }
                last = Some((s.theta, s.mu));
                if v.contains(s.mu) {
                    run.push(t.to_px(s.mu));
                }
            }
            flush(&mut run, &mut out);
        }
        let _ = writeln!(out, "</g>");
    }

    // Axes, ticks and labels.
    let (ax0, ay0) = t.to_px(Complex64::new(v.re_min, v.im_min));
    let (ax1, ay1) = t.to_px(Complex64::new(v.re_max, v.im_max));
    let _ = writeln!(
        out,
        r#"<g class="axes" stroke="{c}" fill="none" font-family="sans-serif" font-size="11">"#,
        c = pal.axis
    );
    let _ = writeln!(out, r#"<rect x="{ax0:.2}" y="{ay1:.2}" width="{:.2}" height="{:.2}"/>"#, ax1 - ax0, ay0 - ay1);
    if v.im_min <= 0.0 && 0.0 <= v.im_max {
        let (_, y) = t.to_px(Complex64::new(0.0, 0.0));
        let _ = writeln!(out, r#"<line class="real-axis" x1="{ax0:.2}" y1="{y:.2}" x2="{ax1:.2}" y2="{y:.2}" stroke-dasharray="3,3"/>"#);
    }
    if v.re_min <= 0.0 && 0.0 <= v.re_max {
        let (x, _) = t.to_px(Complex64::new(0.0, 0.0));
        let _ = writeln!(out, r#"<line class="imag-axis" x1="{x:.2}" y1="{ay1:.2}" x2="{x:.2}" y2="{ay0:.2}" stroke-dasharray="3,3"/>"#);
    }
    for re in ticks(v.re_min, v.re_max) {
        let (x, _) = t.to_px(Complex64::new(re, v.im_min));
        let _ = writeln!(out, r#"<line x1="{x:.2}" y1="{ay0:.2}" x2="{x:.2}" y2="{:.2}"/>"#, ay0 + 5.0);
        let _ = writeln!(
            out,
            r#"<text class="tick-re" x="{x:.2}" y="{:.2}" stroke="none" fill="{}" text-anchor="middle">{}</text>"#,
            ay0 + 18.0,
            pal.axis,
            tick_label(re)
        );
    }
    for im in ticks(v.im_min, v.im_max) {
        let (_, y) = t.to_px(Complex64::new(v.re_min, im));
        let _ = writeln!(out, r#"<line x1="{:.2}" y1="{y:.2}" x2="{ax0:.2}" y2="{y:.2}"/>"#, ax0 - 5.0);
        let _ = writeln!(
            out,
            r#"<text class="tick-im" x="{:.2}" y="{:.2}" stroke="none" fill="{}" text-anchor="end">{}i</text>"#,
            ax0 - 8.0,
            y + 4.0,
            pal.axis,
            tick_label(im)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" stroke="none" fill="{}" text-anchor="middle">Re μ</text>"#,
        0.5 * (ax0 + ax1),
        spec.height_px as f64 - 6.0,
        pal.axis
    );
    let _ = writeln!(out, "</g>");

    // Exceptional points.
    if let (true, Some(exc)) = (spec.include_exceptional, exc) {
        let _ = writeln!(out, r#"<g class="exceptional">"#);
        for p in &exc.points {
            let Some(status) = exceptional_verdict(grid, p.value) else { continue };
            let (class, fill) = if status.is_stable() {
                ("exceptional-stable", &pal.exceptional_stable)
            } else {
                ("exceptional-unstable", &pal.exceptional_unstable)
            };
            let (x, y) = t.to_px(p.value);
            let _ = writeln!(
                out,
                r#"<circle class="{class}" cx="{x:.2}" cy="{y:.2}" r="{:.2}" fill="{fill}" stroke="{}"/>"#,
                spec.marker_radius_px, pal.axis
            );
        }
        let _ = writeln!(out, "</g>");
    }

    out.push_str("</svg>\n");
    Ok(out)
}

/// Classical verdict for an exceptional point: the snapped cell evaluated at
/// it, otherwise the cell containing it. `None` outside the viewport.
fn exceptional_verdict(grid: &RegionGrid, value: Complex64) -> Option<Status> {
    let gs = grid.spec();
    if !gs.viewport.contains(value) {
        return None;
    }
    let scale = 1.0 + value.norm();
    if let Some(cell) = grid.cells().iter().find(|c| c.snapped && (c.mu - value).norm() <= 1e-12 * scale) {
        return Some(cell.classical);
    }
    let (i, j) = gs.cell_of(value)?;
    Some(grid.cell(i, j).classical)
}
