//! CSV and JSON output formats.

use std::io::Write;

use serde::Serialize;
use stabreg_core::region::RegionGrid;
use stabreg_core::simulate::RecurrenceRun;
use stabreg_core::stability::Status;
use stabreg_core::{Complex64, LocusCurve};

pub const REGION_HEADER: [&str; 7] = ["re", "im", "classical", "refined", "marginal", "degenerate", "max_modulus"];
pub const LOCUS_HEADER: [&str; 4] = ["theta", "branch", "re", "im"];
pub const TRAJECTORY_HEADER: [&str; 4] = ["n", "re", "im", "abs"];

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// One row per node, row-major from `(re_min, im_min)`; flags are 0/1.
pub fn write_region_csv<W: Write>(grid: &RegionGrid, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REGION_HEADER)?;
    let spec = grid.spec();
    for j in 0..spec.ny {
        for i in 0..spec.nx {
            let node = spec.node(i, j);
            let cell = grid.cell(i, j);
            w.write_record([
                format_f64(node.re),
                format_f64(node.im),
                flag(cell.classical == Status::Stable).into(),
                flag(cell.refined == Status::Stable).into(),
                flag(cell.classical == Status::Marginal).into(),
                flag(cell.degenerate).into(),
                format_f64(cell.max_modulus),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_locus_csv<W: Write>(curve: &LocusCurve, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LOCUS_HEADER)?;
    for s in &curve.samples {
        w.write_record([format_f64(s.theta), s.branch.to_string(), format_f64(s.mu.re), format_f64(s.mu.im)])?;
    }
    w.flush()?;
    Ok(())
}

/// Requires a run made with `record_trajectory`.
pub fn write_trajectory_csv<W: Write>(run: &RecurrenceRun, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for (n, y) in run.trajectory.iter().enumerate() {
        w.write_record([n.to_string(), format_f64(y.re), format_f64(y.im), format_f64(y.norm())])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexRecord {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexRecord {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

/// Shortest round-trip digits, switching to exponent notation for very
/// small or large magnitudes.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e16).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

/// `a+bi` with [`format_f64`] parts.
pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", format_f64(z.re), sign, format_f64(z.im.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use stabreg_core::catalog::builtin;
    use stabreg_core::charpoly::exceptional_set;
    use stabreg_core::region::{scan, GridSpec, Viewport};
    use stabreg_core::{CharPoly, Tolerances};

    #[test]
    fn region_rows_start_at_the_lower_left() {
        let tol = Tolerances::default();
        let cp = CharPoly::new(&builtin("implicit_euler").unwrap());
        let exc = exceptional_set(&cp, &tol);
        let spec = GridSpec::new(Viewport::new(-1.0, 1.0, -1.0, 1.0).unwrap(), 3, 2).unwrap();
        let grid = scan(&cp, &exc, &spec, &tol).unwrap();
        let mut buf = Vec::new();
        write_region_csv(&grid, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "re,im,classical,refined,marginal,degenerate,max_modulus");
        assert_eq!(lines.len(), 7);
        assert!(lines[1].starts_with("-1,-1,1,1,0,0,"));
        assert!(lines[2].starts_with("0,-1,"));
        assert!(lines[4].starts_with("-1,1,"));
    }

    #[test]
    fn complex_formatting() {
        assert_eq!(format_complex(Complex64::new(1.5, 0.0)), "1.5+0i");
        assert_eq!(format_complex(Complex64::new(-2.0, -0.25)), "-2-0.25i");
        assert_eq!(format_f64(6.5e-55), "6.5e-55");
        assert_eq!(format_f64(-1.2e20), "-1.2e20");
    }
}
