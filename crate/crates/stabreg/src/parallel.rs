//! Row-parallel region scans.

use rayon::prelude::*;
use stabreg_core::charpoly::ExceptionalSet;
use stabreg_core::region::{scan_row, GridSpec, RegionError, RegionGrid};
use stabreg_core::{CharPoly, Tolerances};

#[derive(Debug, thiserror::Error)]
pub enum ScanError {
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Region(#[from] RegionError),
}

/// Default worker count: the available parallelism, or 1.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Same result as the sequential scan; rows are distributed over `workers`
/// threads and reassembled in order.
pub fn scan(cp: &CharPoly, exc: &ExceptionalSet, spec: &GridSpec, tol: &Tolerances, workers: usize) -> Result<RegionGrid, ScanError> {
    if workers == 0 {
        return Err(ScanError::NoWorkers);
    }
    if workers == 1 {
        return Ok(stabreg_core::region::scan(cp, exc, spec, tol)?);
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    let rows = pool.install(|| {
        (0..spec.ny)
            .into_par_iter()
            .map(|j| scan_row(cp, exc, spec, j, tol))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(RegionGrid::from_rows(*spec, rows))
}
