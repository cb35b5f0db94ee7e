//! Parallel trim-map construction.

use rayon::prelude::*;
use tiltwing_core::trim::{
    hover_guess, TrimConfig, TrimError, TrimGrid, TrimMap, TrimMapBuilder, TrimSolution, MAX_SWEEPS,
};
use tiltwing_core::VehicleParams;

/// Builds a trim map with the jobs of each sweep spread over the rayon pool.
///
/// Sweeps are merged in job order, so the result equals the sequential build
/// for any number of threads.
pub fn build_trim_map_parallel(
    grid: TrimGrid,
    seed: (f64, f64, TrimSolution),
    p: &VehicleParams,
    cfg: &TrimConfig,
    mut progress: impl FnMut(usize, usize),
) -> Result<TrimMap, TrimError> {
    let mut builder = TrimMapBuilder::new(grid, p, *cfg)?;
    builder.seed(seed.0, seed.1, &seed.2)?;
    for sweep in 0..MAX_SWEEPS {
        let jobs = builder.pending_jobs();
        if jobs.is_empty() {
            break;
        }
        progress(sweep + 1, jobs.len());
        let results: Vec<_> = jobs
            .into_par_iter()
            .map(|job| {
                let pt = builder.run_job(&job);
                (job, pt)
            })
            .collect();
        if !builder.apply(results) {
            break;
        }
    }
    Ok(builder.finish())
}

/// Default grid seeded at hover.
pub fn build_default_map(p: &VehicleParams, cfg: &TrimConfig) -> Result<TrimMap, TrimError> {
    build_trim_map_parallel(TrimGrid::standard(), (0.0, 0.0, hover_guess(p)), p, cfg, |_, _| {})
}
