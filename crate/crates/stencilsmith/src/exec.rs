//! Multi-threaded tiled execution.

use std::thread;

use stencilsmith_core::grid::Grid3D;
use stencilsmith_core::kernels::KernelInput;
use stencilsmith_core::tiling::{
    check_plan_inputs, compute_tile, scatter_tile, ExecError, WindowPlan,
};
use stencilsmith_core::Real;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "STENCILSMITH_THREADS";

/// `requested` workers, limited by `STENCILSMITH_THREADS` when it holds a
/// positive integer.
pub fn capped_workers(requested: usize) -> usize {
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&c| c > 0);
    match cap {
        Some(c) => requested.min(c),
        None => requested,
    }
}

pub fn default_workers() -> usize {
    capped_workers(thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs `plan` on `workers` threads. Worker `w` takes the `w`-th contiguous
/// block of tiles; results are scattered in plan order, so the output does
/// not depend on scheduling.
pub fn execute_tiled<T>(
    input: &KernelInput<'_, T>,
    plan: &WindowPlan,
    workers: usize,
) -> Result<Grid3D<T>, ExecError>
where
    T: Real + Send + Sync,
{
    if workers == 0 {
        return Err(ExecError::Worker("worker count must be at least 1"));
    }
    check_plan_inputs(input, plan)?;
    let mut out = input.passthrough().clone();
    let workers = workers.min(plan.tiles.len()).max(1);

    let blocks: Vec<Result<Vec<Vec<T>>, ExecError>> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let range = plan.worker_range(w, workers);
                s.spawn(move || {
                    plan.tiles[range]
                        .iter()
                        .map(|t| compute_tile(input, t).map_err(ExecError::from))
                        .collect()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .unwrap_or(Err(ExecError::Worker("worker panicked")))
            })
            .collect()
    });

    let mut tiles = plan.tiles.iter();
    for block in blocks {
        for values in block? {
            let tile = tiles
                .next()
                .ok_or(ExecError::Worker("worker returned extra tiles"))?;
            scatter_tile(&mut out, tile, &values);
        }
    }
    Ok(out)
}
