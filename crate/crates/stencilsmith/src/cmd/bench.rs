use std::fs::File;
use std::io::{BufWriter, Write};
use std::time::{Duration, Instant};

use stencilsmith_core::kernels::count_flops;
use stencilsmith_core::{Kernel, Precision};

use super::{kernels, plan_for, workers, Inputs};
use crate::cli::CliError;
use crate::config::RunConfig;
use crate::exec::execute_tiled;
use crate::io::Storable;
use crate::report::{writer, BenchRow, BENCH_HEADER};

pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for kernel in kernels(cfg) {
        rows.push(match cfg.precision {
            Precision::F32 => bench::<f32>(cfg, kernel)?,
            Precision::F64 => bench::<f64>(cfg, kernel)?,
        });
    }
    match &cfg.out {
        Some(path) => write_rows(BufWriter::new(File::create(path)?), &rows),
        None => write_rows(out, &rows),
    }
}

fn write_rows(w: impl Write, rows: &[BenchRow]) -> Result<(), CliError> {
    let mut csv = writer(w);
    csv.write_record(BENCH_HEADER)?;
    for r in rows {
        csv.write_record(r.record())?;
    }
    csv.flush()?;
    Ok(())
}

/// Median of the timed runs after one warm-up.
pub fn bench<T: Storable + Send + Sync>(
    cfg: &RunConfig,
    kernel: Kernel,
) -> Result<BenchRow, CliError> {
    let plan = plan_for(cfg, kernel)?;
    let workers = workers(cfg);
    let inputs = Inputs::<T>::generate(cfg, kernel)?;
    let input = inputs.input(kernel);

    let mut output = execute_tiled(&input, &plan, workers)?;
    let mut times: Vec<Duration> = Vec::with_capacity(cfg.reps);
    for _ in 0..cfg.reps {
        let start = Instant::now();
        output = execute_tiled(&input, &plan, workers)?;
        times.push(start.elapsed());
    }
    times.sort();
    let time_s = times[times.len() / 2].as_secs_f64();
    let flops = count_flops(kernel, cfg.dims).total as f64;
    Ok(BenchRow {
        kernel,
        dims: cfg.dims.as_array(),
        tile: plan.tile.to_string(),
        workers,
        precision: T::PRECISION.to_string(),
        time_s,
        gflops: if time_s > 0.0 {
            flops / time_s / 1e9
        } else {
            0.0
        },
        checksum: output.interior_checksum(),
    })
}
