use std::io::Write;

use stencilsmith_core::grid::compare;
use stencilsmith_core::kernels::{max_oracle_error, KernelInput};
use stencilsmith_core::tiling::validate_plan;
use stencilsmith_core::{Precision, Region};

use super::{plan_for, workers, Inputs};
use crate::cli::CliError;
use crate::config::RunConfig;
use crate::exec::execute_tiled;
use crate::io::Storable;

/// Oracle tolerance on the normwise relative column error.
pub fn oracle_tolerance(p: Precision) -> f64 {
    match p {
        Precision::F32 => 1e-6,
        Precision::F64 => 1e-12,
    }
}

pub fn run(cfg: &RunConfig, corrupt_plan: bool, out: &mut dyn Write) -> Result<(), CliError> {
    match cfg.precision {
        Precision::F32 => verify::<f32>(cfg, corrupt_plan, out),
        Precision::F64 => verify::<f64>(cfg, corrupt_plan, out),
    }
}

fn verify<T: Storable + Send + Sync>(
    cfg: &RunConfig,
    corrupt_plan: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let kernel = cfg.kernel()?;
    let mut plan = plan_for(cfg, kernel)?;
    if corrupt_plan {
        plan.tiles.pop();
    }
    let workers = workers(cfg);
    let inputs = Inputs::<T>::generate(cfg, kernel)?;
    let input = inputs.input(kernel);
    input.validate()?;

    writeln!(
        out,
        "kernel={kernel} dims={} tile={} tiles={} workers={workers} precision={}",
        cfg.dims,
        plan.tile,
        plan.tiles.len(),
        T::PRECISION
    )?;
    let mut failures = Vec::new();
    match validate_plan(&plan, cfg.dims) {
        Ok(()) => writeln!(out, "plan=ok")?,
        Err(v) => {
            writeln!(out, "plan={v}")?;
            failures.push(format!("invalid plan: {v}"));
        }
    }

    let tiled = execute_tiled(&input, &plan, workers)?;
    let reference = input.reference()?;
    let report =
        compare(&tiled, &reference, Region::All).map_err(|e| CliError::Failed(e.to_string()))?;
    writeln!(out, "max_ulp_diff={}", report.max_ulp_diff)?;
    writeln!(out, "max_abs_diff={}", report.max_abs_diff)?;
    if let Some([i, j, k]) = report.first_mismatch {
        writeln!(out, "first_mismatch=({i},{j},{k})")?;
        failures.push(format!(
            "tiled output differs from the reference at ({i},{j},{k})"
        ));
    }

    if let KernelInput::Vadvc(fields) = input {
        let err = max_oracle_error(fields, &tiled)?;
        let tol = oracle_tolerance(T::PRECISION);
        writeln!(out, "max_rel_residual={err:e} tolerance={tol:e}")?;
        if err.is_nan() || err > tol {
            failures.push(format!("column oracle error {err:e} exceeds {tol:e}"));
        }
    }

    if failures.is_empty() {
        writeln!(out, "PASS")?;
        Ok(())
    } else {
        writeln!(out, "FAIL")?;
        Err(CliError::Failed(failures.join("; ")))
    }
}
