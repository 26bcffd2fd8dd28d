use std::io::Write;

use stencilsmith_core::grid::Grid3D;
use stencilsmith_core::kernels::HdiffParams;
use stencilsmith_core::kernels::KernelInput;
use stencilsmith_core::tiling::{plan_windows, TileSpec};
use stencilsmith_core::{Kernel, Precision};

use super::{default_tile, plan_for, workers, Inputs};
use crate::cli::CliError;
use crate::config::RunConfig;
use crate::exec::execute_tiled;
use crate::io::{load, save, AnyGrid, Storable};

pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let kernel = cfg.kernel()?;
    let result: AnyGrid = match &cfg.input {
        Some(path) => {
            if kernel == Kernel::Vadvc {
                return Err(CliError::Failed(
                    "vadvc needs five input fields; `input` takes one grid".into(),
                ));
            }
            match load(path)? {
                AnyGrid::F32(g) => run_on_grid(cfg, kernel, &g)?.into(),
                AnyGrid::F64(g) => run_on_grid(cfg, kernel, &g)?.into(),
            }
        }
        None => match cfg.precision {
            Precision::F32 => generated::<f32>(cfg, kernel)?.into(),
            Precision::F64 => generated::<f64>(cfg, kernel)?.into(),
        },
    };
    writeln!(
        out,
        "kernel={kernel} dims={} precision={}",
        result.dims(),
        result.precision()
    )?;
    writeln!(out, "checksum={}", result.interior_checksum())?;
    if let Some(path) = &cfg.out {
        save(path, &result)?;
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(())
}

fn generated<T: Storable + Send + Sync>(
    cfg: &RunConfig,
    kernel: Kernel,
) -> Result<Grid3D<T>, CliError> {
    let plan = plan_for(cfg, kernel)?;
    let inputs = Inputs::<T>::generate(cfg, kernel)?;
    Ok(execute_tiled(&inputs.input(kernel), &plan, workers(cfg))?)
}

fn run_on_grid<T: Storable + Send + Sync>(
    cfg: &RunConfig,
    kernel: Kernel,
    src: &Grid3D<T>,
) -> Result<Grid3D<T>, CliError> {
    let ext = src.interior().extent();
    let tile = cfg.tile.unwrap_or_else(|| {
        let t = default_tile(kernel, src.dims()).as_array();
        let [tx, ty, tz] = [0, 1, 2].map(|a| t[a].min(ext[a]).max(1));
        TileSpec::new(tx, ty, tz)
    });
    let plan = plan_windows(src.dims(), src.halo(), tile, kernel)?;
    let input = match kernel {
        Kernel::Hdiff => KernelInput::Hdiff {
            src,
            params: HdiffParams { c1: cfg.c1 },
        },
        _ => KernelInput::Copy(src),
    };
    input.validate()?;
    Ok(execute_tiled(&input, &plan, workers(cfg))?)
}
