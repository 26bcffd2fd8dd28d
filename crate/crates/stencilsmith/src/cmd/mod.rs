//! Subcommand implementations.

pub mod bench;
pub mod model;
pub mod run;
pub mod tune;
pub mod verify;

use stencilsmith_core::grid::{make_grid, Grid3D};
use stencilsmith_core::kernels::{FieldSet, HdiffParams, KernelInput, VadvcParams};
use stencilsmith_core::perfmodel::reference_tile;
use stencilsmith_core::tiling::{plan_windows, TileSpec, WindowPlan};
use stencilsmith_core::{Dims3, Halo, InitSpec, Kernel};

use crate::cli::CliError;
use crate::config::RunConfig;
use crate::exec::default_workers;
use crate::io::Storable;

/// The kernel's reference tile, clamped to the interior of `dims`; vadvc
/// always spans the column.
pub fn default_tile(kernel: Kernel, dims: Dims3) -> TileSpec {
    let t = reference_tile(kernel).as_array();
    let ext = [
        dims.nx.saturating_sub(4),
        dims.ny.saturating_sub(4),
        dims.nz,
    ];
    let [tx, ty, tz] = [0, 1, 2].map(|a| t[a].min(ext[a]).max(1));
    TileSpec::new(tx, ty, if kernel.owns_columns() { dims.nz } else { tz })
}

pub fn plan_for(cfg: &RunConfig, kernel: Kernel) -> Result<WindowPlan, CliError> {
    let tile = cfg.tile.unwrap_or_else(|| default_tile(kernel, cfg.dims));
    Ok(plan_windows(cfg.dims, Halo::DYCORE, tile, kernel)?)
}

pub fn workers(cfg: &RunConfig) -> usize {
    crate::exec::capped_workers(cfg.workers.unwrap_or_else(default_workers))
}

/// Owned kernel inputs.
pub enum Inputs<T> {
    Grid { src: Grid3D<T>, c1: f64 },
    Fields(Box<FieldSet<T>>),
}

impl<T: Storable> Inputs<T> {
    /// Pseudo-random inputs for `kernel` on the configured grid.
    pub fn generate(cfg: &RunConfig, kernel: Kernel) -> Result<Self, CliError> {
        Ok(match kernel {
            Kernel::Vadvc => {
                let mut f = FieldSet::pseudo_random(cfg.dims, Halo::DYCORE, cfg.seed)?;
                f.params = VadvcParams::from_beta(cfg.beta_v, cfg.dtr_stage);
                Inputs::Fields(Box::new(FieldSet::new(
                    f.wcon,
                    f.ustage,
                    f.upos,
                    f.utens,
                    f.utensstage,
                    f.params,
                )?))
            }
            _ => Inputs::Grid {
                src: make_grid(
                    cfg.dims,
                    Halo::DYCORE,
                    InitSpec::PseudoRandom { seed: cfg.seed },
                )
                .map_err(|e| CliError::Failed(e.to_string()))?,
                c1: cfg.c1,
            },
        })
    }

    pub fn input(&self, kernel: Kernel) -> KernelInput<'_, T> {
        match (self, kernel) {
            (Inputs::Fields(f), _) => KernelInput::Vadvc(f),
            (Inputs::Grid { src, c1 }, Kernel::Hdiff) => KernelInput::Hdiff {
                src,
                params: HdiffParams { c1: *c1 },
            },
            (Inputs::Grid { src, .. }, _) => KernelInput::Copy(src),
        }
    }
}

/// Kernels named in the config, or all of them.
pub fn kernels(cfg: &RunConfig) -> Vec<Kernel> {
    match cfg.kernel {
        Some(k) => vec![k],
        None => Kernel::ALL.to_vec(),
    }
}
