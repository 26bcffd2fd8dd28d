//! Window decomposition of the kernel domain and tile-by-tile execution.
//!
//! A [`WindowPlan`] partitions the interior of a grid into boxes. Each tile
//! reads its interior plus the kernel's neighbour reach from the shared,
//! immutable input grids and writes only its own interior, so tiles can run
//! in any order or concurrently and still reproduce the reference sweep bit
//! for bit.

use alloc::vec::Vec;
use core::fmt;

use crate::grid::{Box3, Dims3, Grid3D, Halo};
use crate::kernels::{hdiff_point, vadvc_column, ColumnScratch, Kernel, KernelError, KernelInput};
use crate::real::Real;

/// Tile extents in interior points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TileSpec {
    pub tx: usize,
    pub ty: usize,
    pub tz: usize,
}

impl TileSpec {
    pub const fn new(tx: usize, ty: usize, tz: usize) -> Self {
        TileSpec { tx, ty, tz }
    }

    pub const fn as_array(&self) -> [usize; 3] {
        [self.tx, self.ty, self.tz]
    }
}

impl fmt::Display for TileSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.tx, self.ty, self.tz)
    }
}

/// One window: its interior and the neighbour layers it may read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tile {
    pub origin: [usize; 3],
    pub extent: [usize; 3],
    /// Readable layers below `origin` per axis.
    pub halo_lo: [usize; 3],
    /// Readable layers past `origin + extent` per axis.
    pub halo_hi: [usize; 3],
}

impl Tile {
    pub fn interior(&self) -> Box3 {
        Box3 {
            lo: self.origin,
            hi: [0, 1, 2].map(|a| self.origin[a] + self.extent[a]),
        }
    }

    pub fn read_region(&self) -> Box3 {
        Box3 {
            lo: [0, 1, 2].map(|a| self.origin[a] - self.halo_lo[a]),
            hi: [0, 1, 2].map(|a| self.origin[a] + self.extent[a] + self.halo_hi[a]),
        }
    }

    pub fn volume(&self) -> usize {
        self.extent.iter().product()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("grid interior is empty")]
    EmptyInterior,
    #[error("tile extent along axis {axis} is {tile}, allowed 1..={max}")]
    BadTileExtent { axis: char, tile: usize, max: usize },
    #[error("vadvc tiles must span all {nz} levels, got tz = {tz}")]
    VerticalSplit { tz: usize, nz: usize },
    #[error("{kernel} needs a grid halo of at least {required:?}, got {found:?}")]
    InsufficientHalo {
        kernel: Kernel,
        required: Halo,
        found: Halo,
    },
}

/// Ordered tile list covering a grid interior.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowPlan {
    pub dims: Dims3,
    pub halo: Halo,
    pub kernel: Kernel,
    pub tile: TileSpec,
    /// Sorted by `(k, j, i)` of the origin.
    pub tiles: Vec<Tile>,
    /// Intended number of processing elements.
    pub workers: usize,
}

fn interior_box(dims: Dims3, halo: Halo) -> Box3 {
    let d = dims.as_array();
    let h = halo.as_array();
    let lo = [0, 1, 2].map(|a| h[a].min(d[a]));
    Box3 {
        lo,
        hi: [0, 1, 2].map(|a| d[a].saturating_sub(h[a]).max(lo[a])),
    }
}

/// Splits the interior of a `dims` grid with halo `halo` into windows of
/// `tile` points. Edge windows shrink to fit; none are dropped.
pub fn plan_windows(
    dims: Dims3,
    halo: Halo,
    tile: TileSpec,
    kernel: Kernel,
) -> Result<WindowPlan, PlanError> {
    let req = kernel.min_halo();
    if halo.i < req.i || halo.j < req.j || halo.k < req.k {
        return Err(PlanError::InsufficientHalo {
            kernel,
            required: req,
            found: halo,
        });
    }
    if kernel.owns_columns() && halo.k != 0 {
        return Err(PlanError::InsufficientHalo {
            kernel,
            required: req,
            found: halo,
        });
    }
    let domain = interior_box(dims, halo);
    let ext = domain.extent();
    if domain.volume() == 0 {
        return Err(PlanError::EmptyInterior);
    }
    let t = tile.as_array();
    for (a, axis) in ['i', 'j', 'k'].into_iter().enumerate() {
        if t[a] == 0 || t[a] > ext[a] {
            return Err(PlanError::BadTileExtent {
                axis,
                tile: t[a],
                max: ext[a],
            });
        }
    }
    if kernel.owns_columns() && tile.tz != ext[2] {
        return Err(PlanError::VerticalSplit {
            tz: tile.tz,
            nz: ext[2],
        });
    }

    let (reach_lo, reach_hi) = kernel.read_halo();
    let d = dims.as_array();
    let mut tiles = Vec::new();
    for k0 in (domain.lo[2]..domain.hi[2]).step_by(tile.tz) {
        for j0 in (domain.lo[1]..domain.hi[1]).step_by(tile.ty) {
            for i0 in (domain.lo[0]..domain.hi[0]).step_by(tile.tx) {
                let origin = [i0, j0, k0];
                let extent = [0, 1, 2].map(|a| t[a].min(domain.hi[a] - origin[a]));
                tiles.push(Tile {
                    origin,
                    extent,
                    halo_lo: [0, 1, 2].map(|a| reach_lo[a].min(origin[a])),
                    halo_hi: [0, 1, 2].map(|a| reach_hi[a].min(d[a] - origin[a] - extent[a])),
                });
            }
        }
    }
    Ok(WindowPlan {
        dims,
        halo,
        kernel,
        tile,
        tiles,
        workers: 1,
    })
}

impl WindowPlan {
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn domain(&self) -> Box3 {
        interior_box(self.dims, self.halo)
    }

    pub fn interior_volume(&self) -> usize {
        self.tiles.iter().map(Tile::volume).sum()
    }

    /// Contiguous block of tiles handed to `worker` out of `workers` under
    /// static block assignment in plan order.
    pub fn worker_range(&self, worker: usize, workers: usize) -> core::ops::Range<usize> {
        let n = self.tiles.len();
        let per = n.div_ceil(workers.max(1));
        let start = (worker * per).min(n);
        start..(start + per).min(n)
    }
}

/// First broken invariant of a plan.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanViolation {
    #[error("plan built for {plan}, grid is {grid}")]
    DimsMismatch { plan: Dims3, grid: Dims3 },
    #[error("tile {tile} has an empty or out-of-domain interior")]
    OutOfDomain { tile: usize },
    #[error("tile {tile} reads outside the grid or lacks the kernel halo")]
    ReadOutOfBounds { tile: usize },
    #[error("tile {tile} overlaps an earlier tile at {at:?}")]
    Overlap { tile: usize, at: [usize; 3] },
    #[error("interior point {at:?} is not covered by any tile")]
    Coverage { at: [usize; 3] },
    #[error("tile {tile} is out of (k, j, i) order")]
    OutOfOrder { tile: usize },
}

/// Checks partition, containment and ordering of `plan` against a grid of `dims`.
pub fn validate_plan(plan: &WindowPlan, dims: Dims3) -> Result<(), PlanViolation> {
    if plan.dims != dims {
        return Err(PlanViolation::DimsMismatch {
            plan: plan.dims,
            grid: dims,
        });
    }
    let domain = plan.domain();
    let whole = Box3::whole(dims);
    let (reach_lo, reach_hi) = plan.kernel.read_halo();
    let ext = domain.extent();
    let mut owner = alloc::vec![false; domain.volume()];
    let slot = |p: [usize; 3]| {
        let r = [0, 1, 2].map(|a| p[a] - domain.lo[a]);
        (r[2] * ext[1] + r[1]) * ext[0] + r[0]
    };

    for (n, t) in plan.tiles.iter().enumerate() {
        let inner = t.interior();
        if t.volume() == 0
            || !(0..3).all(|a| domain.lo[a] <= inner.lo[a] && inner.hi[a] <= domain.hi[a])
        {
            return Err(PlanViolation::OutOfDomain { tile: n });
        }
        let read = t.read_region();
        let halo_ok = (0..3).all(|a| t.halo_lo[a] >= reach_lo[a] && t.halo_hi[a] >= reach_hi[a]);
        if !halo_ok || !(0..3).all(|a| t.halo_lo[a] <= t.origin[a] && read.hi[a] <= whole.hi[a]) {
            return Err(PlanViolation::ReadOutOfBounds { tile: n });
        }
        if n > 0 {
            let prev = plan.tiles[n - 1].origin;
            let key = |o: [usize; 3]| (o[2], o[1], o[0]);
            if key(prev) >= key(t.origin) {
                return Err(PlanViolation::OutOfOrder { tile: n });
            }
        }
        let mut clash = None;
        inner.for_each(|i, j, k| {
            let s = slot([i, j, k]);
            if owner[s] {
                clash.get_or_insert([i, j, k]);
            }
            owner[s] = true;
        });
        if let Some(at) = clash {
            return Err(PlanViolation::Overlap { tile: n, at });
        }
    }
    if let Some(s) = owner.iter().position(|&o| !o) {
        let r = [s % ext[0], (s / ext[0]) % ext[1], s / (ext[0] * ext[1])];
        return Err(PlanViolation::Coverage {
            at: [0, 1, 2].map(|a| r[a] + domain.lo[a]),
        });
    }
    Ok(())
}

/// Grid-level fields counted by [`tile_footprint`]: inputs, outputs and
/// per-tile scratch.
pub const fn footprint_fields(kernel: Kernel) -> usize {
    match kernel {
        Kernel::Hdiff | Kernel::Copy => 2,
        // 7 fields plus the output, plus ccol/dcol scratch
        Kernel::Vadvc => 8 + 2,
    }
}

/// On-chip buffer halo assumed when sizing a window.
pub const fn footprint_halo(kernel: Kernel) -> [usize; 3] {
    match kernel {
        Kernel::Hdiff | Kernel::Vadvc => [2, 2, 0],
        Kernel::Copy => [0, 0, 0],
    }
}

/// Bytes of on-chip buffering one window of `tile` occupies.
pub fn tile_footprint(tile: TileSpec, kernel: Kernel, bytes_per_elem: u64) -> u64 {
    let h = footprint_halo(kernel);
    let t = tile.as_array();
    let points: u64 = (0..3).map(|a| (t[a] + 2 * h[a]) as u64).product();
    footprint_fields(kernel) as u64 * points * bytes_per_elem
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExecError {
    #[error("plan does not match the inputs: {0}")]
    PlanMismatch(&'static str),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("worker pool failure: {0}")]
    Worker(&'static str),
}

/// Checks that `plan` was built for these inputs and that the inputs are
/// acceptable to the kernel.
pub fn check_plan_inputs<T: Real>(
    input: &KernelInput<'_, T>,
    plan: &WindowPlan,
) -> Result<(), ExecError> {
    let grid = input.passthrough();
    if plan.kernel != input.kernel() {
        return Err(ExecError::PlanMismatch("kernel"));
    }
    if plan.dims != grid.dims() {
        return Err(ExecError::PlanMismatch("dims"));
    }
    if plan.halo != grid.halo() {
        return Err(ExecError::PlanMismatch("halo"));
    }
    input.validate()?;
    Ok(())
}

/// Computes the interior of one tile, returned in tile-local layout order
/// (i fastest).
pub fn compute_tile<T: Real>(
    input: &KernelInput<'_, T>,
    tile: &Tile,
) -> Result<Vec<T>, KernelError> {
    let [tx, ty, tz] = tile.extent;
    let [i0, j0, k0] = tile.origin;
    let mut out = Vec::with_capacity(tx * ty * tz);
    match *input {
        KernelInput::Hdiff { src, params } => {
            let c1 = T::from_f64(params.c1);
            tile.interior()
                .for_each(|i, j, k| out.push(hdiff_point(src, c1, i, j, k)));
        }
        KernelInput::Copy(src) => tile
            .interior()
            .for_each(|i, j, k| out.push(src.at(i, j, k))),
        KernelInput::Vadvc(fields) => {
            let nz = fields.dims().nz;
            debug_assert!(k0 == 0 && tz == nz);
            out.resize(tx * ty * tz, T::zero());
            let mut scratch = ColumnScratch::new(nz);
            let mut column = alloc::vec![T::zero(); nz];
            for dj in 0..ty {
                for di in 0..tx {
                    vadvc_column(fields, i0 + di, j0 + dj, &mut scratch, &mut column)?;
                    for (k, &v) in column.iter().enumerate() {
                        out[(k * ty + dj) * tx + di] = v;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Writes tile-local values produced by [`compute_tile`] into `out`.
pub fn scatter_tile<T: Real>(out: &mut Grid3D<T>, tile: &Tile, values: &[T]) {
    let mut it = values.iter();
    tile.interior().for_each(|i, j, k| {
        if let Some(&v) = it.next() {
            out.set(i, j, k, v);
        }
    });
}

/// Runs every tile of `plan` in order on the calling thread.
pub fn execute_tiled_serial<T: Real>(
    input: &KernelInput<'_, T>,
    plan: &WindowPlan,
) -> Result<Grid3D<T>, ExecError> {
    check_plan_inputs(input, plan)?;
    let mut out = input.passthrough().clone();
    for tile in &plan.tiles {
        let values = compute_tile(input, tile)?;
        scatter_tile(&mut out, tile, &values);
    }
    Ok(out)
}
