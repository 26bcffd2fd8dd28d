use super::Kernel;
use crate::grid::{Dims3, Halo};

/// Floating-point operation tally. Sign flips are not counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FlopCount {
    pub adds: u64,
    pub muls: u64,
    pub divs: u64,
    pub total: u64,
}

impl FlopCount {
    pub const fn new(adds: u64, muls: u64, divs: u64) -> Self {
        FlopCount {
            adds,
            muls,
            divs,
            total: adds + muls + divs,
        }
    }

    pub const fn scaled(self, n: u64) -> Self {
        FlopCount::new(self.adds * n, self.muls * n, self.divs * n)
    }
}

impl core::ops::Add for FlopCount {
    type Output = FlopCount;

    fn add(self, o: FlopCount) -> FlopCount {
        FlopCount::new(self.adds + o.adds, self.muls + o.muls, self.divs + o.divs)
    }
}

/// Operations per interior point of hdiff: five Laplacians (1 mul, 4 add
/// each), four flux differences and the update (4 add, 1 mul).
pub const HDIFF_PER_POINT: FlopCount = FlopCount::new(5 * 4 + 4 + 4, 5 + 1, 0);

/// Operations for one vadvc column of `nz >= 3` levels.
pub const fn vadvc_per_column(nz: u64) -> FlopCount {
    let inner = nz - 2;
    // top level, inner levels, bottom level, back substitution, output map
    let adds = 6 + 12 * inner + 8 + (nz - 1) + nz;
    let muls = 5 + 13 * inner + 8 + (nz - 1) + nz;
    let divs = 2 + inner + 1;
    FlopCount::new(adds, muls, divs)
}

/// Exact operation count of the reference kernel on a grid of `dims` with
/// the standard two-point horizontal halo.
pub fn count_flops(kernel: Kernel, dims: Dims3) -> FlopCount {
    let h = Halo::DYCORE;
    count_flops_extent(
        kernel,
        [
            dims.nx.saturating_sub(2 * h.i),
            dims.ny.saturating_sub(2 * h.j),
            dims.nz.saturating_sub(2 * h.k),
        ],
    )
}

/// Operation count for a computed block of `extent` points (a whole grid
/// interior or one tile; vadvc blocks span full columns).
pub fn count_flops_extent(kernel: Kernel, extent: [usize; 3]) -> FlopCount {
    let [ix, iy, nz] = extent.map(|e| e as u64);
    match kernel {
        Kernel::Copy => FlopCount::default(),
        Kernel::Hdiff => HDIFF_PER_POINT.scaled(ix * iy * nz),
        Kernel::Vadvc if nz >= 3 => vadvc_per_column(nz).scaled(ix * iy),
        Kernel::Vadvc => FlopCount::default(),
    }
}
