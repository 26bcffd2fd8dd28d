//! Reference implementations of the dycore kernels.
//!
//! Every kernel computes over the interior of its grids (the points outside
//! the halo) and copies halo points of the output verbatim from the input.
//! Per-point and per-column work is exposed separately so the tiled executor
//! runs exactly the same arithmetic as the reference sweep.

mod flops;
mod hdiff;
mod thomas;
mod vadvc;

use core::fmt;
use core::str::FromStr;

pub use flops::{count_flops, count_flops_extent, vadvc_per_column, FlopCount, HDIFF_PER_POINT};
pub use hdiff::{hdiff_point, hdiff_reference, laplacian, HdiffParams};
pub use thomas::thomas_solve;
pub use vadvc::{
    assemble_column_system, column_oracle_error, max_oracle_error, vadvc_column, vadvc_reference,
    ColumnScratch, FieldSet, TridiagonalSystem, VadvcParams,
};

use crate::grid::{Grid3D, Halo};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kernel {
    Hdiff,
    Vadvc,
    Copy,
}

impl Kernel {
    pub const ALL: [Kernel; 3] = [Kernel::Hdiff, Kernel::Vadvc, Kernel::Copy];

    pub const fn name(self) -> &'static str {
        match self {
            Kernel::Hdiff => "hdiff",
            Kernel::Vadvc => "vadvc",
            Kernel::Copy => "copy",
        }
    }

    /// Neighbour reach of one output point, as `(below, above)` per axis.
    ///
    /// hdiff reaches two points in both horizontal directions. vadvc reads
    /// `wcon` one point ahead in `i` and owns whole columns. copy reads
    /// nothing but the point itself.
    pub const fn read_halo(self) -> ([usize; 3], [usize; 3]) {
        match self {
            Kernel::Hdiff => ([2, 2, 0], [2, 2, 0]),
            Kernel::Vadvc => ([0, 0, 0], [1, 0, 0]),
            Kernel::Copy => ([0, 0, 0], [0, 0, 0]),
        }
    }

    /// Halo a grid must declare before the kernel accepts it.
    pub const fn min_halo(self) -> Halo {
        match self {
            Kernel::Hdiff => Halo::new(2, 2, 0),
            Kernel::Vadvc => Halo::new(1, 0, 0),
            Kernel::Copy => Halo::new(0, 0, 0),
        }
    }

    /// Number of input fields streamed per point.
    pub const fn input_fields(self) -> usize {
        match self {
            Kernel::Vadvc => 5,
            Kernel::Hdiff | Kernel::Copy => 1,
        }
    }

    /// Whether the kernel carries a recurrence along `k`.
    pub const fn owns_columns(self) -> bool {
        matches!(self, Kernel::Vadvc)
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kernel {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hdiff" => Ok(Kernel::Hdiff),
            "vadvc" => Ok(Kernel::Vadvc),
            "copy" => Ok(Kernel::Copy),
            _ => Err(KernelError::UnknownKernel),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("unknown kernel name")]
    UnknownKernel,
    #[error("{kernel} needs a halo of at least {required:?}, grid has {found:?}")]
    InsufficientHalo {
        kernel: Kernel,
        required: Halo,
        found: Halo,
    },
    #[error("non-finite value in {field} at {at:?}")]
    NonFinite { field: &'static str, at: [usize; 3] },
    #[error("point ({i},{j}) has no full five-point neighbourhood")]
    NoNeighbourhood { i: usize, j: usize },
    #[error("vertical advection needs at least 3 levels, got {0}")]
    TooFewLevels(usize),
    #[error("vertical advection needs halo.k = 0, got {0}")]
    VerticalHalo(usize),
    #[error("singular tridiagonal system at column {column:?}, level {level}")]
    Singular { column: [usize; 2], level: usize },
    #[error("field {0} does not match the shape of the other fields")]
    FieldMismatch(&'static str),
    #[error("invalid kernel parameter: {0}")]
    InvalidParams(&'static str),
    #[error("tridiagonal system diagonals have inconsistent lengths")]
    LengthMismatch,
    #[error("tridiagonal system is empty")]
    EmptySystem,
}

pub(crate) fn check_halo<T: Real>(kernel: Kernel, g: &Grid3D<T>) -> Result<(), KernelError> {
    let (req, found) = (kernel.min_halo(), g.halo());
    if found.i < req.i || found.j < req.j || found.k < req.k {
        return Err(KernelError::InsufficientHalo {
            kernel,
            required: req,
            found,
        });
    }
    Ok(())
}

pub(crate) fn check_finite<T: Real>(field: &'static str, g: &Grid3D<T>) -> Result<(), KernelError> {
    match g.first_non_finite() {
        Some(at) => Err(KernelError::NonFinite { field, at }),
        None => Ok(()),
    }
}

/// Element-wise copy of the whole grid.
pub fn copy_reference<T: Real>(src: &Grid3D<T>) -> Grid3D<T> {
    src.clone()
}

/// Borrowed inputs of one kernel invocation.
#[derive(Debug, Clone, Copy)]
pub enum KernelInput<'a, T> {
    Hdiff {
        src: &'a Grid3D<T>,
        params: HdiffParams,
    },
    Vadvc(&'a FieldSet<T>),
    Copy(&'a Grid3D<T>),
}

impl<'a, T: Real> KernelInput<'a, T> {
    pub fn kernel(&self) -> Kernel {
        match self {
            KernelInput::Hdiff { .. } => Kernel::Hdiff,
            KernelInput::Vadvc(_) => Kernel::Vadvc,
            KernelInput::Copy(_) => Kernel::Copy,
        }
    }

    /// The grid whose values the output starts from; its halo is never
    /// overwritten.
    pub fn passthrough(&self) -> &'a Grid3D<T> {
        match *self {
            KernelInput::Hdiff { src, .. } | KernelInput::Copy(src) => src,
            KernelInput::Vadvc(f) => &f.utensstage,
        }
    }

    /// Input checks shared by the reference sweep and the tiled executor.
    pub fn validate(&self) -> Result<(), KernelError> {
        match *self {
            KernelInput::Hdiff { src, params } => {
                check_halo(Kernel::Hdiff, src)?;
                if !params.c1.is_finite() {
                    return Err(KernelError::InvalidParams("c1 must be finite"));
                }
                check_finite("src", src)
            }
            KernelInput::Vadvc(f) => f.validate(),
            KernelInput::Copy(_) => Ok(()),
        }
    }

    /// Full-domain single sweep.
    pub fn reference(&self) -> Result<Grid3D<T>, KernelError> {
        match *self {
            KernelInput::Hdiff { src, params } => hdiff_reference(src, params),
            KernelInput::Vadvc(f) => vadvc_reference(f),
            KernelInput::Copy(src) => Ok(copy_reference(src)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{compare, make_grid, Dims3, InitSpec, Region};

    #[test]
    fn copy_is_bitwise_identical() {
        let dims = Dims3::new(6, 5, 4).unwrap();
        for init in [InitSpec::Constant(1.25), InitSpec::PseudoRandom { seed: 3 }] {
            let src = make_grid::<f32>(dims, Halo::DYCORE, init).unwrap();
            let out = copy_reference(&src);
            assert_eq!(compare(&src, &out, Region::All).unwrap().max_ulp_diff, 0);
        }
    }

    #[test]
    fn kernel_names_parse() {
        for k in Kernel::ALL {
            assert_eq!(k.name().parse::<Kernel>(), Ok(k));
        }
        assert!("fastwaves".parse::<Kernel>().is_err());
    }
}
