//! Vertical advection: one implicit tridiagonal solve per `(i, j)` column.

use alloc::vec::Vec;

use super::{check_finite, check_halo, thomas_solve, Kernel, KernelError};
use crate::grid::{Dims3, Grid3D, Halo, SplitMix64};
use crate::real::Real;

/// Time-stepping constants of the u-stage update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VadvcParams {
    /// Inverse stage timestep.
    pub dtr_stage: f64,
    pub bet_m: f64,
    pub bet_p: f64,
}

impl VadvcParams {
    /// Off-centering `beta_v` gives `bet_m = (1 - beta_v) / 2`, `bet_p = (1 + beta_v) / 2`.
    pub fn from_beta(beta_v: f64, dtr_stage: f64) -> Self {
        VadvcParams {
            dtr_stage,
            bet_m: 0.5 * (1.0 - beta_v),
            bet_p: 0.5 * (1.0 + beta_v),
        }
    }

    fn validate(&self) -> Result<(), KernelError> {
        if !(self.dtr_stage.is_finite() && self.bet_m.is_finite() && self.bet_p.is_finite()) {
            return Err(KernelError::InvalidParams(
                "vadvc parameters must be finite",
            ));
        }
        if (self.bet_m + self.bet_p - 1.0).abs() > 1e-12 {
            return Err(KernelError::InvalidParams("bet_m + bet_p must equal 1"));
        }
        Ok(())
    }
}

impl Default for VadvcParams {
    fn default() -> Self {
        VadvcParams::from_beta(0.0, 3.0 / 20.0)
    }
}

/// Input fields of the vertical advection kernel. All grids share one shape.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSet<T> {
    pub wcon: Grid3D<T>,
    pub ustage: Grid3D<T>,
    pub upos: Grid3D<T>,
    pub utens: Grid3D<T>,
    pub utensstage: Grid3D<T>,
    pub params: VadvcParams,
}

impl<T: Real> FieldSet<T> {
    pub fn new(
        wcon: Grid3D<T>,
        ustage: Grid3D<T>,
        upos: Grid3D<T>,
        utens: Grid3D<T>,
        utensstage: Grid3D<T>,
        params: VadvcParams,
    ) -> Result<Self, KernelError> {
        let fs = FieldSet {
            wcon,
            ustage,
            upos,
            utens,
            utensstage,
            params,
        };
        let (d, h) = (fs.wcon.dims(), fs.wcon.halo());
        for (name, g) in fs.named().into_iter().skip(1) {
            if g.dims() != d || g.halo() != h {
                return Err(KernelError::FieldMismatch(name));
            }
        }
        params.validate()?;
        Ok(fs)
    }

    /// Reproducible synthetic fields. Each field draws from its own
    /// generator seeded from `seed`; `wcon` is scaled to `[-0.1, 0.1)` so the
    /// column systems stay diagonally dominant with the default parameters.
    pub fn pseudo_random(dims: Dims3, halo: Halo, seed: u64) -> Result<Self, KernelError> {
        let dims = Dims3::new(dims.nx, dims.ny, dims.nz)
            .map_err(|_| KernelError::InvalidParams("zero-sized grid"))?;
        let mut seeds = SplitMix64::new(seed);
        let mut field = |scale: f64, shift: f64| {
            let mut rng = SplitMix64::new(seeds.next_u64());
            let data = (0..dims.len())
                .map(|_| T::from_f64(scale * (rng.next_f64() - shift)))
                .collect();
            Grid3D::from_vec(dims, halo, data).expect("length matches dims")
        };
        let wcon = field(0.2, 0.5);
        let ustage = field(1.0, 0.0);
        let upos = field(1.0, 0.0);
        let utens = field(1.0, 0.0);
        let utensstage = field(1.0, 0.0);
        FieldSet::new(
            wcon,
            ustage,
            upos,
            utens,
            utensstage,
            VadvcParams::default(),
        )
    }

    pub fn dims(&self) -> Dims3 {
        self.wcon.dims()
    }

    pub fn halo(&self) -> Halo {
        self.wcon.halo()
    }

    pub fn named(&self) -> [(&'static str, &Grid3D<T>); 5] {
        [
            ("wcon", &self.wcon),
            ("ustage", &self.ustage),
            ("upos", &self.upos),
            ("utens", &self.utens),
            ("utensstage", &self.utensstage),
        ]
    }

    pub(crate) fn validate(&self) -> Result<(), KernelError> {
        check_halo(Kernel::Vadvc, &self.wcon)?;
        let h = self.halo();
        if h.k != 0 {
            return Err(KernelError::VerticalHalo(h.k));
        }
        let nz = self.dims().nz;
        if nz < 3 {
            return Err(KernelError::TooFewLevels(nz));
        }
        self.params.validate()?;
        for (name, g) in self.named() {
            check_finite(name, g)?;
        }
        Ok(())
    }
}

/// Per-column forward-sweep coefficients, reused across columns.
#[derive(Debug, Clone, Default)]
pub struct ColumnScratch<T> {
    ccol: Vec<T>,
    dcol: Vec<T>,
    data: Vec<T>,
}

impl<T: Real> ColumnScratch<T> {
    pub fn new(nz: usize) -> Self {
        ColumnScratch {
            ccol: alloc::vec![T::zero(); nz],
            dcol: alloc::vec![T::zero(); nz],
            data: alloc::vec![T::zero(); nz],
        }
    }
}

fn pivot_ok<T: Real>(p: T) -> bool {
    p.abs().to_f64() >= T::PIVOT_EPS
}

/// Solves column `(i, j)` and writes `nz` output values into `out`.
///
/// Inputs are assumed validated (see [`vadvc_reference`]).
pub fn vadvc_column<T: Real>(
    f: &FieldSet<T>,
    i: usize,
    j: usize,
    scratch: &mut ColumnScratch<T>,
    out: &mut [T],
) -> Result<(), KernelError> {
    let nz = f.dims().nz;
    if scratch.ccol.len() != nz {
        *scratch = ColumnScratch::new(nz);
    }
    let ColumnScratch { ccol, dcol, data } = scratch;
    let singular = |level| KernelError::Singular {
        column: [i, j],
        level,
    };

    let dtr = T::from_f64(f.params.dtr_stage);
    let bet_m = T::from_f64(f.params.bet_m);
    let bet_p = T::from_f64(f.params.bet_p);
    let quarter = T::from_f64(0.25);
    let neg_quarter = T::from_f64(-0.25);
    let one = T::from_f64(1.0);

    let (w, us) = (&f.wcon, &f.ustage);
    let rhs_base =
        |k: usize| dtr * f.upos.at(i, j, k) + f.utens.at(i, j, k) + f.utensstage.at(i, j, k);

    // k = 0
    {
        let gcv = quarter * (w.at(i + 1, j, 1) + w.at(i, j, 1));
        let cs = gcv * bet_m;
        let c = gcv * bet_p;
        let b = dtr - c;
        if !pivot_ok(b) {
            return Err(singular(0));
        }
        let corr = -(cs * (us.at(i, j, 1) - us.at(i, j, 0)));
        dcol[0] = (rhs_base(0) + corr) / b;
        ccol[0] = c / b;
    }

    // 0 < k < nz - 1
    for k in 1..nz - 1 {
        let gav = neg_quarter * (w.at(i + 1, j, k) + w.at(i, j, k));
        let gcv = quarter * (w.at(i + 1, j, k + 1) + w.at(i, j, k + 1));
        let as_ = gav * bet_m;
        let cs = gcv * bet_m;
        let acol = gav * bet_p;
        let c = gcv * bet_p;
        let b = dtr - acol - c;
        let u = us.at(i, j, k);
        let corr = -(as_ * (us.at(i, j, k - 1) - u)) - cs * (us.at(i, j, k + 1) - u);
        let d = rhs_base(k) + corr;
        let pivot = b - ccol[k - 1] * acol;
        if !pivot_ok(pivot) {
            return Err(singular(k));
        }
        let div = one / pivot;
        ccol[k] = c * div;
        dcol[k] = (d - dcol[k - 1] * acol) * div;
    }

    // k = nz - 1
    {
        let k = nz - 1;
        let gav = neg_quarter * (w.at(i + 1, j, k) + w.at(i, j, k));
        let as_ = gav * bet_m;
        let acol = gav * bet_p;
        let b = dtr - acol;
        let corr = -(as_ * (us.at(i, j, k - 1) - us.at(i, j, k)));
        let d = rhs_base(k) + corr;
        let pivot = b - ccol[k - 1] * acol;
        if !pivot_ok(pivot) {
            return Err(singular(k));
        }
        let div = one / pivot;
        ccol[k] = T::zero();
        dcol[k] = (d - dcol[k - 1] * acol) * div;
    }

    // Backward substitution.
    data[nz - 1] = dcol[nz - 1];
    for k in (0..nz - 1).rev() {
        data[k] = dcol[k] - ccol[k] * data[k + 1];
    }
    for (k, o) in out.iter_mut().enumerate().take(nz) {
        *o = dtr * (data[k] - f.upos.at(i, j, k));
    }
    Ok(())
}

/// Vertical advection over every interior column; halo columns of the output
/// are copied from `utensstage`.
pub fn vadvc_reference<T: Real>(fields: &FieldSet<T>) -> Result<Grid3D<T>, KernelError> {
    fields.validate()?;
    let nz = fields.dims().nz;
    let mut out = fields.utensstage.clone();
    let mut scratch = ColumnScratch::new(nz);
    let mut column = alloc::vec![T::zero(); nz];
    let interior = fields.wcon.interior();
    for j in interior.lo[1]..interior.hi[1] {
        for i in interior.lo[0]..interior.hi[0] {
            vadvc_column(fields, i, j, &mut scratch, &mut column)?;
            for (k, &v) in column.iter().enumerate() {
                out.set(i, j, k, v);
            }
        }
    }
    Ok(out)
}

/// Explicit tridiagonal form `lower[k] x[k-1] + diag[k] x[k] + upper[k] x[k+1] = rhs[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem<T> {
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    pub upper: Vec<T>,
    pub rhs: Vec<T>,
}

/// Assembles the un-normalised column system that the forward sweep of
/// [`vadvc_column`] eliminates, evaluated in `f64`.
///
/// `lower[0]` and `upper[nz - 1]` are zero. Solving it and mapping the
/// solution `x` to `dtr_stage * (x - upos)` reproduces the kernel output.
pub fn assemble_column_system<T: Real>(
    f: &FieldSet<T>,
    i: usize,
    j: usize,
) -> TridiagonalSystem<f64> {
    let nz = f.dims().nz;
    let p = f.params;
    let w = |ii: usize, k: usize| f.wcon.at(ii, j, k).to_f64();
    let u = |k: usize| f.ustage.at(i, j, k).to_f64();
    let mut sys = TridiagonalSystem {
        lower: alloc::vec![0.0; nz],
        diag: alloc::vec![0.0; nz],
        upper: alloc::vec![0.0; nz],
        rhs: alloc::vec![0.0; nz],
    };
    for k in 0..nz {
        let gav = if k > 0 {
            -0.25 * (w(i + 1, k) + w(i, k))
        } else {
            0.0
        };
        let gcv = if k + 1 < nz {
            0.25 * (w(i + 1, k + 1) + w(i, k + 1))
        } else {
            0.0
        };
        let mut corr = 0.0;
        if k > 0 {
            corr -= gav * p.bet_m * (u(k - 1) - u(k));
        }
        if k + 1 < nz {
            corr -= gcv * p.bet_m * (u(k + 1) - u(k));
        }
        sys.lower[k] = gav * p.bet_p;
        sys.upper[k] = gcv * p.bet_p;
        sys.diag[k] = p.dtr_stage - sys.lower[k] - sys.upper[k];
        sys.rhs[k] = p.dtr_stage * f.upos.at(i, j, k).to_f64()
            + f.utens.at(i, j, k).to_f64()
            + f.utensstage.at(i, j, k).to_f64()
            + corr;
    }
    sys
}

/// Normwise relative error `max|out - x| / max|x|` of column `(i, j)` of a
/// kernel output against the `f64` solve of [`assemble_column_system`],
/// where `x = dtr_stage * (solution - upos)`.
pub fn column_oracle_error<T: Real>(
    f: &FieldSet<T>,
    out: &Grid3D<T>,
    i: usize,
    j: usize,
) -> Result<f64, KernelError> {
    let sys = assemble_column_system(f, i, j);
    let x = thomas_solve(&sys.lower, &sys.diag, &sys.upper, &sys.rhs).map_err(|e| match e {
        KernelError::Singular { level, .. } => KernelError::Singular {
            column: [i, j],
            level,
        },
        e => e,
    })?;
    let mut diff = 0.0f64;
    let mut scale = 0.0f64;
    for (k, xk) in x.iter().enumerate() {
        let want = f.params.dtr_stage * (xk - f.upos.at(i, j, k).to_f64());
        diff = diff.max((out.at(i, j, k).to_f64() - want).abs());
        scale = scale.max(want.abs());
    }
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

/// Largest [`column_oracle_error`] over the interior columns.
pub fn max_oracle_error<T: Real>(f: &FieldSet<T>, out: &Grid3D<T>) -> Result<f64, KernelError> {
    let interior = f.wcon.interior();
    let mut worst = 0.0f64;
    for j in interior.lo[1]..interior.hi[1] {
        for i in interior.lo[0]..interior.hi[0] {
            worst = worst.max(column_oracle_error(f, out, i, j)?);
        }
    }
    Ok(worst)
}
