use super::{KernelError, KernelInput};
use crate::grid::Grid3D;
use crate::real::Real;

/// Horizontal diffusion parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HdiffParams {
    /// Diffusion coefficient applied to both flux divergences.
    pub c1: f64,
}

impl Default for HdiffParams {
    fn default() -> Self {
        HdiffParams { c1: 0.025 }
    }
}

#[inline(always)]
fn lap<T: Real>(src: &Grid3D<T>, i: usize, j: usize, k: usize) -> T {
    let four = T::from_f64(4.0);
    four * src.at(i, j, k)
        - src.at(i - 1, j, k)
        - src.at(i + 1, j, k)
        - src.at(i, j - 1, k)
        - src.at(i, j + 1, k)
}

/// Five-point horizontal Laplacian `4c - w - e - s - n`.
pub fn laplacian<T: Real>(src: &Grid3D<T>, i: usize, j: usize, k: usize) -> Result<T, KernelError> {
    let d = src.dims();
    if i == 0 || j == 0 || i + 1 >= d.nx || j + 1 >= d.ny || k >= d.nz {
        return Err(KernelError::NoNeighbourhood { i, j });
    }
    Ok(lap(src, i, j, k))
}

/// Diffused value at one point. Needs two points of margin in `i` and `j`.
#[inline]
pub fn hdiff_point<T: Real>(src: &Grid3D<T>, c1: T, i: usize, j: usize, k: usize) -> T {
    let l = lap(src, i, j, k);
    let l_ip = lap(src, i + 1, j, k);
    let l_im = lap(src, i - 1, j, k);
    let l_jp = lap(src, i, j + 1, k);
    let l_jm = lap(src, i, j - 1, k);

    let flx = l_ip - l;
    let flx_m = l - l_im;
    let fly = l_jp - l;
    let fly_m = l - l_jm;

    src.at(i, j, k) - c1 * ((flx - flx_m) + (fly - fly_m))
}

/// Single-sweep horizontal diffusion over the interior of `src`.
pub fn hdiff_reference<T: Real>(
    src: &Grid3D<T>,
    params: HdiffParams,
) -> Result<Grid3D<T>, KernelError> {
    KernelInput::Hdiff { src, params }.validate()?;
    let c1 = T::from_f64(params.c1);
    let mut out = src.clone();
    src.interior()
        .for_each(|i, j, k| out.set(i, j, k, hdiff_point(src, c1, i, j, k)));
    Ok(out)
}
