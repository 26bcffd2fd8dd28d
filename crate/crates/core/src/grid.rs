//! Dense 3D grids with an explicit `i`-fastest linear layout.
//!
//! The linear offset of point `(i, j, k)` is `k * nx * ny + j * nx + i`, so
//! horizontal rows are contiguous and vertical columns are strided by one
//! full plane. Halo points are stored inline: `dims` counts every stored
//! point, and `halo` only records how many of them per side are boundary
//! layers that kernels read but never write.

use alloc::vec::Vec;
use core::fmt;

use crate::real::{ulp_distance, Real};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GridError {
    #[error("axis {axis} has zero extent")]
    ZeroAxis { axis: char },
    #[error("grid of {0} points does not fit the address space")]
    TooLarge(Dims3),
    #[error("coordinate ({i},{j},{k}) outside grid {dims}")]
    OutOfRange {
        i: usize,
        j: usize,
        k: usize,
        dims: Dims3,
    },
    #[error("grid dimensions differ: {0} vs {1}")]
    DimsMismatch(Dims3, Dims3),
    #[error("payload holds {found} values, dims require {expected}")]
    PayloadLength { expected: usize, found: usize },
}

/// Point counts per axis; `nx` varies fastest in memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims3 {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

impl Dims3 {
    pub fn new(nx: usize, ny: usize, nz: usize) -> Result<Self, GridError> {
        let dims = Dims3 { nx, ny, nz };
        for (axis, n) in [('i', nx), ('j', ny), ('k', nz)] {
            if n == 0 {
                return Err(GridError::ZeroAxis { axis });
            }
        }
        nx.checked_mul(ny)
            .and_then(|p| p.checked_mul(nz))
            .ok_or(GridError::TooLarge(dims))?;
        Ok(dims)
    }

    pub const fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub const fn as_array(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    /// Linear offset of `(i, j, k)` without bounds checks.
    #[inline(always)]
    pub const fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.ny + j) * self.nx + i
    }

    /// Inverse of [`Dims3::offset`].
    pub const fn coords(&self, offset: usize) -> [usize; 3] {
        let plane = self.nx * self.ny;
        [offset % self.nx, (offset % plane) / self.nx, offset / plane]
    }

    pub const fn contains(&self, i: usize, j: usize, k: usize) -> bool {
        i < self.nx && j < self.ny && k < self.nz
    }
}

impl fmt::Display for Dims3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.nx, self.ny, self.nz)
    }
}

/// Checked linear index of `(i, j, k)`.
pub fn index(i: usize, j: usize, k: usize, dims: Dims3) -> Result<usize, GridError> {
    if dims.contains(i, j, k) {
        Ok(dims.offset(i, j, k))
    } else {
        Err(GridError::OutOfRange { i, j, k, dims })
    }
}

/// Halo width per side, per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Halo {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl Halo {
    pub const fn new(i: usize, j: usize, k: usize) -> Self {
        Halo { i, j, k }
    }

    /// Two horizontal layers, none vertically: the layout every dycore
    /// kernel in this crate expects.
    pub const DYCORE: Halo = Halo::new(2, 2, 0);

    pub const fn as_array(&self) -> [usize; 3] {
        [self.i, self.j, self.k]
    }
}

/// Axis-aligned half-open box of grid points `lo..hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Box3 {
    pub lo: [usize; 3],
    pub hi: [usize; 3],
}

impl Box3 {
    pub fn whole(dims: Dims3) -> Self {
        Box3 {
            lo: [0; 3],
            hi: dims.as_array(),
        }
    }

    pub fn extent(&self) -> [usize; 3] {
        [0, 1, 2].map(|a| self.hi[a].saturating_sub(self.lo[a]))
    }

    pub fn volume(&self) -> usize {
        let [x, y, z] = self.extent();
        x * y * z
    }

    pub fn contains(&self, p: [usize; 3]) -> bool {
        (0..3).all(|a| self.lo[a] <= p[a] && p[a] < self.hi[a])
    }

    /// Visits every point in layout order (i fastest).
    pub fn for_each(&self, mut f: impl FnMut(usize, usize, usize)) {
        for k in self.lo[2]..self.hi[2] {
            for j in self.lo[1]..self.hi[1] {
                for i in self.lo[0]..self.hi[0] {
                    f(i, j, k);
                }
            }
        }
    }
}

/// Grid initialisation recipe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitSpec {
    Constant(f64),
    /// `a * i + b * j + c * k`
    Linear {
        a: f64,
        b: f64,
        c: f64,
    },
    /// `value` at one point, zero elsewhere.
    Impulse {
        i: usize,
        j: usize,
        k: usize,
        value: f64,
    },
    /// Uniform `[0, 1)` values from [`SplitMix64`], drawn in layout order.
    PseudoRandom {
        seed: u64,
    },
}

/// SplitMix64 generator.
///
/// Chosen because the sequence is trivially reproducible bit-for-bit on any
/// platform and in any language.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub const fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform value in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..bound` (multiply-shift reduction). `bound > 0`.
    pub fn next_below(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        ((self.next_u64() as u128 * bound as u128) >> 64) as usize
    }
}

/// Dense scalar field. Precision is carried by the element type.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid3D<T> {
    dims: Dims3,
    halo: Halo,
    data: Vec<T>,
}

impl<T: Real> Grid3D<T> {
    pub fn from_vec(dims: Dims3, halo: Halo, data: Vec<T>) -> Result<Self, GridError> {
        if data.len() != dims.len() {
            return Err(GridError::PayloadLength {
                expected: dims.len(),
                found: data.len(),
            });
        }
        Ok(Grid3D { dims, halo, data })
    }

    pub fn filled(dims: Dims3, halo: Halo, value: T) -> Self {
        Grid3D {
            dims,
            halo,
            data: alloc::vec![value; dims.len()],
        }
    }

    pub fn dims(&self) -> Dims3 {
        self.dims
    }

    pub fn halo(&self) -> Halo {
        self.halo
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// Unchecked-by-contract accessor; panics on an out-of-range offset.
    #[inline(always)]
    pub fn at(&self, i: usize, j: usize, k: usize) -> T {
        self.data[self.dims.offset(i, j, k)]
    }

    #[inline(always)]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: T) {
        let o = self.dims.offset(i, j, k);
        self.data[o] = v;
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Result<T, GridError> {
        index(i, j, k, self.dims).map(|o| self.data[o])
    }

    /// Points not in the halo. Empty along an axis whose halo covers it.
    pub fn interior(&self) -> Box3 {
        let d = self.dims.as_array();
        let h = self.halo.as_array();
        let lo = [0, 1, 2].map(|a| h[a].min(d[a]));
        let hi = [0, 1, 2].map(|a| d[a].saturating_sub(h[a]).max(lo[a]));
        Box3 { lo, hi }
    }

    pub fn region(&self, region: Region) -> Box3 {
        match region {
            Region::All => Box3::whole(self.dims),
            Region::Interior => self.interior(),
        }
    }

    /// First non-finite point in layout order, if any.
    pub fn first_non_finite(&self) -> Option<[usize; 3]> {
        self.data
            .iter()
            .position(|v| !v.is_finite())
            .map(|o| self.dims.coords(o))
    }

    pub fn map<U: Real>(&self, f: impl Fn(T) -> U) -> Grid3D<U> {
        Grid3D {
            dims: self.dims,
            halo: self.halo,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Compensated (Neumaier) `f64` sum over the interior.
    pub fn interior_checksum(&self) -> f64 {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        self.interior().for_each(|i, j, k| {
            let v = self.at(i, j, k).to_f64();
            let t = sum + v;
            if sum.abs() >= v.abs() {
                comp += (sum - t) + v;
            } else {
                comp += (v - t) + sum;
            }
            sum = t;
        });
        sum + comp
    }
}

/// Allocates a grid of `dims` points and fills every point, halo included.
pub fn make_grid<T: Real>(dims: Dims3, halo: Halo, init: InitSpec) -> Result<Grid3D<T>, GridError> {
    let dims = Dims3::new(dims.nx, dims.ny, dims.nz)?;
    let data = match init {
        InitSpec::Constant(v) => alloc::vec![T::from_f64(v); dims.len()],
        InitSpec::Linear { a, b, c } => {
            let mut data = Vec::with_capacity(dims.len());
            Box3::whole(dims).for_each(|i, j, k| {
                data.push(T::from_f64(a * i as f64 + b * j as f64 + c * k as f64))
            });
            data
        }
        InitSpec::Impulse { i, j, k, value } => {
            let at = index(i, j, k, dims)?;
            let mut data = alloc::vec![T::zero(); dims.len()];
            data[at] = T::from_f64(value);
            data
        }
        InitSpec::PseudoRandom { seed } => {
            let mut rng = SplitMix64::new(seed);
            (0..dims.len())
                .map(|_| T::from_f64(rng.next_f64()))
                .collect()
        }
    };
    Ok(Grid3D { dims, halo, data })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    All,
    Interior,
}

/// Outcome of [`compare`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareReport {
    pub max_abs_diff: f64,
    pub max_ulp_diff: u64,
    /// First differing point in layout order.
    pub first_mismatch: Option<[usize; 3]>,
}

impl CompareReport {
    pub fn is_identical(&self) -> bool {
        self.max_ulp_diff == 0
    }
}

/// Point-wise comparison of two grids over `region` (taken from `a`'s halo).
pub fn compare<T: Real>(
    a: &Grid3D<T>,
    b: &Grid3D<T>,
    region: Region,
) -> Result<CompareReport, GridError> {
    if a.dims != b.dims {
        return Err(GridError::DimsMismatch(a.dims, b.dims));
    }
    let mut report = CompareReport {
        max_abs_diff: 0.0,
        max_ulp_diff: 0,
        first_mismatch: None,
    };
    a.region(region).for_each(|i, j, k| {
        let (x, y) = (a.at(i, j, k), b.at(i, j, k));
        let ulps = ulp_distance(x, y);
        if ulps == 0 {
            return;
        }
        report.first_mismatch.get_or_insert([i, j, k]);
        report.max_ulp_diff = report.max_ulp_diff.max(ulps);
        let abs = (x.to_f64() - y.to_f64()).abs();
        if abs > report.max_abs_diff || abs.is_nan() {
            report.max_abs_diff = abs;
        }
    });
    Ok(report)
}
