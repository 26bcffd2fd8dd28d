//! Scalar abstraction shared by every kernel.

use core::fmt::{Debug, Display};
use core::ops::{Add, Div, Mul, Neg, Sub};

/// Storage precision of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Precision {
    F32,
    F64,
}

impl Precision {
    /// Code used by the binary grid container.
    pub const fn code(self) -> u8 {
        match self {
            Precision::F32 => 0,
            Precision::F64 => 1,
        }
    }

    pub const fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Precision::F32),
            1 => Some(Precision::F64),
            _ => None,
        }
    }

    pub const fn bytes(self) -> usize {
        match self {
            Precision::F32 => 4,
            Precision::F64 => 8,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        }
    }
}

impl Display for Precision {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for Precision {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "f32" => Ok(Precision::F32),
            "f64" => Ok(Precision::F64),
            _ => Err(()),
        }
    }
}

/// Floating-point element type the kernels are generic over.
///
/// Kernels only use the arithmetic operators of this trait (plus sign flips and
/// comparisons), which lets an instrumented implementation count the exact
/// number of floating-point operations a kernel performs.
pub trait Real:
    Copy
    + PartialEq
    + PartialOrd
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const PRECISION: Precision;

    /// Smallest forward-sweep pivot magnitude accepted before a tridiagonal
    /// system is reported singular.
    const PIVOT_EPS: f64;

    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn is_finite(self) -> bool;
    fn abs(self) -> Self;

    /// Maps the value onto a monotone integer line so that adjacent
    /// representable values differ by exactly one.
    fn ordered_bits(self) -> i64;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
}

impl Real for f32 {
    const PRECISION: Precision = Precision::F32;
    const PIVOT_EPS: f64 = 1e-20;

    #[inline]
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
    #[inline]
    fn is_finite(self) -> bool {
        f32::is_finite(self)
    }
    #[inline]
    fn abs(self) -> Self {
        f32::abs(self)
    }
    #[inline]
    fn ordered_bits(self) -> i64 {
        let b = self.to_bits() as i32;
        if b < 0 {
            -((b & i32::MAX) as i64) - 1
        } else {
            b as i64
        }
    }
}

impl Real for f64 {
    const PRECISION: Precision = Precision::F64;
    const PIVOT_EPS: f64 = 1e-30;

    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    #[inline]
    fn ordered_bits(self) -> i64 {
        let b = self.to_bits() as i64;
        if b < 0 {
            -(b & i64::MAX) - 1
        } else {
            b
        }
    }
}

/// Distance in units in the last place between two values of the same type.
pub fn ulp_distance<T: Real>(a: T, b: T) -> u64 {
    let (x, y) = (a.ordered_bits() as i128, b.ordered_bits() as i128);
    let d = (x - y).unsigned_abs();
    d.min(u64::MAX as u128) as u64
}
