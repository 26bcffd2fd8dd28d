use alloc::vec::Vec;

use super::KernelError;
use crate::real::Real;

/// Solves `a[k] x[k-1] + b[k] x[k] + c[k] x[k+1] = d[k]` by forward
/// elimination and back substitution. `a[0]` and `c[n-1]` are ignored.
pub fn thomas_solve<T: Real>(a: &[T], b: &[T], c: &[T], d: &[T]) -> Result<Vec<T>, KernelError> {
    let n = d.len();
    if n == 0 {
        return Err(KernelError::EmptySystem);
    }
    if a.len() != n || b.len() != n || c.len() != n {
        return Err(KernelError::LengthMismatch);
    }
    let singular = |level| KernelError::Singular {
        column: [0, 0],
        level,
    };
    let pivot_ok = |p: T| p.abs().to_f64() >= T::PIVOT_EPS;

    let mut cp = Vec::with_capacity(n);
    let mut dp = Vec::with_capacity(n);
    if !pivot_ok(b[0]) {
        return Err(singular(0));
    }
    cp.push(if n > 1 { c[0] / b[0] } else { T::zero() });
    dp.push(d[0] / b[0]);
    for k in 1..n {
        let den = b[k] - a[k] * cp[k - 1];
        if !pivot_ok(den) {
            return Err(singular(k));
        }
        cp.push(if k + 1 < n { c[k] / den } else { T::zero() });
        dp.push((d[k] - a[k] * dp[k - 1]) / den);
    }

    let mut x = dp;
    for k in (0..n - 1).rev() {
        let next = x[k + 1];
        x[k] = x[k] - cp[k] * next;
    }
    Ok(x)
}
