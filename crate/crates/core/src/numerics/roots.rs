use crate::{Error, Result};

/// Bisection for a root of a monotone function on `[lo, hi]`.
///
/// Stops when the bracket is narrower than `tol` (or an exact zero is hit) and
/// returns its midpoint. The sequence of evaluations depends only on the
/// inputs.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoBracket { f_lo: fa, f_hi: fb });
    }
    let tol = tol.max(0.0);
    // 2000 halvings exhaust any f64 bracket
    for _ in 0..2000 {
        let mid = 0.5 * (a + b);
        if b - a <= tol || mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}
