//! Bracketing root finder for monotone functions.

use crate::error::{Error, Result};

/// Finds `x` in `[lo, hi]` with `f(x) = target`, where `f` is weakly
/// increasing on the bracket and `f(lo) <= target <= f(hi)`.
///
/// Iterates until the residual is below `tol` or the bracket cannot be
/// split further in floating point. The returned point is the bracket end
/// with the smaller residual.
pub fn bisect_increasing<F>(mut f: F, target: f64, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("bad bracket [{lo}, {hi}]")));
    }
    let (mut a, mut b) = (lo, hi);
    let fa = f(a) - target;
    let fb = f(b) - target;
    if !fa.is_finite() || !fb.is_finite() {
        return Err(Error::InvalidArgument(
            "non-finite value at bracket end".into(),
        ));
    }
    if fa.abs() <= tol {
        return Ok(a);
    }
    if fb.abs() <= tol {
        return Ok(b);
    }
    if fa > 0.0 || fb < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "target {target} not bracketed on [{lo}, {hi}]"
        )));
    }
    let (mut ra, mut rb) = (fa, fb);
    for _ in 0..400 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid) - target;
        if !fm.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite value at {mid}")));
        }
        if fm.abs() <= tol {
            return Ok(mid);
        }
        if fm < 0.0 {
            a = mid;
            ra = fm;
        } else {
            b = mid;
            rb = fm;
        }
    }
    Ok(if ra.abs() <= rb.abs() { a } else { b })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let x = bisect_increasing(|x| x * x, 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((x - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn endpoint_roots_are_exact() {
        assert_eq!(bisect_increasing(|x| x, 0.0, 0.0, 1.0, 1e-12).unwrap(), 0.0);
        assert_eq!(bisect_increasing(|x| x, 1.0, 0.0, 1.0, 1e-12).unwrap(), 1.0);
    }

    #[test]
    fn rejects_unbracketed_target() {
        assert!(bisect_increasing(|x| x, 3.0, 0.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn step_function_converges_to_jump() {
        let x =
            bisect_increasing(|x| if x < 0.3 { 0.0 } else { 1.0 }, 0.5, 0.0, 1.0, 1e-12).unwrap();
        assert!((x - 0.3).abs() < 1e-15);
    }
}
