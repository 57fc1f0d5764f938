//! Bracketed root finding and one-dimensional minimization.

use crate::error::{Error, Result};

/// Bisection on a bracketing interval. `f(lo)` and `f(hi)` must differ in
/// sign (or one of them vanish). Converges to `rel_tol * |x| + abs_tol`.
pub fn bisect<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    let flo = f(lo);
    if flo == 0.0 {
        return Ok(lo);
    }
    let fhi = f(hi);
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Domain(format!(
            "no sign change on [{lo}, {hi}]: f = ({flo:e}, {fhi:e})"
        )));
    }
    let mut sign_lo = flo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= rel_tol * mid.abs() + abs_tol {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
            let _ = &mut sign_lo;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section minimization of `f` on [a, b].
/// Returns (argmin, min). The argmin is resolved to ~sqrt(machine eps)
/// times the interval; the minimum value itself is much more accurate.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..120 {
        if (b - a).abs() < 1e-13 * (a.abs() + b.abs() + 1.0) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Expand geometrically from `start` by `factor` until `pred` holds.
/// Returns the first accepted value, or None when `cap` is exceeded.
pub fn expand_until<P: FnMut(f64) -> bool>(
    start: f64,
    factor: f64,
    cap: f64,
    mut pred: P,
) -> Option<f64> {
    let mut x = start;
    while x <= cap {
        if pred(x) {
            return Some(x);
        }
        x *= factor;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_cubic() {
        let r = bisect(|x| x * x * x - 2.0, 0.0, 2.0, 1e-14, 1e-300).unwrap();
        assert!((r - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn bisect_rejects_same_sign() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 0.0).is_err());
    }

    #[test]
    fn golden_quartic() {
        let (x, v) = golden_min(|x| (x - 0.3).powi(4) + 1.5, -2.0, 2.0);
        assert!((x - 0.3).abs() < 1e-3);
        assert!((v - 1.5).abs() < 1e-12);
    }
}
