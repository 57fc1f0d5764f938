//! Cubic Hermite interpolation with exact or shape-preserving slopes.

use crate::error::{Error, Result};

/// Evaluate the cubic Hermite interpolant on [x0, x1] at x.
#[inline]
pub fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1
}

/// Derivative in x of the cubic Hermite interpolant on [x0, x1].
#[inline]
pub fn hermite_deriv(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    (6.0 * t2 - 6.0 * t) * (y0 - y1) / h
        + (3.0 * t2 - 4.0 * t + 1.0) * d0
        + (3.0 * t2 - 2.0 * t) * d1
}

/// Piecewise cubic Hermite curve over strictly increasing knots.
#[derive(Debug, Clone)]
pub struct CubicHermite {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl CubicHermite {
    /// Build from knots and exact slopes.
    pub fn with_slopes(xs: Vec<f64>, ys: Vec<f64>, ds: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() || xs.len() != ds.len() {
            return Err(Error::Config("interpolant needs matching knot arrays (>= 2)".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("interpolation knots must be strictly increasing".into()));
        }
        Ok(CubicHermite { xs, ys, ds })
    }

    /// Build with Fritsch-Carlson (shape-preserving) slopes.
    pub fn pchip(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(Error::Config("interpolant needs matching knot arrays (>= 2)".into()));
        }
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut ds = vec![0.0; n];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                ds[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        ds[0] = pchip_end(h[0], h.get(1).copied().unwrap_or(h[0]), delta[0], delta.get(1).copied().unwrap_or(delta[0]));
        ds[n - 1] = pchip_end(
            h[n - 2],
            if n >= 3 { h[n - 3] } else { h[n - 2] },
            delta[n - 2],
            if n >= 3 { delta[n - 3] } else { delta[n - 2] },
        );
        Self::with_slopes(xs, ys, ds)
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub(crate) fn segment(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self.xs.partition_point(|&k| k <= x) {
            0 => 0,
            j if j >= n => n - 2,
            j => j - 1,
        }
    }

    pub(crate) fn knot(&self, i: usize) -> f64 {
        self.xs[i]
    }

    pub(crate) fn segment_count(&self) -> usize {
        self.xs.len() - 1
    }

    /// Exact integral over [from, to] inside segment i; both endpoints are
    /// clamped to the segment. Purely local, so no cancellation against
    /// the rest of the curve.
    pub(crate) fn integral_within_segment(&self, i: usize, from: f64, to: f64) -> f64 {
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let from = from.clamp(x0, x1);
        let to = to.clamp(x0, x1);
        self.segment_integral(i, to) - self.segment_integral(i, from)
    }

    /// Evaluate at x (clamped to the knot range).
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(self.x_min(), self.x_max());
        let i = self.segment(x);
        hermite(self.xs[i], self.xs[i + 1], self.ys[i], self.ys[i + 1], self.ds[i], self.ds[i + 1], x)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let x = x.clamp(self.x_min(), self.x_max());
        let i = self.segment(x);
        hermite_deriv(self.xs[i], self.xs[i + 1], self.ys[i], self.ys[i + 1], self.ds[i], self.ds[i + 1], x)
    }

    /// Exact integral of the piecewise cubic from the first knot to x.
    pub fn integral_from_start(&self, x: f64) -> f64 {
        let x = x.clamp(self.x_min(), self.x_max());
        let mut total = 0.0;
        for i in 0..self.xs.len() - 1 {
            let (x0, x1) = (self.xs[i], self.xs[i + 1]);
            let upper = if x >= x1 { x1 } else { x };
            if upper <= x0 {
                break;
            }
            total += self.segment_integral(i, upper);
            if x < x1 {
                break;
            }
        }
        total
    }

    fn segment_integral(&self, i: usize, upper: f64) -> f64 {
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let t = (upper - x0) / h;
        let (y0, y1, d0, d1) = (self.ys[i], self.ys[i + 1], self.ds[i], self.ds[i + 1]);
        // Antiderivatives of the Hermite basis in t, scaled by h.
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t2 * t2;
        let i00 = 0.5 * t4 - t3 + t;
        let i10 = 0.25 * t4 - 2.0 * t3 / 3.0 + 0.5 * t2;
        let i01 = -0.5 * t4 + t3;
        let i11 = 0.25 * t4 - t3 / 3.0;
        h * (i00 * y0 + i01 * y1) + h * h * (i10 * d0 + i11 * d1)
    }

    /// Solve eval(x) = y on a monotone curve by bracketed Newton.
    pub fn invert(&self, y: f64) -> Result<f64> {
        let n = self.xs.len();
        let increasing = self.ys[n - 1] >= self.ys[0];
        let (ylo, yhi) = if increasing {
            (self.ys[0], self.ys[n - 1])
        } else {
            (self.ys[n - 1], self.ys[0])
        };
        if y < ylo - 1e-12 || y > yhi + 1e-12 {
            return Err(Error::Domain(format!("invert target {y} outside range [{ylo}, {yhi}]")));
        }
        let y = y.clamp(ylo, yhi);
        // locate the bracketing segment
        let mut i = if increasing {
            self.ys.partition_point(|&v| v < y)
        } else {
            self.ys.partition_point(|&v| v > y)
        };
        i = i.clamp(1, n - 1) - 1;
        let (mut lo, mut hi) = (self.xs[i], self.xs[i + 1]);
        let mut x = if (self.ys[i + 1] - self.ys[i]).abs() > 0.0 {
            lo + (hi - lo) * ((y - self.ys[i]) / (self.ys[i + 1] - self.ys[i])).clamp(0.0, 1.0)
        } else {
            0.5 * (lo + hi)
        };
        for _ in 0..100 {
            let fx = self.eval(x) - y;
            if fx == 0.0 {
                return Ok(x);
            }
            if (fx > 0.0) == increasing {
                hi = x;
            } else {
                lo = x;
            }
            let dfx = self.deriv(x);
            let mut next = if dfx != 0.0 { x - fx / dfx } else { 0.5 * (lo + hi) };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 1e-16 * x.abs().max(1.0) {
                return Ok(next);
            }
            x = next;
            if hi - lo <= 1e-16 * hi.abs().max(1.0) {
                return Ok(0.5 * (lo + hi));
            }
        }
        Ok(x)
    }
}

fn pchip_end(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= 0.0 {
        0.0
    } else if d0 * d1 < 0.0 && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_reproduces_cubic() {
        let f = |x: f64| x.powi(3) - 2.0 * x + 1.0;
        let df = |x: f64| 3.0 * x * x - 2.0;
        for &x in &[0.1, 0.5, 0.93] {
            let v = hermite(0.0, 1.0, f(0.0), f(1.0), df(0.0), df(1.0), x);
            assert!((v - f(x)).abs() < 1e-14);
            let d = hermite_deriv(0.0, 1.0, f(0.0), f(1.0), df(0.0), df(1.0), x);
            assert!((d - df(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn curve_integral_exact_for_cubic() {
        let f = |x: f64| x.powi(3) + x;
        let df = |x: f64| 3.0 * x * x + 1.0;
        let xs: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let ds: Vec<f64> = xs.iter().map(|&x| df(x)).collect();
        let c = CubicHermite::with_slopes(xs, ys, ds).unwrap();
        let anti = |x: f64| 0.25 * x.powi(4) + 0.5 * x * x;
        for &x in &[0.3, 0.77, 1.0] {
            assert!((c.integral_from_start(x) - anti(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn invert_monotone() {
        let xs: Vec<f64> = (0..=32).map(|i| i as f64 / 32.0).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| x.powi(3) + x).collect();
        let ds: Vec<f64> = xs.iter().map(|&x| 3.0 * x * x + 1.0).collect();
        let c = CubicHermite::with_slopes(xs, ys, ds).unwrap();
        let x = c.invert(1.2).unwrap();
        assert!((x.powi(3) + x - 1.2).abs() < 1e-10);
    }

    #[test]
    fn pchip_is_monotone_on_monotone_data() {
        let xs = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = vec![0.0, 0.1, 2.0, 2.05, 3.0];
        let c = CubicHermite::pchip(xs, ys).unwrap();
        let mut prev = c.eval(0.0);
        for i in 1..=400 {
            let v = c.eval(i as f64 / 100.0);
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }
}
