//! Generalized trigonometric functions and generalized polar coordinates.
//!
//! The auxiliary oscillator
//!
//! ```text
//! x' = -phi_q(y),   y' = phi_p(x),   x(0) = 1, y(0) = 0
//! ```
//!
//! conserves `Phi_p(x) + Phi_q(y) = 1/p` and is periodic with period
//! `2 pi_p`. Its components define `cos_q(t) := x(t)` and `sin_q(t) := y(t)`,
//! which reduce to the classical cosine and sine at `p = 2`. A phase-plane
//! point `(u, v)` is represented as
//!
//! ```text
//! u = rho^(1/p) cos_q(theta),   v = rho^(1/q) sin_q(theta),
//! rho = p [Phi_p(u) + Phi_q(v)]
//! ```
//!
//! Everything here is defined numerically: the quarter period comes from
//! adaptive quadrature of the conserved quantity, and one quarter of the
//! oscillation is tabulated with exact slopes for O(1) evaluation. The
//! normalization is fixed by the literal initial data of the auxiliary
//! system; tables that use a differently scaled half-period will disagree
//! by a constant factor in `theta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::interp::{hermite, hermite_deriv};
use crate::num::quad;
use crate::num::big_phi;

/// An exponent `p > 1` together with its Hölder conjugate `q = p/(p-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PExponent {
    p: f64,
    q: f64,
}

impl PExponent {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::Domain(format!("exponent p must be finite and > 1, got {p}")));
        }
        Ok(PExponent { p, q: p / (p - 1.0) })
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn q(&self) -> f64 {
        self.q
    }

    /// The conjugate pair (q, p).
    pub fn conjugate(&self) -> PExponent {
        PExponent { p: self.q, q: self.p }
    }
}

/// Generalized polar coordinates of a phase-plane point.
///
/// `rho >= 0` is the generalized squared radius `p [Phi_p(u) + Phi_q(v)]`;
/// `theta` is the (possibly unwrapped) angle in half-period units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarState {
    pub rho: f64,
    pub theta: f64,
}

/// Half period `pi_p` of the auxiliary oscillator, by adaptive quadrature.
///
/// Eliminating one variable through the conserved quantity gives
/// `dt = dy / (1 - (p/q) y^q)^(1/q)` on the rising quarter. The quarter is
/// split at the equal-energy point so both pieces have smooth integrands,
/// and each piece is integrated to an absolute accuracy well below 1e-10.
pub fn half_period(pexp: &PExponent) -> f64 {
    let (p, q) = (pexp.p, pexp.q);
    let y_split = (q / (2.0 * p)).powf(1.0 / q);
    let x_split = 2f64.powf(-1.0 / p);
    let t1 = quad::adaptive(&|y: f64| (1.0 - (p / q) * y.abs().powf(q)).powf(-1.0 / q), 0.0, y_split, 5e-14)
        .expect("quadrature of a smooth bounded integrand");
    let t2 = quad::adaptive(&|x: f64| ((q / p) * (1.0 - x.abs().powf(p))).powf(-1.0 / p), 0.0, x_split, 5e-14)
        .expect("quadrature of a smooth bounded integrand");
    2.0 * (t1 + t2)
}

/// One tabulated half of the first quarter: a coordinate as a function of t,
/// with exact slopes from the oscillator equations.
#[derive(Debug, Clone)]
struct HalfTable {
    t: Vec<f64>,
    w: Vec<f64>,
    dw: Vec<f64>,
    increasing: bool,
}

impl HalfTable {
    fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(self.t[0], *self.t.last().unwrap());
        let i = segment(&self.t, t);
        hermite(self.t[i], self.t[i + 1], self.w[i], self.w[i + 1], self.dw[i], self.dw[i + 1], t)
    }

    /// Solve w(t) = target inside the table range.
    fn invert(&self, target: f64) -> f64 {
        let n = self.t.len();
        let i = if self.increasing {
            self.w.partition_point(|&v| v < target)
        } else {
            self.w.partition_point(|&v| v > target)
        }
        .clamp(1, n - 1)
            - 1;
        let (mut lo, mut hi) = (self.t[i], self.t[i + 1]);
        let (w0, w1) = (self.w[i], self.w[i + 1]);
        let mut t = if w1 != w0 {
            lo + (hi - lo) * ((target - w0) / (w1 - w0)).clamp(0.0, 1.0)
        } else {
            0.5 * (lo + hi)
        };
        for _ in 0..80 {
            let f = hermite(self.t[i], self.t[i + 1], w0, w1, self.dw[i], self.dw[i + 1], t) - target;
            if f == 0.0 {
                return t;
            }
            if (f > 0.0) == self.increasing {
                hi = t;
            } else {
                lo = t;
            }
            let df = hermite_deriv(self.t[i], self.t[i + 1], w0, w1, self.dw[i], self.dw[i + 1], t);
            let mut next = if df != 0.0 { t - f / df } else { 0.5 * (lo + hi) };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-17 * t.abs().max(1e-3) {
                return next;
            }
            t = next;
        }
        t
    }
}

fn segment(xs: &[f64], x: f64) -> usize {
    match xs.partition_point(|&k| k <= x) {
        0 => 0,
        j if j >= xs.len() => xs.len() - 2,
        j => j - 1,
    }
}

/// Tabulated generalized trigonometry for a fixed exponent pair.
///
/// Construction is a pure function of `p`; the table is immutable afterwards
/// and can be shared freely between threads.
#[derive(Debug, Clone)]
pub struct PTrig {
    pexp: PExponent,
    pi_p: f64,
    quarter: f64,
    t_split: f64,
    y_max: f64,
    x_split: f64,
    /// y(t) on [0, t_split], increasing.
    rise: HalfTable,
    /// x(t) on [t_split, quarter], decreasing.
    fall: HalfTable,
}

/// Nodes per half of the tabulated quarter period.
const HALF_NODES: usize = 4096;

impl PTrig {
    pub fn new(pexp: PExponent) -> Self {
        let (p, q) = (pexp.p, pexp.q);
        let pi_p = half_period(&pexp);
        let quarter = 0.5 * pi_p;
        let y_max = (q / p).powf(1.0 / q);
        let y_split = (q / (2.0 * p)).powf(1.0 / q);
        let x_split = 2f64.powf(-1.0 / p);

        // Rising half: y as a function of t, nodes graded quadratically
        // toward y = 0 where y(t) has a fractional-power correction.
        let n = HALF_NODES;
        let mut ys = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let s = j as f64 / n as f64;
            ys.push(y_split * s * s);
        }
        let g = |y: f64| (1.0 - (p / q) * y.abs().powf(q)).powf(-1.0 / q);
        let mut t = Vec::with_capacity(n + 1);
        t.push(0.0);
        for j in 1..=n {
            let prev = *t.last().unwrap();
            t.push(prev + quad::gl10().integrate(g, ys[j - 1], ys[j]));
        }
        let t_split = *t.last().unwrap();
        let dy: Vec<f64> = ys.iter().map(|&y| (1.0 - (p / q) * y.powf(q)).max(0.0).powf(1.0 / q)).collect();
        let rise = HalfTable { t, w: ys, dw: dy, increasing: true };

        // Falling half: x as a function of t, nodes graded toward x = 0.
        let mut xs = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let s = 1.0 - j as f64 / n as f64;
            xs.push(x_split * s * s);
        }
        let h = |x: f64| ((q / p) * (1.0 - x.abs().powf(p))).powf(-1.0 / p);
        let mut tx = Vec::with_capacity(n + 1);
        tx.push(t_split);
        for j in 1..=n {
            let prev = *tx.last().unwrap();
            tx.push(prev + quad::gl10().integrate(h, xs[j], xs[j - 1]));
        }
        // Snap the cumulative end onto the independently computed quarter
        // period (the mismatch is at rounding level).
        let end = *tx.last().unwrap();
        if end > t_split {
            let scale = (quarter - t_split) / (end - t_split);
            for v in tx.iter_mut() {
                *v = t_split + (*v - t_split) * scale;
            }
        }
        let dx: Vec<f64> = xs.iter().map(|&x| -((q / p) * (1.0 - x.powf(p))).max(0.0).powf(1.0 / p)).collect();
        let fall = HalfTable { t: tx, w: xs, dw: dx, increasing: false };

        PTrig { pexp, pi_p, quarter, t_split, y_max, x_split, rise, fall }
    }

    pub fn exponent(&self) -> &PExponent {
        &self.pexp
    }

    /// Half period pi_p (= pi for p = 2).
    pub fn pi_p(&self) -> f64 {
        self.pi_p
    }

    /// First-quarter state (x, y); t must lie in [0, quarter].
    fn quarter_eval(&self, t: f64) -> (f64, f64) {
        let (p, q) = (self.pexp.p, self.pexp.q);
        if t <= self.t_split {
            let y = self.rise.eval(t).clamp(0.0, self.y_max);
            // reconstruct x from the conserved quantity: well conditioned
            // because x >= 2^(-1/p) on this half
            let x = (1.0 - (p / q) * y.powf(q)).max(0.0).powf(1.0 / p);
            (x, y)
        } else {
            let x = self.fall.eval(t).clamp(0.0, self.x_split);
            let y = ((q / p) * (1.0 - x.powf(p))).max(0.0).powf(1.0 / q);
            (x, y)
        }
    }

    /// `(sin_q(t), cos_q(t))` by argument reduction onto the tabulated
    /// quarter. NaN propagates for non-finite input.
    pub fn sincos(&self, t: f64) -> (f64, f64) {
        if !t.is_finite() {
            return (f64::NAN, f64::NAN);
        }
        let period = 2.0 * self.pi_p;
        let mut tau = t % period;
        if tau < 0.0 {
            tau += period;
        }
        let k = (tau / self.quarter).floor().min(3.0) as usize;
        let s = tau - k as f64 * self.quarter;
        let (x, y) = match k {
            0 => self.quarter_eval(s),
            1 => {
                let (x, y) = self.quarter_eval(self.quarter - s);
                (-x, y)
            }
            2 => {
                let (x, y) = self.quarter_eval(s);
                (-x, -y)
            }
            _ => {
                let (x, y) = self.quarter_eval(self.quarter - s);
                (x, -y)
            }
        };
        (y, x)
    }

    /// Map polar coordinates to the phase plane.
    pub fn polar_to_cartesian(&self, state: &PolarState) -> Result<(f64, f64)> {
        if state.rho < 0.0 || !state.rho.is_finite() {
            return Err(Error::Domain(format!("rho must be finite and >= 0, got {}", state.rho)));
        }
        let (sin, cos) = self.sincos(state.theta);
        let (p, q) = (self.pexp.p, self.pexp.q);
        Ok((state.rho.powf(1.0 / p) * cos, state.rho.powf(1.0 / q) * sin))
    }

    /// Inverse map. Returns the principal angle in [0, 2 pi_p); the origin
    /// maps to (rho, theta) = (0, 0) by convention.
    pub fn cartesian_to_polar(&self, u: f64, v: f64) -> PolarState {
        let (p, q) = (self.pexp.p, self.pexp.q);
        let rho = p * (big_phi(p, u) + big_phi(q, v));
        if rho == 0.0 {
            return PolarState { rho: 0.0, theta: 0.0 };
        }
        let c = (u.abs() / rho.powf(1.0 / p)).clamp(0.0, 1.0);
        let s = (v.abs() / rho.powf(1.0 / q)).clamp(0.0, self.y_max);
        // Invert the relation of whichever coordinate is currently small:
        // its table slope is bounded away from zero there, so the solve is
        // well conditioned near both axes.
        let t1 = if c >= self.x_split {
            self.rise.invert(s)
        } else {
            self.fall.invert(c)
        }
        .clamp(0.0, self.quarter);
        let theta = match (u >= 0.0, v >= 0.0) {
            (true, true) => t1,
            (false, true) => 2.0 * self.quarter - t1,
            (false, false) => 2.0 * self.quarter + t1,
            (true, false) => 4.0 * self.quarter - t1,
        };
        let theta = if theta >= 2.0 * self.pi_p { 0.0 } else { theta };
        PolarState { rho, theta }
    }

    /// Residual of the conserved quantity at angle t (should be ~0).
    pub fn identity_residual(&self, t: f64) -> f64 {
        let (sin, cos) = self.sincos(t);
        let (p, q) = (self.pexp.p, self.pexp.q);
        big_phi(p, cos) + big_phi(q, sin) - 1.0 / p
    }
}

/// Convenience wrapper: `(sin_q, cos_q)` for a single argument.
///
/// Builds the quarter table on each call; use [`PTrig`] for repeated
/// evaluation.
pub fn sincos_q(t: f64, pexp: &PExponent) -> (f64, f64) {
    PTrig::new(*pexp).sincos(t)
}
