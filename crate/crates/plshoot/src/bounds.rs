//! Barrier profile, compact-support check, support-size brackets, and the
//! energy-growth probe.
//!
//! The barrier is the one-dimensional zero-energy profile `w` defined
//! implicitly by
//!
//! ```text
//! r = int_{w(r)}^{a} ds / [p' (-F(s))]^(1/p),
//! ```
//!
//! which decreases from `w(0) = a` (the endpoint of the interval where f
//! decreases) to `w(T_a) = 0` with `w'(T_a) = 0`, where `T_a` is the full
//! integral. Any bounded solution tending to zero lies below a translate
//! of the barrier once it stays inside (b, a), hence vanishes identically
//! beyond `R + max(T_a, T_b)`; the reflected profile handles the negative
//! side. The first integral `|w'|^p / p' + F(w) = 0` holds along the
//! profile.
//!
//! Support-size brackets: with `S` the first radius where `u = theta
//! lambda`,
//!
//! ```text
//! N^(1/(p-1)) p' (1-theta) lambda / f(lambda)^(1/(p-1))
//!     <= S^(p')
//!     <= N^(1/(p-1)) p' (1-theta) lambda / f(theta lambda)^(1/(p-1)),
//! ```
//!
//! and the energy-decay comparison gives the computable support lower
//! bound `r_support^(p') >= S_lo^(p') (F(theta lambda) / F_bar)^(1/(N-1))`,
//! which also takes the power form
//! `c (lambda^(N(p-1)/(N-p)) / f(lambda))^((N-p)/(p(N-1)))` with an
//! explicit constant.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ivp::{integrate, ProblemParams, StopReason, Trajectory};
use crate::model::{Landmarks, Nonlinearity};
use crate::num::interp::CubicHermite;
use crate::num::quad;
use crate::ptrig::PExponent;
use crate::shoot::NodeSolution;

/// The compact-support barrier profile and its crossing times.
#[derive(Debug, Clone)]
pub struct BarrierProfile {
    /// time for the positive-side profile to reach zero
    pub a_time: f64,
    /// time for the reflected (negative-side) profile
    pub b_time: f64,
    /// decreasing profile w(r) on [0, a_time]
    profile: CubicHermite,
    /// quadrature panels used (refinement doubles this)
    pub panels: usize,
}

impl BarrierProfile {
    /// Barrier value at r (0 beyond `a_time`).
    pub fn eval(&self, r: f64) -> f64 {
        if r >= self.a_time {
            0.0
        } else {
            self.profile.eval(r).max(0.0)
        }
    }

    /// Residual of the first integral `|w'|^p / p' + F(w)` at radius r,
    /// with the slope taken from the interpolant.
    pub fn first_integral_residual(&self, r: f64, nl: &Nonlinearity, p: f64) -> f64 {
        let q = p / (p - 1.0);
        let w = self.profile.eval(r);
        let dw = self.profile.deriv(r);
        dw.abs().powf(p) / q + nl.big_f(w)
    }
}

pub const DEFAULT_BARRIER_PANELS: usize = 512;

/// Build the barrier with the default panel count.
pub fn barrier(nl: &Nonlinearity, p: f64, lm: &Landmarks) -> Result<BarrierProfile> {
    barrier_with_panels(nl, p, lm, DEFAULT_BARRIER_PANELS)
}

/// Build the barrier with an explicit panel count (used by refinement
/// stability checks).
///
/// The integrand `[p'(-F(s))]^(-1/p)` has an `s^(-m/p)` singularity at the
/// origin; the substitution `s = a w^(p/(p-m))` makes it bounded, so fixed
/// Gauss panels in `w` converge fast. Requires the integrability exponent
/// `m < p`; otherwise the quadrature diverges and the construction fails.
pub fn barrier_with_panels(
    nl: &Nonlinearity,
    p: f64,
    lm: &Landmarks,
    panels: usize,
) -> Result<BarrierProfile> {
    let resolve = nl.zero_resolution();
    let a_time = one_side_impl(|s| nl.big_f(s), nl.zero_exponent(), p, lm.a, panels, resolve)?;
    let refl = nl.reflected();
    let b_time =
        one_side_impl(|s| refl.big_f(s), nl.zero_exponent(), p, -lm.b, panels, resolve)?.0;
    Ok(BarrierProfile { a_time: a_time.0, b_time, profile: a_time.1, panels })
}

fn one_side_impl<F: Fn(f64) -> f64>(
    big_f: F,
    m: f64,
    p: f64,
    a: f64,
    panels: usize,
    resolve: f64,
) -> Result<(f64, CubicHermite)> {
    if !(m < p) {
        return Err(Error::Barrier(format!(
            "|F|^(-1/p) is not integrable near 0: growth exponent {m} >= p = {p}"
        )));
    }
    if !(a > 0.0) {
        return Err(Error::Barrier(format!("invalid profile endpoint a = {a}")));
    }
    let q = p / (p - 1.0);
    let beta = p / (p - m);
    // integrand in the substituted variable s = a w^beta
    let g = |w: f64| -> f64 {
        let s = a * w.powf(beta);
        let neg_f = -big_f(s);
        if neg_f <= 0.0 {
            return f64::INFINITY;
        }
        (q * neg_f).powf(-1.0 / p) * a * beta * w.powf(beta - 1.0)
    };
    // Tabulated F cannot resolve its power growth below the knot scale;
    // below that floor the crossing time is integrated in closed form
    // from the fitted exponent. Closed-form families have no floor.
    let w_floor = if resolve > 0.0 { (resolve / a).powf(1.0 / beta).min(0.5) } else { 0.0 };
    let tail = if w_floor > 0.0 {
        let s_f = a * w_floor.powf(beta);
        let neg_f = -big_f(s_f);
        if !(neg_f > 0.0) {
            return Err(Error::Barrier(format!(
                "F is not negative at the resolution floor {s_f:e} (table too coarse near 0)"
            )));
        }
        let k = neg_f / s_f.powf(m);
        (q * k).powf(-1.0 / p) * s_f.powf(1.0 - m / p) / (1.0 - m / p)
    } else {
        0.0
    };
    // cumulative time from s = 0 upward; the profile runs backward
    let mut times = Vec::with_capacity(panels + 2);
    times.push(0.0);
    let mut ss = Vec::with_capacity(panels + 2);
    ss.push(0.0);
    if w_floor > 0.0 {
        times.push(tail);
        ss.push(a * w_floor.powf(beta));
    }
    for j in 1..=panels {
        let w0 = w_floor + (1.0 - w_floor) * (j - 1) as f64 / panels as f64;
        let w1 = w_floor + (1.0 - w_floor) * j as f64 / panels as f64;
        let inc = quad::gl10().integrate(g, w0, w1);
        if !inc.is_finite() {
            return Err(Error::Barrier(
                "quadrature of the barrier time diverged (check the hypotheses on F)".into(),
            ));
        }
        let prev = *times.last().unwrap();
        times.push(prev + inc);
        ss.push(a * w1.powf(beta));
    }
    let total = *times.last().unwrap();
    // knots of w(r): r = total - time-from-zero, profile value s, slope
    // w'(r) = -[q(-F)]^(1/p) from the first integral
    let mut rs = Vec::with_capacity(times.len());
    let mut ws = Vec::with_capacity(times.len());
    let mut ds = Vec::with_capacity(times.len());
    for j in (0..times.len()).rev() {
        rs.push(total - times[j]);
        ws.push(ss[j]);
        let neg_f = (-big_f(ss[j])).max(0.0);
        ds.push(-(q * neg_f).powf(1.0 / p));
    }
    let profile = CubicHermite::with_slopes(rs, ws, ds)?;
    Ok((total, profile))
}

/// Outcome of the compact-support upper check.
#[derive(Debug, Clone, Serialize)]
pub enum SupportCheck {
    /// the solution vanishes beyond the certified radius, with margin
    Pass {
        /// anchor radius R beyond which the solution stays inside (b, a)
        r_anchor: f64,
        /// certified vanishing threshold `R + max(T_a, T_b)`
        threshold: f64,
        /// threshold minus the measured support radius (> 0 on pass)
        margin: f64,
        max_abs_u_beyond: f64,
    },
    Fail {
        r_anchor: f64,
        threshold: f64,
        max_abs_u_beyond: f64,
    },
    /// hypothesis not met: the solution never settles inside (b, a)
    Inconclusive { reason: String },
}

impl SupportCheck {
    pub fn passed(&self) -> bool {
        matches!(self, SupportCheck::Pass { .. })
    }
}

/// Verify the compact-support principle on an extended solution: beyond
/// `R + max(T_a, T_b)` the solution must vanish (within the double-zero
/// tolerance).
///
/// `r_anchor` overrides the automatic choice of R, which is the earliest
/// sample radius from which the trajectory stays strictly inside (b, a).
pub fn support_upper_check(
    sol: &NodeSolution,
    bar: &BarrierProfile,
    lm: &Landmarks,
    r_anchor: Option<f64>,
) -> SupportCheck {
    let traj = &sol.trajectory;
    let tol = traj.params.tol;
    let anchor = match r_anchor {
        Some(r) => r,
        None => {
            // earliest radius from which u stays inside (b, a)
            let mut anchor = None;
            let mut candidate = 0.0f64;
            let mut inside = false;
            for (st, _) in traj.samples() {
                let within = st.u > lm.b && st.u < lm.a;
                if within && !inside {
                    candidate = st.r;
                    inside = true;
                } else if !within {
                    inside = false;
                }
            }
            if inside {
                anchor = Some(candidate);
            }
            match anchor {
                Some(r) if r < sol.r_support => r,
                _ => {
                    return SupportCheck::Inconclusive {
                        reason: format!(
                            "no radius before r_support = {} from which u stays inside ({}, {})",
                            sol.r_support, lm.b, lm.a
                        ),
                    }
                }
            }
        }
    };
    // validate the hypothesis on the provided anchor
    for (st, _) in traj.samples() {
        if st.r > anchor && !(st.u > lm.b && st.u < lm.a) {
            return SupportCheck::Inconclusive {
                reason: format!("u({}) = {} leaves ({}, {}) beyond the anchor", st.r, st.u, lm.b, lm.a),
            };
        }
    }
    let threshold = anchor + bar.a_time.max(bar.b_time);
    let mut max_beyond = 0.0f64;
    for (st, _) in traj.samples() {
        if st.r >= threshold {
            max_beyond = max_beyond.max(st.u.abs());
        }
    }
    if traj.r_end() < threshold {
        return SupportCheck::Inconclusive {
            reason: format!(
                "solution data ends at {} before the certified threshold {threshold} (extend further)",
                traj.r_end()
            ),
        };
    }
    if max_beyond <= tol.double_zero_tol {
        SupportCheck::Pass {
            r_anchor: anchor,
            threshold,
            margin: threshold - sol.r_support,
            max_abs_u_beyond: max_beyond,
        }
    } else {
        SupportCheck::Fail { r_anchor: anchor, threshold, max_abs_u_beyond: max_beyond }
    }
}

/// Closed-form support-size brackets at amplitude lambda.
#[derive(Debug, Clone, Serialize)]
pub struct SizeBounds {
    pub lambda: f64,
    pub theta: f64,
    /// lower bracket for the first radius where u = theta lambda
    pub s_lo: f64,
    /// upper bracket
    pub s_hi: f64,
    /// lower bound on the support radius / first energy zero
    pub r_support_lo: f64,
    /// the same bound in the power form `c (lambda^e1 / f(lambda))^e2`
    pub r_support_lo_power_form: f64,
    /// explicit constant of the power form
    pub power_constant: f64,
    /// pointwise growth margin F(theta lambda)/(lambda f(lambda))
    pub kappa: f64,
}

/// Compute the brackets. Requires `f(theta lambda) > 0` and
/// `F(theta lambda) > 0` (amplitude large enough).
pub fn size_bounds(
    lambda: f64,
    theta: f64,
    nl: &Nonlinearity,
    pexp: &PExponent,
    dim: f64,
    lm: &Landmarks,
) -> Result<SizeBounds> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Config(format!("theta must lie in (0, 1), got {theta}")));
    }
    let (p, q) = (pexp.p(), pexp.q());
    let f_lam = nl.f(lambda);
    let f_theta = nl.f(theta * lambda);
    if !(f_theta > 0.0) {
        return Err(Error::Domain(format!(
            "f(theta lambda) = {f_theta} <= 0: lambda = {lambda} too small for the bracket"
        )));
    }
    let big_f_theta = nl.big_f(theta * lambda);
    if !(big_f_theta > 0.0) {
        return Err(Error::Domain(format!(
            "F(theta lambda) = {big_f_theta} <= 0: lambda too small for the support bound"
        )));
    }
    let base = dim.powf(1.0 / (p - 1.0)) * q * (1.0 - theta) * lambda;
    let s_lo = (base / f_lam.powf(1.0 / (p - 1.0))).powf(1.0 / q);
    let s_hi = (base / f_theta.powf(1.0 / (p - 1.0))).powf(1.0 / q);

    // energy-decay comparison: r^q >= S_lo^q (F(theta lambda)/F_bar)^(1/(N-1))
    let decay = (big_f_theta / lm.f_bar).powf(1.0 / (dim - 1.0));
    let r_support_lo = (s_lo.powf(q) * decay).powf(1.0 / q);

    // equivalent power form with its constant materialized
    let kappa = big_f_theta / (lambda * f_lam);
    let c_q = dim.powf(1.0 / (p - 1.0)) * q * (1.0 - theta) * (kappa / lm.f_bar).powf(1.0 / (dim - 1.0));
    let exponent = (dim - p) / (p * (dim - 1.0));
    let ratio = lambda.powf(dim * (p - 1.0) / (dim - p)) / f_lam;
    let power_constant = c_q.powf(1.0 / q);
    let r_support_lo_power_form = power_constant * ratio.powf(exponent);

    Ok(SizeBounds {
        lambda,
        theta,
        s_lo,
        s_hi,
        r_support_lo,
        r_support_lo_power_form,
        power_constant,
        kappa,
    })
}

/// First radius where the trajectory crosses `theta lambda` from above.
pub fn measure_s_theta(traj: &Trajectory, theta: f64) -> Option<f64> {
    let lambda = traj.params.lambda;
    let target = theta * lambda;
    let mut prev: Option<(f64, f64)> = None;
    for (st, _) in traj.samples() {
        if let Some((pr, pu)) = prev {
            if pu > target && st.u <= target {
                // bisect the dense output
                let (mut lo, mut hi) = (pr, st.r);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let um = traj.eval(mid).ok()?.u;
                    if um > target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-14 * hi.max(1.0) {
                        break;
                    }
                }
                return Some(0.5 * (lo + hi));
            }
        }
        prev = Some((st.r, st.u));
    }
    None
}

/// One row of the energy-growth probe.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeRow {
    pub lambda: f64,
    /// minimum of the energy over [0, R] (the energy is non-increasing,
    /// so this is the value at R for runs that reach it)
    pub min_energy: f64,
    /// minimum of rho over [0, R]
    pub min_rho: f64,
    pub r_end: f64,
}

/// Probe the uniform energy growth in lambda on the window [0, R]: for
/// increasing amplitudes the minima must eventually increase, which (via
/// the energy-rho link) certifies the rotation-bound hypothesis window.
pub fn energy_growth_probe(
    r_horizon: f64,
    lambdas: &[f64],
    params: &ProblemParams,
    nl: &Nonlinearity,
    lm: &Landmarks,
) -> Result<Vec<ProbeRow>> {
    if lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("probe amplitudes must be strictly increasing".into()));
    }
    let (p, q) = (params.pexp.p(), params.pexp.q());
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let mut pp = params.with_lambda(lambda);
        pp.r_max = r_horizon;
        pp.stop_on_trapped = false;
        pp.max_zeros = usize::MAX;
        let traj = integrate(&pp, nl, lm)?;
        let mut min_e = f64::INFINITY;
        let mut min_rho = f64::INFINITY;
        for (st, e) in traj.samples() {
            min_e = min_e.min(e);
            let rho = p * (crate::num::big_phi(p, st.u) + crate::num::big_phi(q, st.v));
            min_rho = min_rho.min(rho);
        }
        let _ = traj.stop_reason == StopReason::ReachedRmax;
        rows.push(ProbeRow { lambda, min_energy: min_e, min_rho, r_end: traj.r_end() });
    }
    Ok(rows)
}

/// Window length from the rotation certificate guaranteeing at least `m`
/// sign changes once the energy stays high on it:
/// `R = pi_p (m + 1/2) / omega + r0`.
pub fn lambda_big_radius(m: usize, omega: f64, r0: f64, pi_p: f64) -> f64 {
    pi_p * (m as f64 + 0.5) / omega + r0
}
