//! Angle tracking along trajectories and node counting.
//!
//! In generalized polar coordinates the flow satisfies
//!
//! ```text
//! theta' = -(1/rho) [ p Phi_q(v) + u f(u) + (N-1)/r u v ],
//! rho(0) = lambda^p,  theta(0) = 0,
//! ```
//!
//! so `u` vanishes exactly when `theta` crosses `pi_p/2` modulo `pi_p`, and
//! the number of sign changes on (0, r) is the integer part of
//! `(pi_p/2 - theta(r)) / pi_p`. The angle is computed two ways and
//! reconciled: pointwise inversion of the phase state with branch
//! unwrapping, and quadrature of the `theta'` equation; disagreements
//! beyond 1e-6 are attached to the trace as warnings.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ivp::Trajectory;
use crate::model::{Nonlinearity, RotationCertificate};
use crate::num::{big_phi, quad};
use crate::ptrig::PTrig;

/// One angle sample.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AngleSample {
    pub r: f64,
    pub rho: f64,
    /// unwrapped angle (continuous, theta(0) = 0)
    pub theta: f64,
}

/// A disagreement between the pointwise and quadrature angle tracks.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AngleWarning {
    pub r: f64,
    pub pointwise: f64,
    pub quadrature: f64,
}

/// Unwrapped angular trace of a trajectory.
#[derive(Debug, Clone)]
pub struct AngularTrace {
    pub samples: Vec<AngleSample>,
    pub warnings: Vec<AngleWarning>,
    /// largest |pointwise - quadrature| deviation observed
    pub max_discrepancy: f64,
    pub pi_p: f64,
}

impl AngularTrace {
    pub fn r_end(&self) -> f64 {
        self.samples.last().map(|s| s.r).unwrap_or(0.0)
    }

    /// Unwrapped angle at r, linear between samples (exact at samples).
    pub fn theta_at(&self, r: f64) -> Result<f64> {
        let last = self.r_end();
        if !(r >= 0.0 && r <= last * (1.0 + 1e-12)) {
            return Err(Error::Domain(format!("angle query at r = {r} outside [0, {last}]")));
        }
        let r = r.min(last);
        let i = match self.samples.partition_point(|s| s.r <= r) {
            0 => 0,
            j if j >= self.samples.len() => self.samples.len() - 1,
            j => j - 1,
        };
        let s0 = self.samples[i];
        if s0.r == r || i + 1 == self.samples.len() {
            return Ok(s0.theta);
        }
        let s1 = self.samples[i + 1];
        Ok(s0.theta + (s1.theta - s0.theta) * (r - s0.r) / (s1.r - s0.r))
    }
}

fn theta_prime(nl: &Nonlinearity, p: f64, q: f64, dim: f64, r: f64, u: f64, v: f64) -> f64 {
    let rho = p * (big_phi(p, u) + big_phi(q, v));
    if rho == 0.0 {
        return 0.0;
    }
    // v/r -> -f(u)/N as r -> 0 (v vanishes linearly at the origin)
    let vr = if r > 1e-300 { v / r } else { -nl.f(u) / dim };
    -(p * big_phi(q, v) + u * nl.f(u) + (dim - 1.0) * u * vr) / rho
}

/// Track the generalized polar representation of a trajectory.
///
/// Tracking stops at the first point where `rho` falls below
/// `1e-12 lambda^p` (the angle is undefined at the phase-plane origin).
/// Consecutive samples are subdivided on the dense output until the
/// angular advance per interval is below a quarter half-period, so branch
/// unwrapping is unambiguous.
pub fn track_angle(traj: &Trajectory, trig: &PTrig, nl: &Nonlinearity) -> Result<AngularTrace> {
    let pexp = traj.params.pexp;
    if (trig.exponent().p() - pexp.p()).abs() > 1e-12 {
        return Err(Error::Contract(format!(
            "trig table built for p = {}, trajectory has p = {}",
            trig.exponent().p(),
            pexp.p()
        )));
    }
    let (p, q) = (pexp.p(), pexp.q());
    let dim = traj.params.dim;
    let pi_p = trig.pi_p();
    let rho_floor = 1e-12 * traj.params.lambda.powf(p);
    let rho_of = |u: f64, v: f64| p * (big_phi(p, u) + big_phi(q, v));

    // refined radius list: integrator samples plus subdivision keeping the
    // estimated angular advance below pi_p/4
    let base: Vec<f64> = traj.samples().map(|(st, _)| st.r).collect();
    if base.is_empty() {
        return Err(Error::Domain("empty trajectory".into()));
    }
    {
        let st0 = traj.eval(base[0])?;
        if rho_of(st0.u, st0.v) < rho_floor {
            return Err(Error::Domain(format!(
                "rho below the tracking floor {rho_floor:e} at the start"
            )));
        }
    }
    let speed = |r: f64| -> Result<f64> {
        let st = traj.eval(r)?;
        Ok(theta_prime(nl, p, q, dim, r, st.u, st.v).abs())
    };
    let mut rs: Vec<f64> = Vec::with_capacity(base.len());
    rs.push(base[0]);
    let budget = 0.25 * pi_p;
    for w in base.windows(2) {
        let (mut lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        // stack of pending subintervals
        let mut stack = vec![hi];
        let mut depth = 0usize;
        while let Some(top) = stack.last().copied() {
            let est = speed(lo)?.max(speed(top)?).max(speed(0.5 * (lo + top))?) * (top - lo);
            if est < budget || depth > 48 || (top - lo) < 1e-14 * top.max(1.0) {
                rs.push(top);
                lo = top;
                stack.pop();
                depth = depth.saturating_sub(1);
            } else {
                stack.push(0.5 * (lo + top));
                depth += 1;
            }
        }
    }

    // pointwise inversion with branch unwrapping, verified against
    // quadrature of theta'
    let period = 2.0 * pi_p;
    let mut samples = Vec::with_capacity(rs.len());
    let mut warnings = Vec::new();
    let mut max_disc: f64 = 0.0;
    let mut theta_prev = 0.0;
    let mut theta_quad = 0.0;
    let mut r_prev = rs[0];
    let mut first = true;
    for &r in &rs {
        let st = traj.eval(r)?;
        let rho = rho_of(st.u, st.v);
        if rho < rho_floor {
            break;
        }
        let principal = trig.cartesian_to_polar(st.u, st.v).theta;
        let theta = if first {
            first = false;
            // theta(0) = 0 on the initial ray u = lambda > 0, v = 0
            principal - period * (principal / period).round()
        } else {
            let k = ((theta_prev - principal) / period).round();
            let cand = principal + period * k;
            // nearest branch; the subdivision keeps |advance| < pi_p/2
            if (cand - theta_prev).abs() > 0.5 * pi_p + 1e-9 {
                let alt = if cand > theta_prev { cand - period } else { cand + period };
                if (alt - theta_prev).abs() < (cand - theta_prev).abs() {
                    alt
                } else {
                    cand
                }
            } else {
                cand
            }
        };
        if r > r_prev {
            let dq = quad::gl10().integrate(
                |rr| {
                    let s = traj.eval(rr).expect("inside trace range");
                    theta_prime(nl, p, q, dim, rr, s.u, s.v)
                },
                r_prev,
                r,
            );
            theta_quad += dq;
            let disc = (theta_quad - theta).abs();
            max_disc = max_disc.max(disc);
            if disc > 1e-6 {
                warnings.push(AngleWarning { r, pointwise: theta, quadrature: theta_quad });
            }
        } else {
            theta_quad = theta;
        }
        samples.push(AngleSample { r, rho, theta });
        theta_prev = theta;
        r_prev = r;
    }
    if samples.is_empty() {
        return Err(Error::Domain("rho below the tracking floor everywhere".into()));
    }
    Ok(AngularTrace { samples, warnings, max_discrepancy: max_disc, pi_p })
}

/// Number of nodes in (0, r) read off the unwrapped angle:
/// `floor((pi_p/2 - theta(r)) / pi_p)`.
///
/// Ties at an exact crossing are resolved toward "crossed" (a nudge of
/// 1e-9 half-periods), matching an event count that includes a zero
/// located exactly at r.
pub fn node_count(trace: &AngularTrace, r: f64) -> Result<usize> {
    let theta = trace.theta_at(r)?;
    let x = (0.5 * trace.pi_p - theta) / trace.pi_p + 1e-9;
    Ok(x.floor().max(0.0) as usize)
}

/// One violation of the certified angular-velocity bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RotationViolation {
    pub r: f64,
    pub theta_prime: f64,
    pub rho: f64,
}

/// Slack added to the certified bound to absorb finite-difference error.
pub const ROTATION_SLACK: f64 = 1e-4;

/// Check `theta' < -omega` at every trace sample inside the certified
/// region `r >= r0, rho >= sigma0^p`, using centered finite differences on
/// the unwrapped trace. Returns the (expected empty) list of violations.
pub fn check_rotation_bound(
    trace: &AngularTrace,
    cert: &RotationCertificate,
    p: f64,
) -> Vec<RotationViolation> {
    let rho_min = cert.sigma0.powf(p);
    let mut out = Vec::new();
    for i in 1..trace.samples.len().saturating_sub(1) {
        let s = trace.samples[i];
        if s.r < cert.r0 || s.rho < rho_min {
            continue;
        }
        let (a, b) = (trace.samples[i - 1], trace.samples[i + 1]);
        if b.r <= a.r {
            continue;
        }
        let tp = (b.theta - a.theta) / (b.r - a.r);
        if !(tp < -cert.omega + ROTATION_SLACK) {
            out.push(RotationViolation { r: s.r, theta_prime: tp, rho: s.rho });
        }
    }
    out
}

/// Energy/rho pair of a phase state: converts energy blow-up statements
/// into the `rho >= sigma0^p` hypothesis of the rotation bound
/// (the two quantities diverge together).
pub fn energy_rho_link(
    state: &crate::ivp::PhaseState,
    nl: &Nonlinearity,
    pexp: &crate::ptrig::PExponent,
) -> (f64, f64) {
    let e = crate::ivp::energy(state, nl, pexp);
    let rho = pexp.p() * (big_phi(pexp.p(), state.u) + big_phi(pexp.q(), state.v));
    (e, rho)
}

/// Check that the node-count formula agrees with the located zeros at
/// every sample of the trace; returns the offending radii.
pub fn node_count_mismatches(trace: &AngularTrace, traj: &Trajectory) -> Vec<f64> {
    let mut bad = Vec::new();
    for s in &trace.samples {
        let by_angle = match node_count(trace, s.r) {
            Ok(n) => n,
            Err(_) => continue,
        };
        let by_events = traj.simple_zeros_before(s.r);
        if by_angle != by_events {
            bad.push(s.r);
        }
    }
    bad
}
