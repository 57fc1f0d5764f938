//! The singular initial value problem and its integrator.
//!
//! The radial equation `(r^(N-1) phi_p(u'))' + r^(N-1) f(u) = 0` with
//! `u(0) = lambda, u'(0) = 0` is integrated as the first-order system
//!
//! ```text
//! u' = phi_q(v),   v' = -(N-1)/r v - f(u),   v = phi_p(u')
//! ```
//!
//! The 1/r coefficient forbids stepping from r = 0 directly, so a
//! fixed-point startup produces the state at a small `delta` first. The
//! main integrator is an embedded Dormand-Prince 5(4) pair with cubic
//! Hermite dense output. Zeros of u, critical points (zeros of v), energy
//! sign changes and double zeros are located by bisection on the dense
//! output and then *anchored*: the step is re-taken so that a sample lands
//! exactly on the event radius. Anchoring also carries the integration
//! across the points where the right-hand side is not Lipschitz
//! (`phi_q(v)` at v = 0 for p > 2, f near u = 0 for m < 2).
//!
//! Along every trajectory the energy
//!
//! ```text
//! E(r) = |u'|^p / p' + F(u),   E'(r) = -(N-1) |u'|^p / r
//! ```
//!
//! is non-increasing; it is evaluated at every sample and drives the stop
//! conditions: a trajectory stops at `r_max`, at a double zero with E ~ 0
//! (the compactly supported branch), or once E is trapped strictly below
//! zero with |u| below the last zero of f, after which no further sign
//! change is possible.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Landmarks, Nonlinearity};
use crate::num::interp::hermite;
use crate::num::{big_phi, cumulative_uniform, phi};
use crate::ptrig::PExponent;

/// Integration tolerances.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    /// relative step-error tolerance
    pub rel_tol: f64,
    /// absolute step-error tolerance
    pub abs_tol: f64,
    /// radius accuracy of located events; also the energy slack used by
    /// the stop conditions
    pub event_tol: f64,
    /// |u| + |u'| threshold below which a zero counts as double
    pub double_zero_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rel_tol: 1e-9, abs_tol: 1e-12, event_tol: 1e-10, double_zero_tol: 1e-7 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("event_tol", self.event_tol),
            ("double_zero_tol", self.double_zero_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Energy margin below which a trajectory counts as trapped.
    pub fn energy_margin(&self) -> f64 {
        10.0 * self.event_tol
    }
}

/// Parameters of one shot.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProblemParams {
    /// space dimension N (real valued, N > p)
    pub dim: f64,
    /// operator exponent with its conjugate
    pub pexp: PExponent,
    /// shooting amplitude u(0)
    pub lambda: f64,
    /// integration horizon
    pub r_max: f64,
    /// startup radius; None picks the default from the leading-order term
    pub delta: Option<f64>,
    pub tol: Tolerances,
    /// stop once the energy is trapped below zero (disable for long
    /// asymptotic diagnostics)
    pub stop_on_trapped: bool,
    /// cap on sign changes before the run is declared failed
    pub max_zeros: usize,
}

impl ProblemParams {
    pub fn new(dim: f64, p: f64, lambda: f64) -> Result<Self> {
        let pexp = PExponent::new(p)?;
        if !(dim > p) {
            return Err(Error::Config(format!("need N > p, got N = {dim}, p = {p}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be positive, got {lambda}")));
        }
        Ok(ProblemParams {
            dim,
            pexp,
            lambda,
            r_max: 100.0,
            delta: None,
            tol: Tolerances::default(),
            stop_on_trapped: true,
            max_zeros: 1000,
        })
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.tol.validate()?;
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(Error::Config(format!("r_max must be positive, got {}", self.r_max)));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::Config(format!("lambda must be positive, got {}", self.lambda)));
        }
        Ok(())
    }
}

/// Phase state `(r, u, v)` with `v = phi_p(u')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseState {
    pub r: f64,
    pub u: f64,
    pub v: f64,
}

impl PhaseState {
    /// Recover u' = phi_q(v).
    pub fn uprime(&self, pexp: &PExponent) -> f64 {
        phi(pexp.q(), self.v)
    }
}

/// Energy `E = |u'|^p / p' + F(u) = Phi_q(v) + F(u)`.
pub fn energy(state: &PhaseState, nl: &Nonlinearity, pexp: &PExponent) -> f64 {
    big_phi(pexp.q(), state.v) + nl.big_f(state.u)
}

/// Weighted energy `H = r^(p'(N-1)) E`, whose derivative along the flow is
/// `p'(N-1) r^(p'(N-1)-1) F(u)`.
pub fn weighted_energy(state: &PhaseState, nl: &Nonlinearity, pexp: &PExponent, dim: f64) -> f64 {
    state.r.powf(pexp.q() * (dim - 1.0)) * energy(state, nl, pexp)
}

/// Kind of a located event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    /// u = 0 with |u'| above the double-zero threshold
    SimpleZero,
    /// u' = 0 (v crosses zero)
    CriticalPoint,
    /// |u| + |u'| below the double-zero threshold
    DoubleZero,
    /// E crosses zero (recorded once, at the first crossing)
    EnergyZeroCrossing,
}

/// A located and anchored event. Serializes as `{kind, r, u, v, E}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Event {
    pub kind: EventKind,
    pub r: f64,
    pub u: f64,
    pub v: f64,
    #[serde(rename = "E")]
    pub e: f64,
}

/// Why the integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    ReachedRmax,
    EnergyTrapped,
    DoubleZero,
    Diverged,
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    r: f64,
    u: f64,
    v: f64,
    e: f64,
}

/// One dense-output segment: cubic Hermite data on [r0, r1].
#[derive(Debug, Clone, Copy)]
struct Segment {
    r0: f64,
    r1: f64,
    u0: f64,
    v0: f64,
    du0: f64,
    dv0: f64,
    u1: f64,
    v1: f64,
    du1: f64,
    dv1: f64,
}

impl Segment {
    fn eval(&self, r: f64) -> (f64, f64) {
        let u = hermite(self.r0, self.r1, self.u0, self.u1, self.du0, self.du1, r);
        let v = hermite(self.r0, self.r1, self.v0, self.v1, self.dv0, self.dv1, r);
        (u, v)
    }
}

/// Closest recorded approach to the phase-plane origin.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClosestApproach {
    pub r: f64,
    /// |u| + |u'|
    pub dist: f64,
    pub e: f64,
}

/// An integrated trajectory with samples, dense output and events.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: ProblemParams,
    samples: Vec<Sample>,
    segments: Vec<Segment>,
    pub events: Vec<Event>,
    pub stop_reason: StopReason,
    pub closest_approach: Option<ClosestApproach>,
}

impl Trajectory {
    pub fn r_end(&self) -> f64 {
        self.samples.last().map(|s| s.r).unwrap_or(0.0)
    }

    pub fn last_state(&self) -> PhaseState {
        let s = self.samples.last().expect("trajectory has samples");
        PhaseState { r: s.r, u: s.u, v: s.v }
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    /// Iterate over `(state, energy)` samples in increasing r.
    pub fn samples(&self) -> impl Iterator<Item = (PhaseState, f64)> + '_ {
        self.samples.iter().map(|s| (PhaseState { r: s.r, u: s.u, v: s.v }, s.e))
    }

    /// Dense evaluation anywhere in [0, r_end].
    pub fn eval(&self, r: f64) -> Result<PhaseState> {
        if !(r >= 0.0 && r <= self.r_end() * (1.0 + 1e-12) + 1e-300) {
            return Err(Error::Domain(format!(
                "dense evaluation at r = {r} outside [0, {}]",
                self.r_end()
            )));
        }
        let r = r.min(self.r_end());
        let i = match self.segments.partition_point(|s| s.r1 < r) {
            j if j >= self.segments.len() => self.segments.len() - 1,
            j => j,
        };
        let (u, v) = self.segments[i].eval(r);
        Ok(PhaseState { r, u, v })
    }

    /// Number of simple zeros located strictly before `r` (inclusive up to
    /// a rounding-level slack).
    pub fn simple_zeros_before(&self, r: f64) -> usize {
        let slack = 1e-9 * (1.0 + r);
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::SimpleZero && e.r <= r + slack)
            .count()
    }

    pub fn simple_zero_count(&self) -> usize {
        self.events.iter().filter(|e| e.kind == EventKind::SimpleZero).count()
    }

    /// First radius at which the energy reaches zero, when it does.
    pub fn energy_zero_radius(&self) -> Option<f64> {
        self.events
            .iter()
            .find(|e| e.kind == EventKind::EnergyZeroCrossing)
            .map(|e| e.r)
            .or_else(|| {
                self.events.iter().find(|e| e.kind == EventKind::DoubleZero).map(|e| e.r)
            })
    }

    pub fn double_zero(&self) -> Option<&Event> {
        self.events.iter().find(|e| e.kind == EventKind::DoubleZero)
    }

    /// Copy of the trajectory cut at `r_cut`, with a final sample exactly
    /// there.
    pub fn truncated(&self, r_cut: f64) -> Result<Trajectory> {
        let end_state = self.eval(r_cut)?;
        let mut samples: Vec<Sample> =
            self.samples.iter().copied().filter(|s| s.r < r_cut).collect();
        let mut segments: Vec<Segment> =
            self.segments.iter().copied().filter(|s| s.r1 <= r_cut).collect();
        if let Some(last) = segments.last() {
            if last.r1 < r_cut {
                if let Some(full) = self.segments.iter().find(|s| s.r0 <= r_cut && s.r1 > r_cut) {
                    let mut clipped = *full;
                    let (u, v) = full.eval(r_cut);
                    clipped.r1 = r_cut;
                    clipped.u1 = u;
                    clipped.v1 = v;
                    segments.push(clipped);
                }
            }
        }
        // energy at the cut comes from the last stored sample's trend; the
        // caller recomputes it when needed
        let e_cut = self
            .samples
            .iter()
            .rev()
            .find(|s| s.r <= r_cut)
            .map(|s| s.e)
            .unwrap_or(0.0);
        samples.push(Sample { r: end_state.r, u: end_state.u, v: end_state.v, e: e_cut });
        Ok(Trajectory {
            params: self.params,
            samples,
            segments,
            events: self.events.iter().copied().filter(|e| e.r <= r_cut).collect(),
            stop_reason: self.stop_reason,
            closest_approach: self.closest_approach,
        })
    }

    /// Append an identically-zero branch from the current end to `until`.
    pub(crate) fn append_zero_branch(&mut self, until: f64) {
        let start = self.r_end();
        if until <= start {
            return;
        }
        let n = 32;
        for i in 1..=n {
            let r = start + (until - start) * i as f64 / n as f64;
            self.samples.push(Sample { r, u: 0.0, v: 0.0, e: 0.0 });
        }
        self.segments.push(Segment {
            r0: start,
            r1: until,
            u0: 0.0,
            v0: 0.0,
            du0: 0.0,
            dv0: 0.0,
            u1: 0.0,
            v1: 0.0,
            du1: 0.0,
            dv1: 0.0,
        });
    }
}

/// Default startup radius: small enough that the neglected terms of the
/// leading-order profile stay below 1e-6 lambda.
pub fn default_delta(params: &ProblemParams, nl: &Nonlinearity) -> f64 {
    let q = params.pexp.q();
    let flam = nl.f(params.lambda).abs();
    if flam == 0.0 {
        return 1e-3;
    }
    let d = (1e-6 * params.lambda * q * params.dim.powf(q - 1.0) / flam.powf(q - 1.0)).powf(1.0 / q);
    d.min(1e-3)
}

/// Fixed-point startup on [0, delta].
///
/// Iterates `u -> lambda - int_0^r phi_q( int_0^t (s/t)^(N-1) f(u) ds ) dt`
/// on a uniform grid, seeded with the leading-order profile
/// `u ~ lambda - (1/p') (|f(lambda)|/N)^(q-1) r^q sign f(lambda)`, until
/// successive iterates differ by less than `abs_tol / 10`.
pub fn startup(params: &ProblemParams, nl: &Nonlinearity, delta: f64) -> Result<PhaseState> {
    let grid = startup_grid(params, nl, delta, 128)?;
    let last = *grid.last().unwrap();
    Ok(last)
}

fn startup_grid(
    params: &ProblemParams,
    nl: &Nonlinearity,
    delta: f64,
    n: usize,
) -> Result<Vec<PhaseState>> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Config(format!("startup delta must be positive, got {delta}")));
    }
    let lam = params.lambda;
    let q = params.pexp.q();
    let dimm = params.dim;
    let h = delta / n as f64;
    let rs: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();

    // leading-order seed
    let flam = nl.f(lam);
    let c = if flam == 0.0 {
        0.0
    } else {
        (flam.abs() / dimm).powf(q - 1.0) / q * flam.signum()
    };
    let mut u: Vec<f64> = rs.iter().map(|&r| lam - c * r.powf(q)).collect();

    let tol = params.tol.abs_tol / 10.0;
    let mut inner = vec![0.0; n + 1];
    for iter in 0..100 {
        // inner integral J(t) = int_0^t s^(N-1) f(u) ds, then I = J / t^(N-1)
        let g: Vec<f64> = rs.iter().zip(&u).map(|(&r, &uu)| r.powf(dimm - 1.0) * nl.f(uu)).collect();
        let j = cumulative_uniform(h, &g);
        inner[0] = 0.0;
        for i in 1..=n {
            inner[i] = j[i] / rs[i].powf(dimm - 1.0);
        }
        let k: Vec<f64> = inner.iter().map(|&x| phi(q, x)).collect();
        let outer = cumulative_uniform(h, &k);
        let mut diff: f64 = 0.0;
        for i in 0..=n {
            let next = lam - outer[i];
            diff = diff.max((next - u[i]).abs());
            u[i] = next;
        }
        if diff < tol {
            return Ok(rs
                .iter()
                .zip(&u)
                .zip(&inner)
                .map(|((&r, &uu), &ii)| PhaseState { r, u: uu, v: -ii + 0.0 })
                .collect());
        }
        if iter == 99 {
            break;
        }
    }
    Err(Error::Startup(format!(
        "fixed-point iteration did not contract within 100 sweeps on [0, {delta}] (delta too large?)"
    )))
}

struct Rhs<'a> {
    nl: &'a Nonlinearity,
    q: f64,
    dim: f64,
}

impl Rhs<'_> {
    #[inline]
    fn eval(&self, r: f64, u: f64, v: f64) -> (f64, f64) {
        (phi(self.q, v), -(self.dim - 1.0) / r * v - self.nl.f(u))
    }
}

// Dormand-Prince 5(4) coefficients.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 35.0 / 384.0 - 5179.0 / 57600.0;
const E3: f64 = 500.0 / 1113.0 - 7571.0 / 16695.0;
const E4: f64 = 125.0 / 192.0 - 393.0 / 640.0;
const E5: f64 = -2187.0 / 6784.0 + 92097.0 / 339200.0;
const E6: f64 = 11.0 / 84.0 - 187.0 / 2100.0;
const E7: f64 = -1.0 / 40.0;

struct StepResult {
    u1: f64,
    v1: f64,
    du1: f64,
    dv1: f64,
    err: f64,
}

#[allow(clippy::too_many_arguments)]
fn dopri_step(
    rhs: &Rhs<'_>,
    r: f64,
    u: f64,
    v: f64,
    du: f64,
    dv: f64,
    h: f64,
    tol: &Tolerances,
) -> StepResult {
    let (k1u, k1v) = (du, dv);
    let (k2u, k2v) = rhs.eval(r + 0.2 * h, u + h * A21 * k1u, v + h * A21 * k1v);
    let (k3u, k3v) = rhs.eval(
        r + 0.3 * h,
        u + h * (A31 * k1u + A32 * k2u),
        v + h * (A31 * k1v + A32 * k2v),
    );
    let (k4u, k4v) = rhs.eval(
        r + 0.8 * h,
        u + h * (A41 * k1u + A42 * k2u + A43 * k3u),
        v + h * (A41 * k1v + A42 * k2v + A43 * k3v),
    );
    let (k5u, k5v) = rhs.eval(
        r + 8.0 / 9.0 * h,
        u + h * (A51 * k1u + A52 * k2u + A53 * k3u + A54 * k4u),
        v + h * (A51 * k1v + A52 * k2v + A53 * k3v + A54 * k4v),
    );
    let (k6u, k6v) = rhs.eval(
        r + h,
        u + h * (A61 * k1u + A62 * k2u + A63 * k3u + A64 * k4u + A65 * k5u),
        v + h * (A61 * k1v + A62 * k2v + A63 * k3v + A64 * k4v + A65 * k5v),
    );
    let u1 = u + h * (B1 * k1u + B3 * k3u + B4 * k4u + B5 * k5u + B6 * k6u);
    let v1 = v + h * (B1 * k1v + B3 * k3v + B4 * k4v + B5 * k5v + B6 * k6v);
    let (k7u, k7v) = rhs.eval(r + h, u1, v1);
    let eu = h * (E1 * k1u + E3 * k3u + E4 * k4u + E5 * k5u + E6 * k6u + E7 * k7u);
    let ev = h * (E1 * k1v + E3 * k3v + E4 * k4v + E5 * k5v + E6 * k6v + E7 * k7v);
    let su = tol.abs_tol + tol.rel_tol * u.abs().max(u1.abs());
    let sv = tol.abs_tol + tol.rel_tol * v.abs().max(v1.abs());
    let err = (0.5 * ((eu / su).powi(2) + (ev / sv).powi(2))).sqrt();
    StepResult { u1, v1, du1: k7u, dv1: k7v, err }
}

enum Crossing {
    U,
    V,
    E,
}

/// Integrate one shot.
///
/// Precondition: `params` validated and `nl` hypothesis-checked; `lm` are
/// the landmarks of `nl` (used by the stop conditions).
pub fn integrate(params: &ProblemParams, nl: &Nonlinearity, lm: &Landmarks) -> Result<Trajectory> {
    params.validate()?;
    let pexp = params.pexp;
    let q = pexp.q();
    let tol = params.tol;
    let rhs = Rhs { nl, q, dim: params.dim };
    let e_of = |u: f64, v: f64| big_phi(q, v) + nl.big_f(u);

    let delta = params.delta.unwrap_or_else(|| default_delta(params, nl)).min(params.r_max * 0.5);
    let grid = startup_grid(params, nl, delta, 128)?;

    let mut samples: Vec<Sample> = Vec::new();
    let mut segments: Vec<Segment> = Vec::new();
    let mut events: Vec<Event> = Vec::new();

    // startup grid becomes the first dense segments (every 8th node)
    let stride = 8;
    let mut prev = grid[0];
    let mut prev_d = (0.0, -nl.f(params.lambda) / params.dim);
    samples.push(Sample { r: 0.0, u: prev.u, v: prev.v, e: e_of(prev.u, prev.v) });
    let mut idx = stride;
    while idx <= 128 {
        let s = grid[idx];
        let d = rhs.eval(s.r, s.u, s.v);
        segments.push(Segment {
            r0: prev.r,
            r1: s.r,
            u0: prev.u,
            v0: prev.v,
            du0: prev_d.0,
            dv0: prev_d.1,
            u1: s.u,
            v1: s.v,
            du1: d.0,
            dv1: d.1,
        });
        samples.push(Sample { r: s.r, u: s.u, v: s.v, e: e_of(s.u, s.v) });
        prev = s;
        prev_d = d;
        idx += stride;
    }

    let mut r = prev.r;
    let (mut u, mut v) = (prev.u, prev.v);
    let (mut du, mut dv) = prev_d;
    let mut e_prev = e_of(u, v);

    let diverge_bound = 10.0 * params.lambda.max(lm.big_a);
    let ball_gate = (1e3 * tol.double_zero_tol).max(0.05 * lm.a_plus.min(1.0));
    let mut closest: Option<ClosestApproach> = None;
    let mut energy_crossed = e_prev <= 0.0;
    let mut stop = None;
    // After anchoring a zero of u (or v), the committed start value is
    // rounding noise of either sign; the crossing direction fixes the
    // effective sign so the same event is not detected twice.
    let mut forced_u_sign: Option<f64> = None;
    let mut forced_v_sign: Option<f64> = None;
    // The right-hand side can lose Lipschitz continuity exactly at the
    // anchored points (phi_q(v) at v = 0 for p > 2, f at u = 0 for m < 2),
    // where the embedded error estimate is unreliable. Steps leaving an
    // anchor are therefore forced tiny and re-grown proportionally to the
    // distance from it.
    let mut anchor_escape: Option<(f64, f64)> = None; // (anchor radius, floor)

    let mut h = initial_step(&rhs, r, u, v, du, dv, &tol).min(params.r_max - r);
    let mut steps: u64 = 0;
    const MAX_STEPS: u64 = 50_000_000;

    while stop.is_none() {
        if r >= params.r_max * (1.0 - 1e-15) {
            stop = Some(StopReason::ReachedRmax);
            break;
        }
        steps += 1;
        if steps > MAX_STEPS {
            return Err(Error::Integration {
                r,
                u,
                v,
                message: format!("step budget exceeded ({MAX_STEPS} steps)"),
            });
        }
        h = h.min(params.r_max - r);
        if let Some((ra, floor)) = anchor_escape {
            let cap = floor.max(0.3 * (r - ra));
            if cap < h {
                h = cap;
            } else {
                anchor_escape = None;
            }
        }
        if h < 1e-14 * r.max(1.0) {
            return Err(Error::Integration {
                r,
                u,
                v,
                message: "step size underflow (non-Lipschitz point?)".into(),
            });
        }
        let res = dopri_step(&rhs, r, u, v, du, dv, h, &tol);
        if !res.u1.is_finite() || !res.v1.is_finite() {
            h *= 0.25;
            continue;
        }
        if res.err > 1.0 {
            h *= (0.9 * res.err.powf(-0.2)).max(0.2);
            continue;
        }

        // tentative accepted step on [r, r + h]
        let mut seg = Segment {
            r0: r,
            r1: r + h,
            u0: u,
            v0: v,
            du0: du,
            dv0: dv,
            u1: res.u1,
            v1: res.v1,
            du1: res.du1,
            dv1: res.dv1,
        };
        let mut end_r = r + h;
        let mut end = (res.u1, res.v1, res.du1, res.dv1);
        let mut event: Option<(Crossing, f64)> = None;

        // earliest sign change of u, v, or E over the step
        let e_end = e_of(res.u1, res.v1);
        let u_sign = forced_u_sign.unwrap_or_else(|| u.signum());
        let v_sign = forced_v_sign.unwrap_or_else(|| v.signum());
        let crossings: [(Crossing, bool); 3] = [
            (Crossing::U, u_sign != 0.0 && res.u1 != 0.0 && u_sign != res.u1.signum()),
            (Crossing::V, v_sign != 0.0 && res.v1 != 0.0 && v_sign != res.v1.signum()),
            (
                Crossing::E,
                !energy_crossed && e_prev > 0.0 && e_end < 0.0,
            ),
        ];
        for (kind, hit) in crossings {
            if !hit {
                continue;
            }
            let g = |rr: f64| -> f64 {
                let (uu, vv) = seg.eval(rr);
                match kind {
                    Crossing::U => uu,
                    Crossing::V => vv,
                    Crossing::E => e_of(uu, vv),
                }
            };
            if let Some(rc) = bisect_dense(&g, r, r + h, tol.event_tol) {
                if event.as_ref().map(|(_, re)| rc < *re).unwrap_or(true) {
                    event = Some((kind, rc));
                }
            }
        }

        let mut pending_forced: (Option<f64>, Option<f64>) = (None, None);
        let mut pending_escape: Option<(f64, f64)> = None;
        if let Some((kind, mut rc)) = event {
            // anchor: re-take the step to land exactly on the event radius,
            // then polish with Newton using freshly evaluated states
            for _ in 0..4 {
                if rc <= r + 1e-15 * r.max(1.0) {
                    rc = r + 1e-15 * r.max(1.0);
                    break;
                }
                let res_a = dopri_step(&rhs, r, u, v, du, dv, rc - r, &tol);
                let (ua, va) = (res_a.u1, res_a.v1);
                let (dua, dva) = (res_a.du1, res_a.dv1);
                let (gval, gder) = match kind {
                    Crossing::U => (ua, dua),
                    Crossing::V => (va, dva),
                    Crossing::E => (e_of(ua, va), -(params.dim - 1.0) / rc * big_phi(q, va) * q),
                };
                if gder == 0.0 || !gval.is_finite() {
                    break;
                }
                let shift = gval / gder;
                let next = (rc - shift).clamp(r + 0.25 * (rc - r), r + h);
                if (next - rc).abs() <= tol.event_tol.min(1e-13 * rc.max(1.0)) {
                    rc = next;
                    break;
                }
                rc = next;
            }
            let res_a = dopri_step(&rhs, r, u, v, du, dv, rc - r, &tol);
            seg.r1 = rc;
            seg.u1 = res_a.u1;
            seg.v1 = res_a.v1;
            seg.du1 = res_a.du1;
            seg.dv1 = res_a.dv1;
            end_r = rc;
            end = (res_a.u1, res_a.v1, res_a.du1, res_a.dv1);
            let e_at = e_of(end.0, end.1);
            let uprime = phi(q, end.1);
            // Escape floor: the first step off the anchor carries a
            // fractional-power quadrature error ~ 0.005 s^(2/3) h^(5/3)
            // (s the derivative scale), amplified into the energy by
            // |dE/du| ~ s. The dissipation E' vanishes at critical points,
            // so this error must stay below the energy slack outright;
            // above desk-scale energies the target turns relative.
            let s = 1.0 + end.2.abs() + end.3.abs();
            let target = 0.3 * tol.event_tol * (e_at.abs() / 1e6).max(1.0);
            let floor = 0.5 * (target / (0.005 * s.powf(5.0 / 3.0))).powf(0.6);
            pending_escape = Some((rc, floor.clamp(2e-14 * rc.max(1.0), h)));
            match kind {
                Crossing::U => {
                    let dir = uprime.signum();
                    if dir != 0.0 {
                        pending_forced.0 = Some(dir);
                    }
                    let dist = end.0.abs() + uprime.abs();
                    if dist <= tol.double_zero_tol {
                        events.push(Event {
                            kind: EventKind::DoubleZero,
                            r: rc,
                            u: end.0,
                            v: end.1,
                            e: e_at,
                        });
                        if e_at <= tol.event_tol {
                            stop = Some(StopReason::DoubleZero);
                        }
                    } else {
                        events.push(Event {
                            kind: EventKind::SimpleZero,
                            r: rc,
                            u: end.0,
                            v: end.1,
                            e: e_at,
                        });
                        if events.iter().filter(|e| e.kind == EventKind::SimpleZero).count()
                            > params.max_zeros
                        {
                            return Err(Error::Integration {
                                r: rc,
                                u: end.0,
                                v: end.1,
                                message: format!(
                                    "more than {} sign changes; raise max_zeros if intended",
                                    params.max_zeros
                                ),
                            });
                        }
                    }
                }
                Crossing::V => {
                    let dir = (-(params.dim - 1.0) / rc * end.1 - nl.f(end.0)).signum();
                    if dir != 0.0 {
                        pending_forced.1 = Some(dir);
                    }
                    events.push(Event {
                        kind: EventKind::CriticalPoint,
                        r: rc,
                        u: end.0,
                        v: end.1,
                        e: e_at,
                    });
                }
                Crossing::E => {
                    if !energy_crossed {
                        events.push(Event {
                            kind: EventKind::EnergyZeroCrossing,
                            r: rc,
                            u: end.0,
                            v: end.1,
                            e: e_at,
                        });
                        energy_crossed = true;
                    }
                }
            }
        }

        // closest approach to the phase-plane origin, on the dense segment
        let d0 = u.abs() + phi(q, v).abs();
        let d1 = end.0.abs() + phi(q, end.1).abs();
        if d0 < ball_gate || d1 < ball_gate {
            let dist_at = |rr: f64| -> f64 {
                let (uu, vv) = seg.eval(rr);
                uu.abs() + phi(q, vv).abs()
            };
            let (rm, dm) = scan_min(&dist_at, seg.r0, seg.r1, 33);
            let (um, vm) = seg.eval(rm);
            let em = e_of(um, vm);
            if closest.map(|c| dm < c.dist).unwrap_or(true) {
                closest = Some(ClosestApproach { r: rm, dist: dm, e: em });
            }
            if dm <= tol.double_zero_tol && em <= tol.event_tol && stop.is_none() {
                // anchor a double-zero event at the approach minimum
                let res_m = dopri_step(&rhs, r, u, v, du, dv, rm - r, &tol);
                seg.r1 = rm;
                seg.u1 = res_m.u1;
                seg.v1 = res_m.v1;
                seg.du1 = res_m.du1;
                seg.dv1 = res_m.dv1;
                end_r = rm;
                end = (res_m.u1, res_m.v1, res_m.du1, res_m.dv1);
                events.push(Event {
                    kind: EventKind::DoubleZero,
                    r: rm,
                    u: end.0,
                    v: end.1,
                    e: e_of(end.0, end.1),
                });
                stop = Some(StopReason::DoubleZero);
            }
        }

        // commit the (possibly shortened) step
        let e_new = e_of(end.0, end.1);
        segments.push(seg);
        samples.push(Sample { r: end_r, u: end.0, v: end.1, e: e_new });
        r = end_r;
        u = end.0;
        v = end.1;
        du = end.2;
        dv = end.3;
        e_prev = e_new;
        forced_u_sign = pending_forced.0;
        forced_v_sign = pending_forced.1;
        if pending_escape.is_some() {
            anchor_escape = pending_escape;
        }

        if stop.is_none() {
            if u.abs() > diverge_bound {
                stop = Some(StopReason::Diverged);
            } else if params.stop_on_trapped
                && e_new < -tol.energy_margin()
                && u.abs() < lm.a_plus
            {
                stop = Some(StopReason::EnergyTrapped);
            }
        }

        // step-size update (also after anchored shortening)
        let grow = if res.err > 0.0 { (0.9 * res.err.powf(-0.2)).clamp(0.2, 5.0) } else { 5.0 };
        h = (h * grow).min(params.r_max);
    }

    Ok(Trajectory {
        params: *params,
        samples,
        segments,
        events,
        stop_reason: stop.unwrap_or(StopReason::ReachedRmax),
        closest_approach: closest,
    })
}

fn initial_step(rhs: &Rhs<'_>, r: f64, u: f64, v: f64, du: f64, dv: f64, tol: &Tolerances) -> f64 {
    let scale = (u.abs() + 1.0) / (du.abs() + dv.abs() + 1.0);
    let h0 = (0.01 * scale).clamp(1e-10, 0.1);
    // one trial step to sanity-check the guess
    let res = dopri_step(rhs, r, u, v, du, dv, h0, tol);
    if res.err > 1.0 {
        h0 * (0.9 * res.err.powf(-0.2)).max(0.05)
    } else {
        h0
    }
}

/// Bisect g on [lo, hi] assuming a sign change; returns the crossing
/// radius to absolute accuracy `tol` in r.
fn bisect_dense<G: Fn(f64) -> f64>(g: &G, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut glo = g(lo);
    let ghi = g(hi);
    if glo == 0.0 {
        return Some(lo);
    }
    if ghi == 0.0 {
        return Some(hi);
    }
    if glo.signum() == ghi.signum() {
        return None;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol {
            return Some(mid);
        }
        let gm = g(mid);
        if gm == 0.0 {
            return Some(mid);
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Coarse scan plus golden refinement of a scalar function's minimum.
fn scan_min<G: Fn(f64) -> f64>(g: &G, lo: f64, hi: f64, n: usize) -> (f64, f64) {
    let mut best = (lo, g(lo));
    for i in 1..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let v = g(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    let span = (hi - lo) / n as f64;
    let (a, b) = ((best.0 - span).max(lo), (best.0 + span).min(hi));
    let (x, v) = crate::num::roots::golden_min(g, a, b);
    if v < best.1 {
        (x, v)
    } else {
        best
    }
}

/// Left side and right side of the dissipation identity
/// `E(delta) - E(r_end) = int (N-1) |u'|^p / s ds`, the integral taken with
/// a fixed panel rule on the dense output.
pub fn dissipation_identity(traj: &Trajectory, nl: &Nonlinearity) -> (f64, f64) {
    let pexp = traj.params.pexp;
    let q = pexp.q();
    let dim = traj.params.dim;
    let samples: Vec<Sample> = traj.samples.clone();
    if samples.len() < 2 {
        return (0.0, 0.0);
    }
    let first = samples.iter().find(|s| s.r > 0.0).copied().unwrap_or(samples[0]);
    let last = *samples.last().unwrap();
    let lhs = first.e - last.e;
    let mut rhs = 0.0;
    let integrand = |rr: f64| -> f64 {
        let st = traj.eval(rr).unwrap();
        (dim - 1.0) * big_phi(q, st.v) * q / rr
    };
    let mut prev_r = first.r;
    for s in samples.iter().skip_while(|s| s.r <= first.r) {
        if s.r <= prev_r {
            continue;
        }
        rhs += crate::num::quad::gl10().integrate(integrand, prev_r, s.r);
        prev_r = s.r;
    }
    let _ = nl;
    (lhs, rhs)
}
