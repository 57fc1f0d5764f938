//! The nonlinearity f, its primitive F, hypothesis checks, and the derived
//! landmark constants.
//!
//! The built-in family is the two-power nonlinearity
//! `f(u) = |u|^(s-2) u - |u|^(m-2) u` with `1 < m < p < s < N p / (N - p)`,
//! which satisfies every structural hypothesis the shooting argument needs.
//! Arbitrary nonlinearities enter through a tabulated `(u, f)` CSV with
//! monotone-cubic interpolation; hypothesis checks on tables are
//! best-effort grid checks because the growth conditions involve limits.

use std::io::BufRead;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::interp::CubicHermite;
use crate::num::roots::{bisect, golden_min};
use crate::num::{big_phi, phi};

#[derive(Debug, Clone)]
enum Family {
    /// `f(u) = |u|^(s-2) u - |u|^(m-2) u`, `F(u) = |u|^s / s - |u|^m / m`.
    TwoPower { m: f64, s: f64 },
    /// Monotone-cubic interpolant of tabulated (u, f) samples; F is the
    /// exact integral of the interpolant anchored at F(0) = 0. The
    /// per-knot cumulative is accumulated outward from u = 0 so that F
    /// stays cancellation-free near the origin, where the barrier
    /// quadrature needs its sign.
    Table {
        f: CubicHermite,
        /// integral of the interpolant from 0 to each knot
        cum_from_zero: Vec<f64>,
        /// estimated growth exponent of |F| near 0 (the integrability exponent)
        zero_exponent: f64,
    },
}

/// A nonlinearity together with its primitive.
#[derive(Debug, Clone)]
pub struct Nonlinearity {
    family: Family,
}

impl Nonlinearity {
    /// Evaluate f.
    pub fn f(&self, u: f64) -> f64 {
        match &self.family {
            Family::TwoPower { m, s } => phi(*s, u) - phi(*m, u),
            Family::Table { f, .. } => f.eval(u),
        }
    }

    /// Evaluate the primitive `F(u) = int_0^u f`.
    pub fn big_f(&self, u: f64) -> f64 {
        match &self.family {
            Family::TwoPower { m, s } => big_phi(*s, u) - big_phi(*m, u),
            Family::Table { f, cum_from_zero, .. } => {
                let u = u.clamp(f.x_min(), f.x_max());
                let i = f.segment(u);
                let (x0, x1) = (f.knot(i), f.knot(i + 1));
                // anchor the in-segment partial at the knot nearer the
                // origin, so |F| stays cancellation-free down to u -> 0
                if x1.abs() < x0.abs() {
                    cum_from_zero[i + 1] - f.integral_within_segment(i, u, x1)
                } else {
                    cum_from_zero[i] + f.integral_within_segment(i, x0, u)
                }
            }
        }
    }

    /// Exponents (m, s) when this is the built-in power family.
    pub fn power_exponents(&self) -> Option<(f64, f64)> {
        match &self.family {
            Family::TwoPower { m, s } => Some((*m, *s)),
            Family::Table { .. } => None,
        }
    }

    /// Growth exponent of |F| near u = 0, used for singular quadrature
    /// substitutions and the integrability check.
    pub fn zero_exponent(&self) -> f64 {
        match &self.family {
            Family::TwoPower { m, .. } => *m,
            Family::Table { zero_exponent, .. } => *zero_exponent,
        }
    }

    /// Largest |u| at which the nonlinearity can be evaluated faithfully.
    pub fn eval_range(&self) -> f64 {
        match &self.family {
            Family::TwoPower { .. } => 1e12,
            Family::Table { f, .. } => f.x_max().min(-f.x_min()),
        }
    }

    /// Smallest |u| scale the representation resolves; below it |F| is
    /// noise-dominated. Zero for closed-form families.
    pub fn zero_resolution(&self) -> f64 {
        match &self.family {
            Family::TwoPower { .. } => 0.0,
            Family::Table { f, .. } => {
                let z = f.segment(0.0);
                let mut scale = f.knot(z + 1) - f.knot(z);
                if z > 0 {
                    scale = scale.max(f.knot(z) - f.knot(z - 1));
                }
                if z + 2 <= f.segment_count() {
                    scale = scale.max(f.knot(z + 2) - f.knot(z + 1));
                }
                scale
            }
        }
    }

    /// The sign-reflected nonlinearity `f~(u) = -f(-u)`, whose primitive is
    /// `F~(u) = F(-u)`.
    pub fn reflected(&self) -> ReflectedNonlinearity<'_> {
        ReflectedNonlinearity { inner: self }
    }

    /// Parse a tabulated nonlinearity from two-column CSV `u,f`.
    ///
    /// A header row is required, `u` must be strictly increasing, and the
    /// table must span 0 so that `F(0) = 0` can be anchored.
    pub fn from_table_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("empty nonlinearity table".into()))??;
        if header.split(',').next().unwrap_or("").trim().parse::<f64>().is_ok() {
            return Err(Error::Config("nonlinearity table must start with a header row".into()));
        }
        let mut us = Vec::new();
        let mut fs = Vec::new();
        for (idx, line) in lines.enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let mut cols = trimmed.split(',');
            let u: f64 = cols
                .next()
                .and_then(|c| c.trim().parse().ok())
                .ok_or_else(|| Error::Config(format!("table row {}: bad u column", idx + 2)))?;
            let f: f64 = cols
                .next()
                .and_then(|c| c.trim().parse().ok())
                .ok_or_else(|| Error::Config(format!("table row {}: bad f column", idx + 2)))?;
            if !u.is_finite() || !f.is_finite() {
                return Err(Error::Config(format!("table row {}: non-finite entry", idx + 2)));
            }
            if let Some(&last) = us.last() {
                if u <= last {
                    return Err(Error::Config(format!(
                        "table row {}: u must be strictly increasing",
                        idx + 2
                    )));
                }
            }
            us.push(u);
            fs.push(f);
        }
        if us.len() < 4 {
            return Err(Error::Config("nonlinearity table needs at least 4 rows".into()));
        }
        if us[0] > 0.0 || *us.last().unwrap() < 0.0 {
            return Err(Error::Config("nonlinearity table must span u = 0".into()));
        }
        let interp = CubicHermite::pchip(us, fs)?;
        let cum_from_zero = zero_anchored_cumulative(&interp);
        let mut nl = Nonlinearity {
            family: Family::Table { f: interp, cum_from_zero, zero_exponent: 2.0 },
        };
        let est = estimate_zero_exponent(&nl);
        if let Family::Table { zero_exponent, .. } = &mut nl.family {
            *zero_exponent = est;
        }
        Ok(nl)
    }
}

/// View of `-f(-u)` borrowed from a nonlinearity.
pub struct ReflectedNonlinearity<'a> {
    inner: &'a Nonlinearity,
}

impl ReflectedNonlinearity<'_> {
    pub fn f(&self, u: f64) -> f64 {
        -self.inner.f(-u)
    }

    pub fn big_f(&self, u: f64) -> f64 {
        self.inner.big_f(-u)
    }
}

/// Integral of the interpolant from 0 to each knot, accumulated outward
/// from the zero-containing segment so values near 0 carry no
/// cancellation error.
fn zero_anchored_cumulative(f: &CubicHermite) -> Vec<f64> {
    let n = f.segment_count();
    let z = f.segment(0.0);
    let mut cum = vec![0.0; n + 1];
    cum[z] = -f.integral_within_segment(z, f.knot(z), 0.0);
    for i in z..n {
        cum[i + 1] = cum[i] + f.integral_within_segment(i, f.knot(i), f.knot(i + 1));
    }
    for i in (0..z).rev() {
        cum[i] = cum[i + 1] - f.integral_within_segment(i, f.knot(i), f.knot(i + 1));
    }
    cum
}

fn estimate_zero_exponent(nl: &Nonlinearity) -> f64 {
    let scale = nl.eval_range();
    let u1 = 1e-3 * scale;
    let u2 = 1e-4 * scale;
    let big = |u: f64| nl.big_f(u).abs().max(1e-300);
    let est = (big(u1) / big(u2)).ln() / (u1 / u2).ln();
    if est.is_finite() && est > 1.0 {
        est
    } else {
        2.0
    }
}

/// Build the two-power family, validating the exponent ordering
/// `1 < m < p < s < N p / (N - p)` and `N > p`.
pub fn make_power_family(m: f64, s: f64, p: f64, dim: f64) -> Result<Nonlinearity> {
    for (name, v) in [("m", m), ("s", s), ("p", p), ("N", dim)] {
        if !v.is_finite() {
            return Err(Error::Config(format!("exponent {name} must be finite")));
        }
    }
    if !(dim > p) {
        return Err(Error::Config(format!("need N > p, got N = {dim}, p = {p}")));
    }
    if !(m > 1.0) {
        return Err(Error::Config(format!("need m > 1, got m = {m}")));
    }
    if !(m < p) {
        return Err(Error::Config(format!("need m < p, got m = {m}, p = {p}")));
    }
    if !(p < s) {
        return Err(Error::Config(format!("need p < s, got p = {p}, s = {s}")));
    }
    let p_star = dim * p / (dim - p);
    if !(s < p_star) {
        return Err(Error::Config(format!(
            "need s < Np/(N-p) = {p_star}, got s = {s} (supercritical)"
        )));
    }
    Ok(Nonlinearity { family: Family::TwoPower { m, s } })
}

/// Characteristic constants of a nonlinearity.
///
/// `a_plus`/`b_minus` are the extreme nonzero zeros of f; `a`/`b` bound the
/// interval where f decreases strictly; `big_a`/`big_b` are the nonzero
/// zeros of F; `f_bar = -min F > 0`; `p_star` is the critical exponent
/// `N p / (N - p)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Landmarks {
    pub a_plus: f64,
    pub b_minus: f64,
    pub a: f64,
    pub b: f64,
    pub big_a: f64,
    pub big_b: f64,
    pub f_bar: f64,
    pub p_star: f64,
}

const LANDMARK_CAP: f64 = 1e9;

/// Locate the landmark constants by bracketed root solves and
/// minimization, to ~1e-10 relative accuracy.
pub fn landmarks(nl: &Nonlinearity, p: f64, dim: f64) -> Result<Landmarks> {
    let cap = LANDMARK_CAP.min(nl.eval_range());
    let a_plus = largest_zero(|u| nl.f(u), cap)?;
    let b_minus = -largest_zero(|u| -nl.f(-u), cap)?;

    // F is strictly increasing past a_plus (f > 0 there) and F(a_plus) < 0.
    let big_a = {
        let lo = a_plus;
        let mut hi = a_plus * 1.5;
        while nl.big_f(hi) <= 0.0 {
            hi *= 1.5;
            if hi > cap {
                return Err(Error::Landmark("no positive zero of F below the search cap".into()));
            }
        }
        bisect(|u| nl.big_f(u), lo, hi, 1e-12, 1e-300)?
    };
    let big_b = {
        let lo = -b_minus;
        let mut hi = -b_minus * 1.5;
        while nl.big_f(-hi) <= 0.0 {
            hi *= 1.5;
            if hi > cap {
                return Err(Error::Landmark("no negative zero of F below the search cap".into()));
            }
        }
        -bisect(|u| nl.big_f(-u), lo, hi, 1e-12, 1e-300)?
    };

    // f decreases from 0 down to its local minimum at a > 0 (resp. up to
    // the local maximum at b < 0).
    let (a, _) = golden_min(|u| nl.f(u), 0.0, a_plus);
    let (b_pos, _) = golden_min(|u| -nl.f(-u), 0.0, -b_minus);
    let b = -b_pos;

    // -F attains its maximum inside [B, A]; scan then refine.
    let f_bar = {
        let n = 2048;
        let mut best = (0usize, f64::INFINITY);
        for i in 0..=n {
            let u = big_b + (big_a - big_b) * i as f64 / n as f64;
            let v = nl.big_f(u);
            if v < best.1 {
                best = (i, v);
            }
        }
        let lo = big_b + (big_a - big_b) * best.0.saturating_sub(1) as f64 / n as f64;
        let hi = big_b + (big_a - big_b) * (best.0 + 1).min(n) as f64 / n as f64;
        let (_, fmin) = golden_min(|u| nl.big_f(u), lo, hi);
        -fmin
    };
    if !(f_bar > 0.0) {
        return Err(Error::Landmark("F has no negative well between its zeros".into()));
    }

    Ok(Landmarks {
        a_plus,
        b_minus,
        a,
        b,
        big_a,
        big_b,
        f_bar,
        p_star: dim * p / (dim - p),
    })
}

/// Largest positive zero of g: expand until g stays positive, then walk
/// down to the last sign change.
fn largest_zero<G: Fn(f64) -> f64>(g: G, cap: f64) -> Result<f64> {
    let mut hi = 1.0;
    while g(hi) <= 0.0 {
        hi *= 2.0;
        if hi > cap {
            return Err(Error::Landmark("no positive zero: g never becomes positive".into()));
        }
    }
    let mut lo = hi / 1.05;
    while g(lo) > 0.0 {
        lo /= 1.05;
        if lo < 1e-14 {
            return Err(Error::Landmark("no positive zero: g positive down to 0".into()));
        }
    }
    bisect(g, lo, lo * 1.05, 1e-12, 1e-300)
}

/// One hypothesis check with its computed witness.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisCheck {
    pub name: &'static str,
    pub pass: bool,
    pub witness: f64,
    pub detail: String,
}

/// Pass/fail report over the structural hypotheses H1-H6.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Grid checks of the structural hypotheses H1-H6.
///
/// H1: continuity and f(0) = 0. H2: strict decrease on (b, a).
/// H3: `|F|^(-1/p)` integrable near 0 (exponent test), plus the analogous
/// test at every interior local maximum of F. H4: F < 0 at nonzero zeros
/// of f. H5: f eventually nondecreasing with `f/phi_p(u) -> infinity`,
/// checked as "the ratio is increasing and exceeds 1e3 before u = 1e6".
/// H6: `liminf F(theta u)/(u f(u)) > (N-p)/(Np)`.
pub fn verify_hypotheses(
    nl: &Nonlinearity,
    p: f64,
    dim: f64,
    theta_growth: f64,
) -> Result<HypothesisReport> {
    if !(theta_growth > 0.0 && theta_growth < 1.0) {
        return Err(Error::Config(format!(
            "theta_growth must lie in (0, 1), got {theta_growth}"
        )));
    }
    let lm = landmarks(nl, p, dim)?;
    let mut checks = Vec::new();

    // H1: f(0) = 0 and finite values on a grid.
    {
        let f0 = nl.f(0.0).abs();
        let mut finite = true;
        for i in -400..=400i32 {
            let u = f64::from(i) / 100.0 * lm.big_a;
            finite &= nl.f(u).is_finite();
        }
        checks.push(HypothesisCheck {
            name: "H1",
            pass: f0 <= 1e-12 && finite,
            witness: f0,
            detail: "f(0) = 0 and f finite on the sampled range".into(),
        });
    }

    // H2: strict decrease on (b, a).
    {
        let n = 512;
        let lo = lm.b * 0.999;
        let hi = lm.a * 0.999;
        let mut worst = f64::NEG_INFINITY;
        let mut prev = nl.f(lo);
        for i in 1..=n {
            let u = lo + (hi - lo) * i as f64 / n as f64;
            let cur = nl.f(u);
            worst = worst.max(cur - prev);
            prev = cur;
        }
        checks.push(HypothesisCheck {
            name: "H2",
            pass: worst < 0.0,
            witness: worst,
            detail: format!("max forward difference of f on ({:.6}, {:.6})", lm.b, lm.a),
        });
    }

    // H3: growth exponent alpha of |F| near 0 must satisfy alpha < p,
    // and similarly around every interior local maximum of F.
    {
        let alpha = nl.zero_exponent();
        let mut pass = alpha < p;
        let mut detail = format!("|F(u)| ~ |u|^{alpha:.4} near 0; integrable iff exponent < p");
        for u0 in interior_f_maxima(nl, &lm) {
            let alpha0 = local_max_exponent(nl, u0);
            if alpha0 >= p {
                pass = false;
            }
            detail.push_str(&format!("; local max of F at {u0:.4}: exponent {alpha0:.3}"));
        }
        checks.push(HypothesisCheck { name: "H3", pass, witness: alpha, detail });
    }

    // H4: F < 0 at every nonzero zero of f.
    {
        let mut worst = f64::NEG_INFINITY;
        for u0 in nonzero_f_zeros(nl, &lm) {
            worst = worst.max(nl.big_f(u0));
        }
        checks.push(HypothesisCheck {
            name: "H4",
            pass: worst < 0.0,
            witness: worst,
            detail: "max of F over the nonzero zeros of f".into(),
        });
    }

    // H5 proxy: ratio f/phi_p increasing on a geometric grid and > 1e3
    // before u_max; f itself nondecreasing there.
    {
        let u_max = 1e6f64.min(nl.eval_range());
        let mut pass = true;
        let mut ratio_end = f64::INFINITY;
        for sign in [1.0, -1.0] {
            let mut u = lm.a_plus.max(-lm.b_minus) * 1.01;
            let mut prev_ratio = f64::NEG_INFINITY;
            let mut prev_f = f64::NEG_INFINITY;
            let mut reached = f64::NEG_INFINITY;
            while u <= u_max {
                let x = sign * u;
                let ratio = nl.f(x) / phi(p, x);
                let fv = sign * nl.f(x);
                if ratio < prev_ratio || fv < prev_f {
                    pass = false;
                }
                prev_ratio = ratio;
                prev_f = fv;
                reached = ratio;
                u *= 1.1;
            }
            ratio_end = ratio_end.min(reached);
        }
        if ratio_end < 1e3 {
            pass = false;
        }
        checks.push(HypothesisCheck {
            name: "H5",
            pass,
            witness: ratio_end,
            detail: format!("f/phi_p at u = {u_max:.1e} (must be increasing and exceed 1e3)"),
        });
    }

    // H6: liminf F(theta u)/(u f(u)) vs (N - p)/(N p).
    {
        let threshold = (dim - p) / (dim * p);
        let value = match nl.power_exponents() {
            Some((_, s)) => theta_growth.powf(s) / s,
            None => {
                // liminf proxy: sample the farthest available part of the
                // table only (the ratio approaches its limit from below)
                let u_max = nl.eval_range() * 0.99;
                let u_lo = (lm.big_a.max(-lm.big_b) * 4.0).max(0.5 * u_max);
                let mut worst = f64::INFINITY;
                for sign in [1.0, -1.0] {
                    let mut u = u_lo;
                    while u <= u_max {
                        let x = sign * u;
                        worst = worst.min(nl.big_f(theta_growth * x) / (x * nl.f(x)));
                        u *= 1.05;
                    }
                }
                worst
            }
        };
        checks.push(HypothesisCheck {
            name: "H6",
            pass: value > threshold,
            witness: value,
            detail: format!("liminf F(theta u)/(u f(u)) = {value:.6} vs (N-p)/(Np) = {threshold:.6}"),
        });
    }

    Ok(HypothesisReport { checks })
}

/// Nonzero zeros of f located by sign scan on each side of the origin.
pub fn nonzero_f_zeros(nl: &Nonlinearity, lm: &Landmarks) -> Vec<f64> {
    let mut zeros = Vec::new();
    for sign in [1.0, -1.0] {
        let hi = if sign > 0.0 { lm.big_a * 1.5 } else { -lm.big_b * 1.5 };
        let n = 4000;
        let mut prev_u = 1e-9 * hi;
        let mut prev_f = nl.f(sign * prev_u);
        for i in 1..=n {
            let u = hi * i as f64 / n as f64;
            let fv = nl.f(sign * u);
            if prev_f != 0.0 && fv != 0.0 && prev_f.signum() != fv.signum() {
                if let Ok(z) = bisect(|x| nl.f(sign * x), prev_u, u, 1e-12, 1e-300) {
                    zeros.push(sign * z);
                }
            }
            prev_u = u;
            prev_f = fv;
        }
    }
    zeros.sort_by(|a, b| a.partial_cmp(b).unwrap());
    zeros
}

/// Interior local maxima of F: zeros of f where f crosses from + to -.
pub fn interior_f_maxima(nl: &Nonlinearity, lm: &Landmarks) -> Vec<f64> {
    nonzero_f_zeros(nl, lm)
        .into_iter()
        .filter(|&z| {
            let h = 1e-6 * z.abs().max(1.0);
            nl.f(z - h) > 0.0 && nl.f(z + h) < 0.0
        })
        .collect()
}

fn local_max_exponent(nl: &Nonlinearity, u0: f64) -> f64 {
    let f0 = nl.big_f(u0);
    let scale = u0.abs().max(1.0);
    let d = |h: f64| (f0 - nl.big_f(u0 + h)).abs().max(1e-300);
    (d(1e-3 * scale) / d(1e-4 * scale)).ln() / 10f64.ln()
}

/// Constants certifying the angular-velocity lower bound.
///
/// Given `omega` in (0, 1/8), `s0` is chosen so that
/// `|f(s)| >= 4 omega |s|^(p-1)` for all `|s| >= s0`; then for
/// `r >= r0 = 2(N-1) / (omega (p-1)^(1/q))` and `rho >= sigma0^p` the phase
/// angle satisfies `theta' < -omega`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RotationCertificate {
    pub omega: f64,
    pub s0: f64,
    pub r0: f64,
    pub sigma0: f64,
}

/// Compute the rotation certificate for a given `omega` in (0, 1/8).
///
/// `s0` is the refined largest failure point of the defining inequality,
/// padded by a 1.05 grid-safety factor; `sup |f|` over [-s0, s0] comes from
/// grid maximization.
pub fn rotation_constants(
    nl: &Nonlinearity,
    p: f64,
    dim: f64,
    omega: f64,
) -> Result<RotationCertificate> {
    if !(omega > 0.0 && omega < 0.125) {
        return Err(Error::Config(format!("omega must lie in (0, 1/8), got {omega}")));
    }
    let q = p / (p - 1.0);
    let cap = 1e8f64.min(nl.eval_range());

    let gap = |s: f64, sign: f64| nl.f(sign * s).abs() - 4.0 * omega * s.powf(p - 1.0);
    let mut root: f64 = 0.0;
    for sign in [1.0, -1.0] {
        let mut s = 1e-6;
        let mut last_bad: Option<(f64, f64)> = None;
        while s <= cap {
            let next = s * 1.02;
            if gap(s, sign) < 0.0 {
                last_bad = Some((s, next));
            }
            s = next;
        }
        if let Some((bad, good)) = last_bad {
            if gap(good, sign) < 0.0 {
                return Err(Error::Hypothesis(format!(
                    "|f| >= 4 omega |s|^(p-1) still fails at the cap {cap:e} (growth too slow)"
                )));
            }
            let r = bisect(|x| gap(x, sign), bad, good, 1e-12, 1e-300)?;
            root = root.max(r);
        }
    }
    let s0 = root.max(1e-6) * 1.05;

    // sup |f| on [-s0, s0] by grid scan plus golden refinement.
    let n = 4096;
    let mut best = (0usize, 0.0f64);
    for i in 0..=n {
        let u = -s0 + 2.0 * s0 * i as f64 / n as f64;
        let v = nl.f(u).abs();
        if v > best.1 {
            best = (i, v);
        }
    }
    let lo = -s0 + 2.0 * s0 * best.0.saturating_sub(1) as f64 / n as f64;
    let hi = -s0 + 2.0 * s0 * (best.0 + 1).min(n) as f64 / n as f64;
    let (_, neg_max) = golden_min(|u| -nl.f(u).abs(), lo, hi);
    let sup_f = -neg_max;

    let r0 = 2.0 * (dim - 1.0) / (omega * (p - 1.0).powf(1.0 / q));
    let sigma0 = (2f64.powf(1.0 / p) * s0).max((4.0 * sup_f).powf(1.0 / (p - 1.0)));
    Ok(RotationCertificate { omega, s0, r0, sigma0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> Nonlinearity {
        make_power_family(1.5, 4.0, 2.0, 3.0).unwrap()
    }

    #[test]
    fn power_family_validation_names_inequality() {
        let e = make_power_family(2.5, 4.0, 2.0, 3.0).unwrap_err();
        assert!(e.to_string().contains("m < p"), "{e}");
        let e = make_power_family(1.5, 16.0, 2.0, 3.0).unwrap_err();
        assert!(e.to_string().contains("Np/(N-p)"), "{e}");
        let e = make_power_family(1.5, 4.0, 2.0, 1.5).unwrap_err();
        assert!(e.to_string().contains("N > p"), "{e}");
        // p* = 15 for (p, N) = (2.5, 3): s = 4 is admissible
        assert!(make_power_family(2.0, 4.0, 2.5, 3.0).is_ok());
    }

    #[test]
    fn power_family_point_values() {
        let nl = reference();
        assert!(nl.f(1.0).abs() < 1e-15);
        // F(1) = 1/4 - 2/3 = -5/12
        assert!((nl.big_f(1.0) + 5.0 / 12.0).abs() < 1e-15);
        assert_eq!(nl.big_f(0.0), 0.0);
    }

    #[test]
    fn landmarks_match_closed_forms() {
        let nl = reference();
        let lm = landmarks(&nl, 2.0, 3.0).unwrap();
        assert!((lm.a_plus - 1.0).abs() < 1e-9);
        assert!((lm.b_minus + 1.0).abs() < 1e-9);
        let big_a = (4.0f64 / 1.5).powf(1.0 / 2.5);
        assert!((lm.big_a - big_a).abs() < 1e-9 * big_a, "{} vs {}", lm.big_a, big_a);
        assert!((lm.big_b + big_a).abs() < 1e-9 * big_a);
        assert!((lm.f_bar - 5.0 / 12.0).abs() < 1e-10);
        let a = (0.5f64 / 3.0).powf(1.0 / 2.5);
        assert!((lm.a - a).abs() < 1e-6, "{} vs {}", lm.a, a);
        assert!((lm.b + a).abs() < 1e-6);
        assert!((lm.p_star - 6.0).abs() < 1e-12);
    }

    #[test]
    fn big_f_negative_between_zeros() {
        let nl = reference();
        let lm = landmarks(&nl, 2.0, 3.0).unwrap();
        for i in 1..100 {
            let u = lm.big_b + (lm.big_a - lm.big_b) * i as f64 / 100.0;
            if u.abs() > 1e-6 {
                assert!(nl.big_f(u) < 0.0, "F({u}) = {}", nl.big_f(u));
            }
        }
    }

    #[test]
    fn hypotheses_reference_instance() {
        let nl = reference();
        let rep = verify_hypotheses(&nl, 2.0, 3.0, 0.904).unwrap();
        assert!(rep.all_pass(), "{:?}", rep.checks);
        // theta^s / s at theta = 0.904 is just above 1/6
        let h6 = rep.get("H6").unwrap();
        assert!((h6.witness - 0.904f64.powi(4) / 4.0).abs() < 1e-12);
        assert!(h6.witness > 1.0 / 6.0);
    }

    #[test]
    fn h6_fails_for_small_theta() {
        let nl = reference();
        let rep = verify_hypotheses(&nl, 2.0, 3.0, 0.5).unwrap();
        let h6 = rep.get("H6").unwrap();
        assert!(!h6.pass);
        assert!((h6.witness - 0.5f64.powi(4) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn h3_fails_when_m_exceeds_p() {
        // (m, s, p, N) = (2.5, 4, 3, 5) is a valid family, but checked
        // against p = 2 the integrability exponent m = 2.5 > p fails.
        let nl = make_power_family(2.5, 4.0, 3.0, 5.0).unwrap();
        let rep = verify_hypotheses(&nl, 2.0, 5.0, 0.9).unwrap();
        assert!(!rep.get("H3").unwrap().pass);
    }

    #[test]
    fn rotation_certificate_reference() {
        let nl = reference();
        let cert = rotation_constants(&nl, 2.0, 3.0, 1.0 / 16.0).unwrap();
        assert!((cert.r0 - 64.0).abs() < 1e-12);
        // defining inequality on a 1000-point log grid above s0
        for i in 0..1000 {
            let s = cert.s0 * 10f64.powf(3.0 * i as f64 / 999.0);
            assert!(nl.f(s).abs() >= 4.0 * cert.omega * s, "fails at {s}");
            assert!(nl.f(-s).abs() >= 4.0 * cert.omega * s, "fails at -{s}");
        }
        // just below the unpadded root the inequality fails
        let s_bad = cert.s0 / 1.05 * 0.999;
        assert!(nl.f(s_bad).abs() < 4.0 * cert.omega * s_bad);
        // sigma0 honors its defining maximum
        let sup: f64 = (0..=4000)
            .map(|i| nl.f(-cert.s0 + 2.0 * cert.s0 * i as f64 / 4000.0).abs())
            .fold(0.0, f64::max);
        assert!(cert.sigma0 >= 2f64.sqrt() * cert.s0 - 1e-12);
        assert!(cert.sigma0 >= 4.0 * sup - 1e-9);
    }

    #[test]
    fn rotation_rejects_large_omega() {
        let nl = reference();
        assert!(rotation_constants(&nl, 2.0, 3.0, 0.2).is_err());
    }

    #[test]
    fn finite_difference_derivative_of_big_f() {
        let nl = reference();
        let lm = landmarks(&nl, 2.0, 3.0).unwrap();
        // deterministic pseudo-random points in [-2A, 2A] avoiding (-eps, eps)
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let mut u = (next() * 4.0 - 2.0) * lm.big_a;
            if u.abs() < 0.05 {
                u += 0.1f64.copysign(u + 1e-30);
            }
            let h = 1e-6 * u.abs().max(1.0);
            let fd = (nl.big_f(u + h) - nl.big_f(u - h)) / (2.0 * h);
            assert!((fd - nl.f(u)).abs() < 1e-6 * nl.f(u).abs().max(1.0), "at {u}");
        }
    }

    #[test]
    fn tabulated_matches_power_family() {
        let nl = reference();
        let mut csv = String::from("u,f\n");
        let n = 6000;
        for i in 0..=n {
            let u = -3.0 + 6.0 * i as f64 / n as f64;
            csv.push_str(&format!("{},{}\n", u, nl.f(u)));
        }
        let tab = Nonlinearity::from_table_csv(csv.as_bytes()).unwrap();
        for &u in &[-2.5, -1.0, -0.3, 0.4, 1.0, 2.2] {
            assert!((tab.f(u) - nl.f(u)).abs() < 2e-5, "f at {u}");
            assert!((tab.big_f(u) - nl.big_f(u)).abs() < 2e-5, "F at {u}");
        }
        let lm = landmarks(&tab, 2.0, 3.0).unwrap();
        assert!((lm.a_plus - 1.0).abs() < 1e-4);
        assert!((lm.big_a - (4.0f64 / 1.5).powf(0.4)).abs() < 1e-4);
    }

    #[test]
    fn tabulated_rejects_bad_input() {
        // missing header
        assert!(Nonlinearity::from_table_csv("1,2\n3,4\n5,6\n7,8\n".as_bytes()).is_err());
        // non-increasing u
        assert!(Nonlinearity::from_table_csv("u,f\n-1,2\n-1,3\n2,4\n3,5\n".as_bytes()).is_err());
        // does not span zero
        assert!(Nonlinearity::from_table_csv("u,f\n1,2\n2,3\n3,4\n4,5\n".as_bytes()).is_err());
    }
}
