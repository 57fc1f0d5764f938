//! Independent oracles shared by the integration test suites.
//!
//! Everything here is deliberately written against the raw equations with
//! its own arithmetic (classical fixed-step RK4), not against the library
//! integration path it cross-checks.

/// Odd power map, local copy so the oracles share nothing with the crate.
pub fn phi(p: f64, s: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s.abs().powf(p - 1.0).copysign(s)
    }
}

/// Half period of the auxiliary oscillator `x' = -phi_q(y), y' = phi_p(x)`
/// from (1, 0), timed to the first zero of x by fixed-step RK4 with a
/// secant endpoint. Accurate to ~1e-13 at h = 1e-6.
pub fn half_period_ode_oracle(p: f64, h: f64) -> f64 {
    let q = p / (p - 1.0);
    let f = |x: f64, y: f64| (-phi(q, y), phi(p, x));
    let (mut x, mut y) = (1.0f64, 0.0f64);
    let mut steps: u64 = 0;
    loop {
        let (k1x, k1y) = f(x, y);
        let (k2x, k2y) = f(x + 0.5 * h * k1x, y + 0.5 * h * k1y);
        let (k3x, k3y) = f(x + 0.5 * h * k2x, y + 0.5 * h * k2y);
        let (k4x, k4y) = f(x + h * k3x, y + h * k3y);
        let xn = x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        let yn = y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        if xn <= 0.0 {
            // x is locally linear at the crossing (x'' vanishes with x)
            let quarter = steps as f64 * h + x / (x - xn) * h;
            return 2.0 * quarter;
        }
        x = xn;
        y = yn;
        steps += 1;
        assert!(steps < 100_000_000, "oracle did not reach a zero of x");
    }
}

/// Fixed-step RK4 reference integration of the radial system
///
/// ```text
/// u' = phi_q(v),  v' = -(N-1)/r v - f(u)
/// ```
///
/// from the state `(r0, u0, v0)` to `r_end`, sampling every `every`-th
/// step. Returns (r, u) pairs.
#[allow(clippy::too_many_arguments)]
pub fn rk4_radial_reference<F: Fn(f64) -> f64>(
    f: &F,
    dim: f64,
    p: f64,
    r0: f64,
    u0: f64,
    v0: f64,
    r_end: f64,
    h: f64,
    every: usize,
) -> Vec<(f64, f64)> {
    let q = p / (p - 1.0);
    let rhs = |r: f64, u: f64, v: f64| (phi(q, v), -(dim - 1.0) / r * v - f(u));
    let n = ((r_end - r0) / h).ceil() as u64;
    let h = (r_end - r0) / n as f64;
    let (mut u, mut v) = (u0, v0);
    let mut out = Vec::with_capacity((n as usize / every) + 2);
    out.push((r0, u));
    for k in 0..n {
        let r = r0 + k as f64 * h;
        let (k1u, k1v) = rhs(r, u, v);
        let (k2u, k2v) = rhs(r + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v);
        let (k3u, k3v) = rhs(r + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v);
        let (k4u, k4v) = rhs(r + h, u + h * k3u, v + h * k3v);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if (k + 1) % every as u64 == 0 {
            out.push((r0 + (k + 1) as f64 * h, u));
        }
    }
    out
}
