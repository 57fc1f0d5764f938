//! Shared numerical kernels: odd power maps, quadrature, root finding,
//! cubic Hermite interpolation.

pub mod interp;
pub mod quad;
pub mod roots;

/// Odd power map `phi_p(s) = |s|^(p-2) s`, with `phi_p(0) = 0`.
#[inline]
pub fn phi(p: f64, s: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else if p == 2.0 {
        s
    } else {
        s.abs().powf(p - 1.0).copysign(s)
    }
}

/// Primitive `Phi_p(s) = |s|^p / p` of the odd power map.
#[inline]
pub fn big_phi(p: f64, s: f64) -> f64 {
    if p == 2.0 {
        0.5 * s * s
    } else {
        s.abs().powf(p) / p
    }
}

/// Cumulative integral of samples on a uniform grid, exact for parabolas.
///
/// `f` must have an odd length (an even number of intervals). Entry `i` of
/// the result approximates the integral from the first node to node `i`.
pub fn cumulative_uniform(h: f64, f: &[f64]) -> Vec<f64> {
    assert!(f.len() >= 3 && f.len() % 2 == 1, "need an even interval count");
    let mut out = vec![0.0; f.len()];
    let mut k = 0;
    while k + 2 < f.len() {
        // Parabola through (f[k], f[k+1], f[k+2]); integrate to the midpoint
        // and to the endpoint.
        out[k + 1] = out[k] + h * (5.0 * f[k] + 8.0 * f[k + 1] - f[k + 2]) / 12.0;
        out[k + 2] = out[k] + h * (f[k] + 4.0 * f[k + 1] + f[k + 2]) / 3.0;
        k += 2;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_inverse_pair() {
        let p = 2.7;
        let q = p / (p - 1.0);
        for &s in &[-3.0, -0.4, 0.0, 1e-3, 2.5] {
            let back = phi(q, phi(p, s));
            assert!((back - s).abs() <= 1e-12 * s.abs().max(1.0), "{s} -> {back}");
        }
    }

    #[test]
    fn phi_p2_is_identity() {
        assert_eq!(phi(2.0, -1.75), -1.75);
        assert_eq!(big_phi(2.0, 3.0), 4.5);
    }

    #[test]
    fn cumulative_exact_for_quadratic() {
        let h = 0.1;
        let f: Vec<f64> = (0..9).map(|i| {
            let x = i as f64 * h;
            3.0 * x * x - 2.0 * x + 1.0
        }).collect();
        let cum = cumulative_uniform(h, &f);
        for (i, c) in cum.iter().enumerate() {
            let x = i as f64 * h;
            let exact = x * x * x - x * x + x;
            assert!((c - exact).abs() < 1e-14, "node {i}");
        }
    }
}
