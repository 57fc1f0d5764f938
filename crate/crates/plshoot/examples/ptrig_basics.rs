//! Generalized trigonometry: half periods, the conserved identity, and
//! polar round trips.
//!
//! ```text
//! cargo run --example ptrig_basics
//! ```

use plshoot::{half_period, PExponent, PTrig, PolarState};

fn main() {
    for p in [1.5, 2.0, 2.5, 3.0] {
        let pexp = PExponent::new(p).unwrap();
        println!("p = {p}: pi_p = {:.12} (q = {:.6})", half_period(&pexp), pexp.q());
    }
    println!("pi   =      {:.12}  (p = 2 reduces to classical trigonometry)", std::f64::consts::PI);

    let trig = PTrig::new(PExponent::new(2.5).unwrap());
    println!("\nconserved quantity Phi_p(cos_q) + Phi_q(sin_q) - 1/p along the oscillation:");
    let mut worst = 0.0f64;
    for i in 0..=6 {
        let t = i as f64 * trig.pi_p() / 3.0;
        let (s, c) = trig.sincos(t);
        let res = trig.identity_residual(t);
        worst = worst.max(res.abs());
        println!("  t = {t:8.4}: sin_q = {s:+.8}, cos_q = {c:+.8}, residual = {res:+.2e}");
    }
    println!("  max residual {worst:.2e}");

    // a shot starts on the ray (rho, theta) = (lambda^p, 0)
    let lambda = 3.0f64;
    let start = PolarState { rho: lambda.powf(2.5), theta: 0.0 };
    let (u, v) = trig.polar_to_cartesian(&start).unwrap();
    println!("\nshooting ray: rho = lambda^p, theta = 0  ->  (u, v) = ({u}, {v})");
    let back = trig.cartesian_to_polar(u, v);
    println!("round trip: rho = {:.12}, theta = {:.3e}", back.rho, back.theta);
}
