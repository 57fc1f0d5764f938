//! Integrate a single shot of the radial problem and report its events
//! and energy decay.
//!
//! ```text
//! cargo run --example solve_single
//! ```

use plshoot::ivp::{dissipation_identity, integrate};
use plshoot::model::{landmarks, make_power_family};
use plshoot::ProblemParams;

fn main() {
    // reference instance: N = 3, p = 2, f(u) = |u|^2 u - |u|^(-1/2) u
    let nl = make_power_family(1.5, 4.0, 2.0, 3.0).unwrap();
    let lm = landmarks(&nl, 2.0, 3.0).unwrap();
    println!(
        "landmarks: a+ = {:.6}, A = {:.6}, F_bar = {:.6}",
        lm.a_plus, lm.big_a, lm.f_bar
    );

    let mut params = ProblemParams::new(3.0, 2.0, 8.0).unwrap();
    params.r_max = 40.0;
    let traj = integrate(&params, &nl, &lm).unwrap();

    println!("\nlambda = {}: stop = {:?} at r = {:.6}", params.lambda, traj.stop_reason, traj.r_end());
    println!("events:");
    for ev in &traj.events {
        println!(
            "  {:>18} at r = {:.8}  (u = {:+.3e}, u' = {:+.3e}, E = {:+.3e})",
            format!("{:?}", ev.kind),
            ev.r,
            ev.u,
            plshoot::num::phi(params.pexp.q(), ev.v),
            ev.e
        );
    }

    let (drop, integral) = dissipation_identity(&traj, &nl);
    println!("\nenergy drop E(delta) - E(end)      = {drop:.10}");
    println!("dissipation integral (N-1)|u'|^p/r = {integral:.10}");
    println!("relative residual                  = {:.2e}", (drop - integral).abs() / drop.abs());
}
