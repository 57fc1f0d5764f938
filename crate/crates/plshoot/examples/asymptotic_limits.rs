//! Long-run tail diagnostics: trapped solutions approach a zero of f and
//! their energy approaches F at that zero.
//!
//! ```text
//! cargo run --example asymptotic_limits
//! ```

use plshoot::ivp::integrate;
use plshoot::model::{landmarks, make_power_family};
use plshoot::shoot::asymptotic_limit;
use plshoot::ProblemParams;

fn main() {
    let nl = make_power_family(1.5, 4.0, 2.0, 3.0).unwrap();
    let lm = landmarks(&nl, 2.0, 3.0).unwrap();
    println!("zeros of f: b- = {:.6}, 0, a+ = {:.6}", lm.b_minus, lm.a_plus);
    println!("F(a+) = F(b-) = {:.8}\n", nl.big_f(lm.a_plus));

    // 0-node band: u stays positive and settles onto a+;
    // 1-node band: u changes sign once and settles onto b-
    for (lambda, label) in [(2.0, "zero-node"), (10.0, "one-node")] {
        let mut params = ProblemParams::new(3.0, 2.0, lambda).unwrap();
        params.r_max = 1e3;
        params.stop_on_trapped = false;
        let traj = integrate(&params, &nl, &lm).unwrap();
        let rep = asymptotic_limit(&traj, &nl, &lm);
        println!("{label} run (lambda = {lambda}) to r = {:.0}:", traj.r_end());
        println!("  tail average of u = {:+.8}  -> nearest zero of f: {:+.6}", rep.u_tail, rep.nearest_zero.unwrap());
        println!("  tail average of E = {:+.8}", rep.e_tail);
        println!("  residuals: |u - l| = {:.2e}, |E - F(l)| = {:.2e}\n",
            rep.residual_u.unwrap(), rep.residual_e.unwrap());
    }
}
