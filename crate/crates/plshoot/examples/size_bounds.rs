//! Closed-form brackets for the support size against measured values.
//!
//! ```text
//! cargo run --example size_bounds
//! ```

use plshoot::bounds::{energy_growth_probe, measure_s_theta, size_bounds};
use plshoot::ivp::integrate;
use plshoot::model::{landmarks, make_power_family};
use plshoot::shoot::{find_lambda_k, SearchOptions};
use plshoot::{PExponent, ProblemParams};

fn main() {
    let nl = make_power_family(1.5, 4.0, 2.0, 3.0).unwrap();
    let lm = landmarks(&nl, 2.0, 3.0).unwrap();
    let pexp = PExponent::new(2.0).unwrap();
    let theta = 0.904;

    println!("first-crossing brackets (u drops from lambda to theta lambda):");
    println!("  lambda      S_lo        S measured   S_hi");
    for lambda in [10.0, 30.0, 100.0] {
        let sb = size_bounds(lambda, theta, &nl, &pexp, 3.0, &lm).unwrap();
        let mut params = ProblemParams::new(3.0, 2.0, lambda).unwrap();
        params.r_max = 4.0 * sb.s_hi;
        params.stop_on_trapped = false;
        let traj = integrate(&params, &nl, &lm).unwrap();
        let s = measure_s_theta(&traj, theta).unwrap();
        println!("  {lambda:>6}   {:.8}   {s:.8}   {:.8}", sb.s_lo, sb.s_hi);
    }

    println!("\nsupport lower bound vs located compactly supported solutions:");
    let mut params = ProblemParams::new(3.0, 2.0, 2.0).unwrap();
    params.r_max = 80.0;
    for k in 0..=2 {
        let sol = find_lambda_k(k, &params, &nl, &lm, &SearchOptions::default()).unwrap();
        let sb = size_bounds(sol.lambda_k, theta, &nl, &pexp, 3.0, &lm).unwrap();
        println!(
            "  k = {k}: r_support = {:.6} >= bound {:.6} (constant {:.6}, growth margin {:.5})",
            sol.r_support, sb.r_support_lo, sb.power_constant, sb.kappa
        );
    }

    // uniform energy growth on a fixed window drives the node-count
    // divergence as lambda grows
    let rows = energy_growth_probe(30.0, &[50.0, 100.0, 200.0, 400.0], &params, &nl, &lm).unwrap();
    println!("\nenergy floor over [0, 30] grows with lambda:");
    for row in rows {
        println!("  lambda {:>5}: min E = {:>12.4}, min rho = {:.4}", row.lambda, row.min_energy, row.min_rho);
    }
}
