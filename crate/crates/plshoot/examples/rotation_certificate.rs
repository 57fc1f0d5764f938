//! Compute the angular-velocity certificate and verify it against a
//! high-amplitude shot: inside {r >= r0, rho >= sigma0^p} the phase angle
//! must decrease faster than omega.
//!
//! ```text
//! cargo run --example rotation_certificate
//! ```

use plshoot::ivp::integrate;
use plshoot::model::{landmarks, make_power_family, rotation_constants};
use plshoot::polar::{check_rotation_bound, track_angle};
use plshoot::{PExponent, PTrig, ProblemParams};

fn main() {
    let nl = make_power_family(1.5, 4.0, 2.0, 3.0).unwrap();
    let lm = landmarks(&nl, 2.0, 3.0).unwrap();
    let cert = rotation_constants(&nl, 2.0, 3.0, 1.0 / 16.0).unwrap();
    println!(
        "omega = {}: s0 = {:.6}, r0 = {}, sigma0 = {:.6} (rho threshold {:.4})",
        cert.omega,
        cert.s0,
        cert.r0,
        cert.sigma0,
        cert.sigma0 * cert.sigma0
    );

    // amplitude large enough that rho stays certified well past r0
    let mut params = ProblemParams::new(3.0, 2.0, 3e5).unwrap();
    params.r_max = 80.0;
    params.stop_on_trapped = false;
    let traj = integrate(&params, &nl, &lm).unwrap();
    let trig = PTrig::new(PExponent::new(2.0).unwrap());
    let trace = track_angle(&traj, &trig, &nl).unwrap();

    let qualifying = trace
        .samples
        .iter()
        .filter(|s| s.r >= cert.r0 && s.rho >= cert.sigma0 * cert.sigma0)
        .count();
    let violations = check_rotation_bound(&trace, &cert, 2.0);
    println!(
        "\nlambda = {:.0}: {} sign changes, {} certified samples, {} violations of theta' < -omega",
        params.lambda,
        traj.simple_zero_count(),
        qualifying,
        violations.len()
    );

    // sample the angular velocity inside the certified window
    println!("\n   r       rho        theta'   (bound: < -{})", cert.omega);
    let inside: Vec<_> = trace
        .samples
        .iter()
        .enumerate()
        .filter(|(i, s)| *i > 0 && *i + 1 < trace.samples.len() && s.r >= cert.r0)
        .step_by(400)
        .take(6)
        .map(|(i, s)| {
            let (a, b) = (&trace.samples[i - 1], &trace.samples[i + 1]);
            (s.r, s.rho, (b.theta - a.theta) / (b.r - a.r))
        })
        .collect();
    for (r, rho, tp) in inside {
        println!("  {r:6.2}  {rho:9.3}  {tp:+9.5}");
    }
}
