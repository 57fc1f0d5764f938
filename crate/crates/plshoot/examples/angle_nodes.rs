//! Track a trajectory in generalized polar coordinates and read the node
//! count off the unwrapped angle.
//!
//! ```text
//! cargo run --example angle_nodes
//! ```

use plshoot::ivp::integrate;
use plshoot::model::{landmarks, make_power_family};
use plshoot::polar::{node_count, track_angle};
use plshoot::{PExponent, PTrig, ProblemParams};

fn main() {
    let nl = make_power_family(1.5, 4.0, 2.0, 3.0).unwrap();
    let lm = landmarks(&nl, 2.0, 3.0).unwrap();
    let trig = PTrig::new(PExponent::new(2.0).unwrap());

    let mut params = ProblemParams::new(3.0, 2.0, 40.0).unwrap();
    params.r_max = 40.0;
    let traj = integrate(&params, &nl, &lm).unwrap();
    let trace = track_angle(&traj, &trig, &nl).unwrap();

    println!(
        "lambda = {}: {} sign changes located, angle tracked to r = {:.4}",
        params.lambda,
        traj.simple_zero_count(),
        trace.r_end()
    );
    println!("pointwise vs quadrature angle discrepancy: {:.2e}\n", trace.max_discrepancy);

    println!("   r        theta/pi_p   floor((pi_p/2 - theta)/pi_p)   zeros before r");
    for i in 0..=10 {
        let r = trace.r_end() * i as f64 / 10.0;
        let theta = trace.theta_at(r).unwrap();
        let by_angle = node_count(&trace, r).unwrap();
        let by_events = traj.simple_zeros_before(r);
        println!(
            "  {r:7.3}   {:+9.4}    {by_angle:^28}   {by_events:^14}",
            theta / trace.pi_p
        );
        assert_eq!(by_angle, by_events);
    }
    println!("\nangle count and event count agree at every radius");
}
