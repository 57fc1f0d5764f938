//! Locate the first compactly supported amplitudes lambda_0 < lambda_1 <
//! lambda_2 by bisection and extend each solution by its zero branch.
//!
//! ```text
//! cargo run --example find_nodes
//! ```

use plshoot::model::{landmarks, make_power_family};
use plshoot::shoot::{extend_compact_support, find_lambda_k, SearchOptions};
use plshoot::ProblemParams;

fn main() {
    let nl = make_power_family(1.5, 4.0, 2.0, 3.0).unwrap();
    let lm = landmarks(&nl, 2.0, 3.0).unwrap();
    let mut params = ProblemParams::new(3.0, 2.0, 2.0).unwrap();
    params.r_max = 80.0;
    let opts = SearchOptions::default();

    for k in 0..=2 {
        let sol = find_lambda_k(k, &params, &nl, &lm, &opts).unwrap();
        println!(
            "k = {k}: lambda_{k} = {:.12}   support radius = {:.8}",
            sol.lambda_k, sol.r_support
        );
        println!(
            "        |u| + |u'| = {:.2e}, E = {:+.2e} at the double zero; bracket width {:.2e}",
            sol.achieved_dist,
            sol.achieved_energy,
            sol.bracket.1 - sol.bracket.0
        );
        let ext = extend_compact_support(&sol, sol.r_support + 3.0).unwrap();
        let beyond = ext.trajectory.eval(sol.r_support + 2.0).unwrap();
        println!(
            "        extended by the zero branch: u({:.3}) = {} (exactly zero beyond support)\n",
            beyond.r, beyond.u
        );
    }
}
