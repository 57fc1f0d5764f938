//! Sweep the shooting amplitude and watch the node count climb one band
//! at a time.
//!
//! ```text
//! cargo run --example sweep_bands
//! ```

use plshoot::model::{landmarks, make_power_family};
use plshoot::shoot::{sweep_refined, ShotKind};
use plshoot::ProblemParams;

fn main() {
    let nl = make_power_family(1.5, 4.0, 2.0, 3.0).unwrap();
    let lm = landmarks(&nl, 2.0, 3.0).unwrap();
    let mut params = ProblemParams::new(3.0, 2.0, 2.0).unwrap();
    params.r_max = 80.0;

    // coarse geometric grid from just above A; refinement inserts
    // midpoints until adjacent node counts differ by at most one
    let grid: Vec<f64> = (0..10).map(|i| lm.big_a * 1.07 * 1.55f64.powi(i)).collect();
    let table = sweep_refined(&grid, &params, &nl, &lm, 60).unwrap();

    println!("lambda        kind   k   r at E = 0");
    for row in &table.rows {
        let kind = match row.kind {
            ShotKind::Ak => "Ak",
            ShotKind::Ik => "Ik",
            ShotKind::Undetermined => "??",
        };
        println!(
            "{:>10.4}    {kind:>4}  {:>2}   {}",
            row.lambda,
            row.k,
            row.r_energy_zero.map(|r| format!("{r:.4}")).unwrap_or_default()
        );
    }
    println!(
        "\n{} rows after refinement; node count changes by at most one between neighbors",
        table.rows.len()
    );
}
