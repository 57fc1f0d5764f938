//! Property tests over the phase-plane machinery.

use std::sync::OnceLock;

use proptest::prelude::*;

use plshoot::model::{landmarks, make_power_family, Landmarks, Nonlinearity};
use plshoot::ptrig::{PExponent, PTrig};

fn trig(p: f64) -> &'static PTrig {
    static CACHE: OnceLock<Vec<(u64, PTrig)>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        [1.5f64, 2.0, 2.5, 3.0]
            .iter()
            .map(|&p| (p.to_bits(), PTrig::new(PExponent::new(p).unwrap())))
            .collect()
    });
    &cache.iter().find(|(bits, _)| *bits == p.to_bits()).unwrap().1
}

fn reference() -> &'static (Nonlinearity, Landmarks) {
    static CELL: OnceLock<(Nonlinearity, Landmarks)> = OnceLock::new();
    CELL.get_or_init(|| {
        let nl = make_power_family(1.5, 4.0, 2.0, 3.0).unwrap();
        let lm = landmarks(&nl, 2.0, 3.0).unwrap();
        (nl, lm)
    })
}

fn exponents() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.5f64), Just(2.0), Just(2.5), Just(3.0)]
}

proptest! {
    /// The conserved quantity holds at arbitrary angles.
    #[test]
    fn ptrig_identity(p in exponents(), t in -50.0f64..50.0) {
        let trig = trig(p);
        prop_assert!(trig.identity_residual(t).abs() <= 1e-10);
    }

    /// Polar coordinates round-trip through the phase plane.
    #[test]
    fn polar_round_trip(p in exponents(), u in -8.0f64..8.0, v in -8.0f64..8.0) {
        prop_assume!(u.abs() > 1e-6 || v.abs() > 1e-6);
        let trig = trig(p);
        let st = trig.cartesian_to_polar(u, v);
        prop_assert!(st.rho >= 0.0);
        prop_assert!((0.0..2.0 * trig.pi_p()).contains(&st.theta));
        let (u2, v2) = trig.polar_to_cartesian(&st).unwrap();
        let scale = u.abs().max(v.abs()).max(1.0);
        prop_assert!((u - u2).abs() <= 1e-8 * scale, "u {} vs {}", u, u2);
        prop_assert!((v - v2).abs() <= 1e-8 * scale, "v {} vs {}", v, v2);
    }

    /// The reconstructed squared radius matches its definition.
    #[test]
    fn rho_reconstruction(p in exponents(), rho in 1e-6f64..1e3, frac in 0.0f64..1.0) {
        let trig = trig(p);
        let theta = frac * 2.0 * trig.pi_p();
        let (u, v) = trig.polar_to_cartesian(&plshoot::PolarState { rho, theta }).unwrap();
        let q = p / (p - 1.0);
        let back = u.abs().powf(p) + (p / q) * v.abs().powf(q);
        prop_assert!((back - rho).abs() <= 1e-9 * rho, "{} vs {}", back, rho);
    }

    /// F is negative strictly between its nonzero zeros.
    #[test]
    fn big_f_well(u in -0.999f64..0.999) {
        prop_assume!(u.abs() > 1e-4);
        let (nl, lm) = reference();
        let x = u * lm.big_a;
        if x.abs() > 1e-4 {
            prop_assert!(nl.big_f(x) < 0.0);
        }
    }

    /// The energy of any integrated shot decreases along samples.
    #[test]
    fn energy_monotone(step in 0u8..12) {
        let (nl, lm) = reference();
        let lambda = lm.big_a * (1.0 + 0.45 * step as f64);
        let mut params = plshoot::ProblemParams::new(3.0, 2.0, lambda).unwrap();
        params.r_max = 25.0;
        let traj = plshoot::ivp::integrate(&params, nl, lm).unwrap();
        let mut prev = f64::INFINITY;
        for (_, e) in traj.samples() {
            prop_assert!(e <= prev + params.tol.event_tol);
            prev = e;
        }
    }
}
