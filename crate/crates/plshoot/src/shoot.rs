//! Shot classification and the search for compactly supported k-node
//! solutions.
//!
//! For `lambda >= A` every shot falls into one of two families: either the
//! phase point never reaches the origin and the energy eventually traps
//! below zero after k sign changes (`Ak`), or the trajectory reaches a
//! double zero with zero energy after k sign changes (`Ik`), which is the
//! compactly supported case. The amplitudes are swept on a geometric grid
//! to bracket the transition between k and k+1 sign changes and the
//! bracket is bisected; the limiting amplitudes `lambda_k` are strictly
//! increasing in k and unbounded. Because node counts can change only one
//! at a time as `lambda` varies, a jump of two or more across adjacent
//! grid entries flags the grid as too coarse.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ivp::{energy, integrate, EventKind, PhaseState, ProblemParams, StopReason, Trajectory};
use crate::model::{interior_f_maxima, nonzero_f_zeros, Landmarks, Nonlinearity};

/// Family of a classified shot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ShotKind {
    /// trapped: k sign changes, then energy strictly below zero forever
    Ak,
    /// compactly supported: double zero with zero energy after k nodes
    Ik,
    /// ran out of radius before the dichotomy resolved
    Undetermined,
}

/// Classification of one shot.
#[derive(Debug, Clone)]
pub struct ShootClass {
    pub kind: ShotKind,
    /// number of sign changes before the energy reaches zero
    pub k: usize,
    /// first radius where the energy reaches zero
    pub r_energy_zero: Option<f64>,
    /// double-zero radius for Ik shots
    pub r_support: Option<f64>,
    /// set when a critical point lands on an interior local maximum of F,
    /// where forward uniqueness can fail
    pub non_unique_risk: bool,
    pub note: Option<String>,
    pub trajectory: Option<Trajectory>,
}

/// Classify a single amplitude.
///
/// Amplitudes below the first positive zero A of F start with negative
/// energy, are trivially node-free, and are reported `Undetermined` with a
/// note instead of being integrated.
pub fn classify(
    lambda: f64,
    params: &ProblemParams,
    nl: &Nonlinearity,
    lm: &Landmarks,
) -> Result<ShootClass> {
    if lambda < lm.big_a {
        return Ok(ShootClass {
            kind: ShotKind::Undetermined,
            k: 0,
            r_energy_zero: None,
            r_support: None,
            non_unique_risk: false,
            note: Some(format!(
                "lambda = {lambda} below the first positive zero of F ({}); the shot starts with nonpositive energy and is node-free",
                lm.big_a
            )),
            trajectory: None,
        });
    }
    let p = params.with_lambda(lambda);
    let traj = integrate(&p, nl, lm)?;
    if traj.stop_reason == StopReason::Diverged {
        let st = traj.last_state();
        return Err(Error::Integration {
            r: st.r,
            u: st.u,
            v: st.v,
            message: "trajectory left the energy-admissible region (integration failure)".into(),
        });
    }
    let k = traj.simple_zero_count();
    let r_energy_zero = traj.energy_zero_radius();
    let non_unique_risk = critical_point_on_f_maximum(&traj, nl, lm);
    let (kind, r_support, note) = match traj.stop_reason {
        StopReason::EnergyTrapped => (ShotKind::Ak, None, None),
        StopReason::DoubleZero => {
            let dz = traj.double_zero().expect("double-zero stop records its event");
            (ShotKind::Ik, Some(dz.r), None)
        }
        StopReason::ReachedRmax => (
            ShotKind::Undetermined,
            None,
            Some(format!("reached r_max = {} before the dichotomy resolved", p.r_max)),
        ),
        StopReason::Diverged => unreachable!(),
    };
    Ok(ShootClass {
        kind,
        k,
        r_energy_zero,
        r_support,
        non_unique_risk,
        note,
        trajectory: Some(traj),
    })
}

/// True when some critical point sits on an interior local maximum of F
/// (possible only for tabulated nonlinearities with several positive
/// zeros of f; forward uniqueness can fail there).
fn critical_point_on_f_maximum(traj: &Trajectory, nl: &Nonlinearity, lm: &Landmarks) -> bool {
    let maxima = interior_f_maxima(nl, lm);
    if maxima.is_empty() {
        return false;
    }
    traj.events.iter().any(|e| {
        e.kind == EventKind::CriticalPoint
            && maxima.iter().any(|&m| (e.u - m).abs() <= 1e-6 * m.abs().max(1.0))
    })
}

/// One row of a sweep table.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub kind: ShotKind,
    pub k: usize,
    pub r_energy_zero: Option<f64>,
    pub r_support: Option<f64>,
    pub note: Option<String>,
}

/// Sweep result: per-amplitude classification plus coarseness flags.
#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// indices i where |k(i+1) - k(i)| >= 2: the grid is too coarse there,
    /// since the node count changes by at most one
    pub refine_between: Vec<usize>,
}

/// Classify every amplitude of an increasing grid.
pub fn sweep(
    grid: &[f64],
    params: &ProblemParams,
    nl: &Nonlinearity,
    lm: &Landmarks,
) -> Result<SweepTable> {
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("sweep grid must be strictly increasing".into()));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let cls = classify(lambda, params, nl, lm)?;
        rows.push(SweepRow {
            lambda,
            kind: cls.kind,
            k: cls.k,
            r_energy_zero: cls.r_energy_zero,
            r_support: cls.r_support,
            note: cls.note,
        });
    }
    let refine_between = flag_coarse(&rows);
    Ok(SweepTable { rows, refine_between })
}

fn flag_coarse(rows: &[SweepRow]) -> Vec<usize> {
    let mut out = Vec::new();
    for i in 0..rows.len().saturating_sub(1) {
        let (a, b) = (&rows[i], &rows[i + 1]);
        if a.kind != ShotKind::Undetermined
            && b.kind != ShotKind::Undetermined
            && a.k.abs_diff(b.k) >= 2
        {
            out.push(i);
        }
    }
    out
}

/// Sweep and insert midpoints until no adjacent pair jumps by two or more
/// node counts (or the refinement budget is exhausted).
pub fn sweep_refined(
    grid: &[f64],
    params: &ProblemParams,
    nl: &Nonlinearity,
    lm: &Landmarks,
    max_inserts: usize,
) -> Result<SweepTable> {
    let mut table = sweep(grid, params, nl, lm)?;
    let mut inserted = 0;
    while let Some(&i) = table.refine_between.first() {
        if inserted >= max_inserts {
            break;
        }
        let mid = 0.5 * (table.rows[i].lambda + table.rows[i + 1].lambda);
        let cls = classify(mid, params, nl, lm)?;
        table.rows.insert(
            i + 1,
            SweepRow {
                lambda: mid,
                kind: cls.kind,
                k: cls.k,
                r_energy_zero: cls.r_energy_zero,
                r_support: cls.r_support,
                note: cls.note,
            },
        );
        inserted += 1;
        table.refine_between = flag_coarse(&table.rows);
    }
    Ok(table)
}

/// A compactly supported k-node solution located by bisection.
#[derive(Debug, Clone)]
pub struct NodeSolution {
    pub k: usize,
    pub lambda_k: f64,
    /// final bisection bracket (lambda in A_k, lambda in A_(k+1))
    pub bracket: (f64, f64),
    pub r_support: f64,
    /// |u| + |u'| actually achieved at r_support
    pub achieved_dist: f64,
    /// energy at r_support
    pub achieved_energy: f64,
    /// set when the double-zero tolerance was never met; the solution is
    /// the bracket midpoint cut at its closest approach to the origin
    pub near_ik: bool,
    /// true once the identically-zero branch has been appended
    pub extended: bool,
    pub trajectory: Trajectory,
}

/// Options of the bisection search.
#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    /// bracket width target, relative to the lower endpoint
    pub lambda_tol_rel: f64,
    /// geometric seeding ratio
    pub grid_ratio: f64,
    /// seeding cap as a multiple of the landmark A
    pub lambda_cap_factor: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        // 1e-12 rather than 1e-10: the closest-approach distance moves at
        // O(10) per unit lambda near the transition, so a 1e-10 relative
        // bracket can leave |u| + |u'| misses above the double-zero
        // tolerance for k >= 2.
        SearchOptions { lambda_tol_rel: 1e-12, grid_ratio: 1.1, lambda_cap_factor: 1e6 }
    }
}

/// Locate the k-th compactly supported amplitude by geometric seeding and
/// bisection on the node count.
///
/// Returns as soon as some probed amplitude classifies `Ik` with k nodes.
/// If the double-zero ball is never hit, the bracket midpoint is returned
/// flagged `near_ik`, cut at its closest approach to the origin, reporting
/// the achieved `|u| + |u'|` there.
pub fn find_lambda_k(
    k: usize,
    params: &ProblemParams,
    nl: &Nonlinearity,
    lm: &Landmarks,
    opts: &SearchOptions,
) -> Result<NodeSolution> {
    let cap = lm.big_a * opts.lambda_cap_factor;

    // geometric seeding from the landmark A
    let mut lo: Option<f64> = None;
    let mut hi: Option<(f64, usize)> = None;
    let mut lambda = lm.big_a;
    let mut prev: Option<(f64, usize)> = None;
    while lambda <= cap {
        let cls = classify(lambda, params, nl, lm)?;
        match cls.kind {
            ShotKind::Ik if cls.k == k => return build_ik(k, lambda, (lambda, lambda), cls),
            ShotKind::Undetermined => {
                return Err(Error::Search(format!(
                    "classification undetermined at lambda = {lambda} (r_max too small?)"
                )))
            }
            _ => {}
        }
        if cls.non_unique_risk {
            // skip amplitudes whose continuation is ambiguous
            lambda *= opts.grid_ratio;
            continue;
        }
        if cls.k == k {
            lo = Some(lambda);
        }
        if cls.k > k {
            hi = Some((lambda, cls.k));
            if lo.is_none() {
                // jumped the whole band: refine between the previous grid
                // point and this one
                if let Some((pl, _)) = prev {
                    let (l, h) = refine_to_band(k, pl, lambda, params, nl, lm, opts)?;
                    lo = Some(l);
                    hi = Some((h, k + 1));
                } else {
                    return Err(Error::Search(format!(
                        "no amplitude with {k} sign changes at or above A = {}",
                        lm.big_a
                    )));
                }
            }
            break;
        }
        prev = Some((lambda, cls.k));
        lambda *= opts.grid_ratio;
    }
    let mut lo = lo.ok_or_else(|| {
        Error::Search(format!("no bracket with {k} sign changes below the cap {cap:e}"))
    })?;
    let (mut hi, mut hi_k) = hi.ok_or_else(|| {
        Error::Search(format!("no bracket with {} sign changes below the cap {cap:e}", k + 1))
    })?;

    // ensure the upper end carries exactly k+1 nodes
    while hi_k > k + 1 {
        let mid = 0.5 * (lo + hi);
        let cls = classify(mid, params, nl, lm)?;
        match cls.kind {
            ShotKind::Ik if cls.k == k => return build_ik(k, mid, (lo, hi), cls),
            ShotKind::Undetermined => {
                return Err(Error::Search(format!("undetermined at lambda = {mid}")))
            }
            _ => {}
        }
        if cls.k <= k {
            lo = mid;
        } else {
            hi = mid;
            hi_k = cls.k;
        }
        if hi - lo < opts.lambda_tol_rel * lo {
            return Err(Error::Search(
                "bracket degenerated while isolating a single node transition".into(),
            ));
        }
    }

    // bisect on the node count
    let mut best_near: Option<(f64, Trajectory)> = None;
    while hi - lo >= opts.lambda_tol_rel * lo {
        let mid = 0.5 * (lo + hi);
        let cls = classify(mid, params, nl, lm)?;
        match cls.kind {
            ShotKind::Ik if cls.k == k => return build_ik(k, mid, (lo, hi), cls),
            ShotKind::Ik => {
                if cls.k <= k {
                    lo = mid;
                } else {
                    hi = mid;
                }
                continue;
            }
            ShotKind::Undetermined => {
                return Err(Error::Search(format!("undetermined at lambda = {mid}")))
            }
            ShotKind::Ak => {}
        }
        let traj = cls.trajectory.expect("Ak classifications carry their trajectory");
        if let Some(c) = traj.closest_approach {
            if best_near.as_ref().map(|(d, _)| c.dist < *d).unwrap_or(true) {
                best_near = Some((c.dist, traj));
            }
        }
        if cls.k <= k {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // tolerance exhausted without an exact hit: report the best near-miss
    let (dist, traj) = match best_near {
        Some(x) => x,
        None => {
            let cls = classify(0.5 * (lo + hi), params, nl, lm)?;
            let traj = cls
                .trajectory
                .ok_or_else(|| Error::Search("no trajectory at the bracket midpoint".into()))?;
            let c = traj.closest_approach.ok_or_else(|| {
                Error::Search("bracket midpoint never approached the phase-plane origin".into())
            })?;
            (c.dist, traj)
        }
    };
    let approach = traj.closest_approach.expect("tracked");
    let cut = traj.truncated(approach.r)?;
    let k_cut = cut.simple_zero_count();
    Ok(NodeSolution {
        k: k_cut,
        lambda_k: traj.params.lambda,
        bracket: (lo, hi),
        r_support: approach.r,
        achieved_dist: dist,
        achieved_energy: approach.e,
        near_ik: true,
        extended: false,
        trajectory: cut,
    })
}

fn refine_to_band(
    k: usize,
    mut lo: f64,
    mut hi: f64,
    params: &ProblemParams,
    nl: &Nonlinearity,
    lm: &Landmarks,
    opts: &SearchOptions,
) -> Result<(f64, f64)> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let cls = classify(mid, params, nl, lm)?;
        match cls.kind {
            ShotKind::Undetermined => {
                return Err(Error::Search(format!("undetermined at lambda = {mid}")))
            }
            _ => {
                if cls.k < k {
                    lo = mid;
                } else if cls.k > k {
                    hi = mid;
                } else {
                    return Ok((mid, hi));
                }
            }
        }
        if hi - lo < opts.lambda_tol_rel * lo {
            break;
        }
    }
    Err(Error::Search(format!(
        "could not isolate an amplitude with {k} sign changes in ({lo}, {hi})"
    )))
}

fn build_ik(k: usize, lambda: f64, bracket: (f64, f64), cls: ShootClass) -> Result<NodeSolution> {
    let traj = cls
        .trajectory
        .ok_or_else(|| Error::Contract("Ik classification lost its trajectory".into()))?;
    let r_support = cls
        .r_support
        .ok_or_else(|| Error::Contract("Ik classification lost its support radius".into()))?;
    let dz = traj.double_zero().ok_or_else(|| {
        Error::Contract("Ik classification without a double-zero event".into())
    })?;
    let pexp = traj.params.pexp;
    let dist = dz.u.abs() + crate::num::phi(pexp.q(), dz.v).abs();
    Ok(NodeSolution {
        k,
        lambda_k: lambda,
        bracket,
        r_support,
        achieved_dist: dist,
        achieved_energy: dz.e,
        near_ik: false,
        extended: false,
        trajectory: traj,
    })
}

/// Append the identically-zero branch beyond the support radius.
///
/// Requires a genuine double zero with energy at the event tolerance or
/// below: past a double zero the continuation is not unique, and the zero
/// branch is the selected one. The node count is unchanged by extension.
pub fn extend_compact_support(sol: &NodeSolution, until: f64) -> Result<NodeSolution> {
    if sol.near_ik {
        return Err(Error::Contract(
            "cannot extend a near-miss solution: no double zero was reached".into(),
        ));
    }
    let tol = sol.trajectory.params.tol;
    if !(sol.achieved_dist <= tol.double_zero_tol && sol.achieved_energy <= tol.event_tol) {
        return Err(Error::Contract(format!(
            "extension requires |u| + |u'| <= {} and E <= {} at the support radius (got {} and {})",
            tol.double_zero_tol, tol.event_tol, sol.achieved_dist, sol.achieved_energy
        )));
    }
    let mut out = sol.clone();
    out.trajectory.append_zero_branch(until.max(sol.r_support));
    out.extended = true;
    Ok(out)
}

/// Tail diagnostics of a trapped (or long) run: the solution approaches a
/// zero of f and the energy approaches F at that zero.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticReport {
    /// average of u over the last decade of radius
    pub u_tail: f64,
    /// average of E over the last decade of radius
    pub e_tail: f64,
    /// nearest zero of f (None for compactly supported runs)
    pub nearest_zero: Option<f64>,
    pub residual_u: Option<f64>,
    pub residual_e: Option<f64>,
    pub compact_support: bool,
}

/// Report tail averages over the last decade of radius, the nearest zero
/// of f, and the corresponding residuals.
pub fn asymptotic_limit(traj: &Trajectory, nl: &Nonlinearity, lm: &Landmarks) -> AsymptoticReport {
    if traj.stop_reason == StopReason::DoubleZero {
        let e_end = traj.samples().last().map(|(_, e)| e).unwrap_or(0.0);
        return AsymptoticReport {
            u_tail: 0.0,
            e_tail: e_end,
            nearest_zero: None,
            residual_u: None,
            residual_e: None,
            compact_support: true,
        };
    }
    let r_end = traj.r_end();
    let r_lo = r_end / 10.0;
    // integral averages over [r_end/10, r_end] via the trapezoid rule
    let mut wsum = 0.0;
    let mut usum = 0.0;
    let mut esum = 0.0;
    let mut prev: Option<(f64, f64, f64)> = None;
    for (st, e) in traj.samples() {
        if st.r < r_lo {
            continue;
        }
        if let Some((pr, pu, pe)) = prev {
            let w = st.r - pr;
            wsum += w;
            usum += 0.5 * w * (st.u + pu);
            esum += 0.5 * w * (e + pe);
        }
        prev = Some((st.r, st.u, e));
    }
    let (u_tail, e_tail) = if wsum > 0.0 {
        (usum / wsum, esum / wsum)
    } else {
        let (st, e) = traj.samples().last().unwrap();
        (st.u, e)
    };
    let mut zeros = nonzero_f_zeros(nl, lm);
    zeros.push(0.0);
    // snap to the landmark values where they coincide
    for z in zeros.iter_mut() {
        if (*z - lm.a_plus).abs() <= 1e-9 * lm.a_plus.abs().max(1.0) {
            *z = lm.a_plus;
        } else if (*z - lm.b_minus).abs() <= 1e-9 * lm.b_minus.abs().max(1.0) {
            *z = lm.b_minus;
        }
    }
    let nearest = zeros
        .into_iter()
        .min_by(|a, b| (a - u_tail).abs().partial_cmp(&(b - u_tail).abs()).unwrap())
        .unwrap_or(0.0);
    AsymptoticReport {
        u_tail,
        e_tail,
        nearest_zero: Some(nearest),
        residual_u: Some((u_tail - nearest).abs()),
        residual_e: Some((e_tail - nl.big_f(nearest)).abs()),
        compact_support: false,
    }
}

/// Sanity helper used by examples and tests: energy at a trajectory's
/// final state.
pub fn final_energy(traj: &Trajectory, nl: &Nonlinearity) -> f64 {
    let st = traj.last_state();
    energy(&PhaseState { r: st.r, u: st.u, v: st.v }, nl, &traj.params.pexp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{landmarks, make_power_family};
    use std::sync::OnceLock;

    fn setup() -> (&'static Nonlinearity, &'static Landmarks) {
        static CELL: OnceLock<(Nonlinearity, Landmarks)> = OnceLock::new();
        let (nl, lm) = CELL.get_or_init(|| {
            let nl = make_power_family(1.5, 4.0, 2.0, 3.0).unwrap();
            let lm = landmarks(&nl, 2.0, 3.0).unwrap();
            (nl, lm)
        });
        (nl, lm)
    }

    fn base_params() -> ProblemParams {
        let mut p = ProblemParams::new(3.0, 2.0, 2.0).unwrap();
        p.r_max = 60.0;
        p
    }

    #[test]
    fn just_above_a_is_node_free() {
        let (nl, lm) = setup();
        let cls = classify(lm.big_a + 0.01, &base_params(), nl, lm).unwrap();
        assert_eq!(cls.kind, ShotKind::Ak);
        assert_eq!(cls.k, 0);
        assert!(cls.r_energy_zero.is_some());
    }

    #[test]
    fn below_a_is_undetermined_with_note() {
        let (nl, lm) = setup();
        let cls = classify(lm.big_a * 0.9, &base_params(), nl, lm).unwrap();
        assert_eq!(cls.kind, ShotKind::Undetermined);
        assert!(cls.note.unwrap().contains("below"));
        assert!(cls.trajectory.is_none());
    }

    #[test]
    fn large_lambda_has_many_nodes() {
        let (nl, lm) = setup();
        let cls = classify(1000.0, &base_params(), nl, lm).unwrap();
        assert!(cls.k >= 3, "k = {}", cls.k);
        assert_eq!(cls.kind, ShotKind::Ak);
    }

    #[test]
    fn sweep_constant_inside_band() {
        let (nl, lm) = setup();
        let grid = [1.6, 1.8, 2.0, 2.2];
        let table = sweep(&grid, &base_params(), nl, lm).unwrap();
        assert!(table.rows.iter().all(|r| r.k == 0 && r.kind == ShotKind::Ak));
        assert!(table.refine_between.is_empty());
    }

    #[test]
    fn sweep_below_a_all_undetermined() {
        let (nl, lm) = setup();
        let grid = [0.3, 0.6, 0.9, 1.2];
        let table = sweep(&grid, &base_params(), nl, lm).unwrap();
        assert!(table
            .rows
            .iter()
            .all(|r| r.kind == ShotKind::Undetermined && r.note.is_some()));
    }

    #[test]
    fn sweep_rejects_unsorted_grid() {
        let (nl, lm) = setup();
        assert!(sweep(&[2.0, 1.5], &base_params(), nl, lm).is_err());
    }

    #[test]
    fn refined_sweep_steps_by_one() {
        let (nl, lm) = setup();
        // coarse grid straddling several bands
        let grid = [2.0, 8.0, 32.0];
        let table = sweep_refined(&grid, &base_params(), nl, lm, 40).unwrap();
        assert!(table.refine_between.is_empty(), "not fully refined");
        for w in table.rows.windows(2) {
            assert!(w[1].k >= w[0].k, "staircase violated");
            assert!(w[1].k - w[0].k <= 1);
        }
    }

    #[test]
    fn find_lambda_0_compact_support() {
        let (nl, lm) = setup();
        let sol = find_lambda_k(0, &base_params(), nl, lm, &SearchOptions::default()).unwrap();
        assert_eq!(sol.k, 0);
        assert!(!sol.near_ik, "expected a genuine double-zero hit");
        let tol = sol.trajectory.params.tol;
        assert!(sol.achieved_dist <= tol.double_zero_tol);
        assert!(sol.achieved_energy <= tol.event_tol);
        // zero-node solution is nonnegative
        for (st, _) in sol.trajectory.samples() {
            assert!(st.u >= -tol.double_zero_tol, "u = {} at r = {}", st.u, st.r);
        }
        // profile decreasing from lambda to 0
        assert!(sol.lambda_k > lm.big_a);
        assert!(sol.r_support > 0.0);
    }

    #[test]
    fn lambda_sequence_increasing() {
        let (nl, lm) = setup();
        let opts = SearchOptions::default();
        let l0 = find_lambda_k(0, &base_params(), nl, lm, &opts).unwrap();
        let l1 = find_lambda_k(1, &base_params(), nl, lm, &opts).unwrap();
        assert!(l1.lambda_k > l0.lambda_k);
        assert_eq!(l1.k, 1);
        assert!(l1.r_support > 0.0);
    }

    #[test]
    fn extension_preserves_junction_and_nodes() {
        let (nl, lm) = setup();
        let sol = find_lambda_k(1, &base_params(), nl, lm, &SearchOptions::default()).unwrap();
        let k_before = sol.trajectory.simple_zero_count();
        let until = sol.r_support + 5.0;
        let ext = extend_compact_support(&sol, until).unwrap();
        assert!(ext.extended);
        assert_eq!(ext.trajectory.simple_zero_count(), k_before);
        // zero branch: E = 0 and u = 0 beyond the support radius
        for (st, e) in ext.trajectory.samples() {
            if st.r > sol.r_support * (1.0 + 1e-12) {
                assert_eq!(st.u, 0.0);
                assert_eq!(e, 0.0);
            }
        }
        // junction continuity within the double-zero tolerance
        let before = ext.trajectory.eval(sol.r_support * (1.0 - 1e-9)).unwrap();
        let tol = sol.trajectory.params.tol;
        assert!(before.u.abs() <= 2.0 * tol.double_zero_tol);
        let dense_beyond = ext.trajectory.eval(sol.r_support + 2.0).unwrap();
        assert_eq!(dense_beyond.u, 0.0);
    }

    #[test]
    fn extension_rejects_near_miss() {
        let (nl, lm) = setup();
        let sol = find_lambda_k(0, &base_params(), nl, lm, &SearchOptions::default()).unwrap();
        let mut fake = sol.clone();
        fake.near_ik = true;
        assert!(extend_compact_support(&fake, 10.0).is_err());
    }

    #[test]
    fn trapped_zero_node_limit_is_a_plus() {
        let (nl, lm) = setup();
        let mut p = base_params().with_lambda(2.0);
        p.r_max = 200.0;
        p.stop_on_trapped = false;
        let traj = integrate(&p, nl, lm).unwrap();
        let rep = asymptotic_limit(&traj, nl, lm);
        assert!(!rep.compact_support);
        assert_eq!(rep.nearest_zero, Some(lm.a_plus));
        assert!(rep.residual_u.unwrap() < 0.05, "residual {}", rep.residual_u.unwrap());
        assert!(rep.residual_e.unwrap() < 0.05);
    }

    #[test]
    fn trapped_one_node_limit_is_b_minus() {
        let (nl, lm) = setup();
        // pick an amplitude inside the one-node band via a quick scan
        let mut lambda = lm.big_a * 1.2;
        let one_node = loop {
            let cls = classify(lambda, &base_params(), nl, lm).unwrap();
            if cls.k == 1 && cls.kind == ShotKind::Ak {
                break lambda;
            }
            lambda *= 1.15;
            assert!(lambda < 1e4, "no one-node amplitude found");
        };
        let mut p = base_params().with_lambda(one_node);
        p.r_max = 200.0;
        p.stop_on_trapped = false;
        let traj = integrate(&p, nl, lm).unwrap();
        let rep = asymptotic_limit(&traj, nl, lm);
        assert_eq!(rep.nearest_zero, Some(lm.b_minus), "u_tail = {}", rep.u_tail);
        assert!(rep.residual_u.unwrap() < 0.05);
    }

    #[test]
    fn compact_support_report_suppresses_limit() {
        let (nl, lm) = setup();
        let sol = find_lambda_k(0, &base_params(), nl, lm, &SearchOptions::default()).unwrap();
        let rep = asymptotic_limit(&sol.trajectory, nl, lm);
        assert!(rep.compact_support);
        assert!(rep.nearest_zero.is_none());
        assert!(rep.e_tail.abs() <= 1e-9);
    }

    #[test]
    fn classification_stable_under_small_perturbation() {
        let (nl, lm) = setup();
        // openness proxy at deterministic pseudo-random trapped amplitudes
        let mut state = 0x2545f4914f6cdd1du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut tested = 0;
        while tested < 20 {
            let lambda = lm.big_a * (1.0 + 3.0 * next());
            let cls = classify(lambda, &base_params(), nl, lm).unwrap();
            if cls.kind != ShotKind::Ak {
                continue;
            }
            let eps = 1e-6 * lambda;
            for sgn in [-1.0, 1.0] {
                let cls2 = classify(lambda + sgn * eps, &base_params(), nl, lm).unwrap();
                assert_eq!(cls2.kind, ShotKind::Ak, "kind changed at {lambda}");
                assert_eq!(cls2.k, cls.k, "node count changed at {lambda}");
            }
            tested += 1;
        }
    }

    #[test]
    fn bisection_near_miss_shrinks_with_tolerance() {
        let (nl, lm) = setup();
        // impossible double-zero tolerance forces the near-miss path; the
        // achieved distance must shrink as lambda_tol shrinks
        let mut p = base_params();
        p.tol.double_zero_tol = 1e-300;
        let mut dists = Vec::new();
        for tol in [1e-4, 1e-6, 1e-8] {
            let opts = SearchOptions { lambda_tol_rel: tol, ..Default::default() };
            let sol = find_lambda_k(0, &p, nl, lm, &opts).unwrap();
            assert!(sol.near_ik);
            dists.push(sol.achieved_dist);
            let w = sol.bracket.1 - sol.bracket.0;
            assert!(w <= tol * sol.bracket.0 * 1.0001, "bracket width {w}");
        }
        assert!(dists[1] < dists[0] && dists[2] < dists[1], "{dists:?}");
    }
}
