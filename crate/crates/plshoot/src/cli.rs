//! Run configuration, dispatch, and artifact emission.
//!
//! Configuration is a flat key-value document (`key = value` lines, `#`
//! comments); unknown keys are rejected. Every run writes a manifest that
//! echoes the canonical configuration and its hash, and every data
//! artifact names the hash that produced it. Floats are written in the
//! shortest round-trip decimal form, so identical configurations produce
//! byte-identical CSV/JSON artifacts.
//!
//! Exit codes: 0 success, 2 validation failure, 3 numerical failure,
//! 4 search failure.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::bounds::{barrier, measure_s_theta, size_bounds, support_upper_check};
use crate::error::{Error, Result};
use crate::ivp::{integrate, ProblemParams, Tolerances, Trajectory};
use crate::model::{
    landmarks, make_power_family, rotation_constants, verify_hypotheses, Landmarks, Nonlinearity,
};
use crate::polar::{check_rotation_bound, track_angle, AngularTrace};
use crate::ptrig::{PExponent, PTrig};
use crate::shoot::{asymptotic_limit, classify, extend_compact_support, find_lambda_k, sweep,
    NodeSolution, SearchOptions, ShotKind};

/// Environment variable holding the default output directory.
pub const OUT_DIR_ENV: &str = "PLSHOOT_OUT";

/// Subcommand selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Sweep,
    FindNodes,
    CertifyRotation,
    Barrier,
    SizeBounds,
    Limits,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Sweep => "sweep",
            Command::FindNodes => "find-nodes",
            Command::CertifyRotation => "certify-rotation",
            Command::Barrier => "barrier",
            Command::SizeBounds => "size-bounds",
            Command::Limits => "limits",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "solve" => Command::Solve,
            "sweep" => Command::Sweep,
            "find-nodes" => Command::FindNodes,
            "certify-rotation" => Command::CertifyRotation,
            "barrier" => Command::Barrier,
            "size-bounds" => Command::SizeBounds,
            "limits" => Command::Limits,
            other => return Err(Error::Config(format!("unknown command {other:?}"))),
        })
    }
}

/// Full configuration of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub dim: f64,
    pub p: f64,
    pub m: f64,
    pub s: f64,
    /// tabulated nonlinearity overriding (m, s) when set
    pub table: Option<PathBuf>,
    pub lambda: Option<f64>,
    /// geometric sweep grid (lo, hi, count)
    pub lambda_grid: Option<(f64, f64, usize)>,
    pub k: Option<usize>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub event_tol: f64,
    pub double_zero_tol: f64,
    pub omega: f64,
    pub theta_growth: f64,
    pub r_max: Option<f64>,
    pub out_dir: PathBuf,
    /// echoed into the manifest for reproducibility bookkeeping
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let tol = Tolerances::default();
        RunConfig {
            command: Command::Solve,
            dim: 3.0,
            p: 2.0,
            m: 1.5,
            s: 4.0,
            table: None,
            lambda: None,
            lambda_grid: None,
            k: None,
            rel_tol: tol.rel_tol,
            abs_tol: tol.abs_tol,
            event_tol: tol.event_tol,
            double_zero_tol: tol.double_zero_tol,
            omega: 1.0 / 16.0,
            theta_growth: 0.904,
            r_max: None,
            out_dir: std::env::var_os(OUT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("out")),
            seed: 0,
        }
    }
}

impl RunConfig {
    /// Apply `key = value` assignments from a configuration document.
    /// Unknown keys are rejected.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("config line {}: expected key = value", idx + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("config line {}: {e}", idx + 1)))?;
        }
        Ok(())
    }

    /// Set one configuration key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let fl = |v: &str| -> Result<f64> {
            v.parse::<f64>().map_err(|_| Error::Config(format!("bad float {value:?} for {key}")))
        };
        match key {
            "command" => self.command = Command::parse(value)?,
            "N" | "dim" => self.dim = fl(value)?,
            "p" => self.p = fl(value)?,
            "m" => self.m = fl(value)?,
            "s" => self.s = fl(value)?,
            "table" => self.table = Some(PathBuf::from(value)),
            "lambda" => self.lambda = Some(fl(value)?),
            "lambda_lo" => {
                let (_, hi, n) = self.lambda_grid.unwrap_or((0.0, 0.0, 0));
                self.lambda_grid = Some((fl(value)?, hi, n));
            }
            "lambda_hi" => {
                let (lo, _, n) = self.lambda_grid.unwrap_or((0.0, 0.0, 0));
                self.lambda_grid = Some((lo, fl(value)?, n));
            }
            "lambda_steps" => {
                let (lo, hi, _) = self.lambda_grid.unwrap_or((0.0, 0.0, 0));
                let n = value
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad integer {value:?} for {key}")))?;
                self.lambda_grid = Some((lo, hi, n));
            }
            "k" => {
                self.k = Some(
                    value
                        .parse::<usize>()
                        .map_err(|_| Error::Config(format!("bad integer {value:?} for {key}")))?,
                )
            }
            "rel_tol" => self.rel_tol = fl(value)?,
            "abs_tol" => self.abs_tol = fl(value)?,
            "event_tol" => self.event_tol = fl(value)?,
            "double_zero_tol" => self.double_zero_tol = fl(value)?,
            "omega" => self.omega = fl(value)?,
            "theta_growth" => self.theta_growth = fl(value)?,
            "r_max" => self.r_max = Some(fl(value)?),
            "out_dir" => self.out_dir = PathBuf::from(value),
            "seed" => {
                self.seed = value
                    .parse::<u64>()
                    .map_err(|_| Error::Config(format!("bad integer {value:?} for {key}")))?
            }
            other => return Err(Error::Config(format!("unknown configuration key {other:?}"))),
        }
        Ok(())
    }

    /// Canonical key-value rendering (sorted fixed order), the input of the
    /// configuration hash.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command = {}", self.command.name());
        let _ = writeln!(out, "N = {}", self.dim);
        let _ = writeln!(out, "p = {}", self.p);
        match &self.table {
            Some(t) => {
                let _ = writeln!(out, "table = {}", t.display());
            }
            None => {
                let _ = writeln!(out, "m = {}", self.m);
                let _ = writeln!(out, "s = {}", self.s);
            }
        }
        if let Some(l) = self.lambda {
            let _ = writeln!(out, "lambda = {l}");
        }
        if let Some((lo, hi, n)) = self.lambda_grid {
            let _ = writeln!(out, "lambda_lo = {lo}");
            let _ = writeln!(out, "lambda_hi = {hi}");
            let _ = writeln!(out, "lambda_steps = {n}");
        }
        if let Some(k) = self.k {
            let _ = writeln!(out, "k = {k}");
        }
        let _ = writeln!(out, "rel_tol = {}", self.rel_tol);
        let _ = writeln!(out, "abs_tol = {}", self.abs_tol);
        let _ = writeln!(out, "event_tol = {}", self.event_tol);
        let _ = writeln!(out, "double_zero_tol = {}", self.double_zero_tol);
        let _ = writeln!(out, "omega = {}", self.omega);
        let _ = writeln!(out, "theta_growth = {}", self.theta_growth);
        if let Some(r) = self.r_max {
            let _ = writeln!(out, "r_max = {r}");
        }
        let _ = writeln!(out, "seed = {}", self.seed);
        out
    }

    /// FNV-1a hash of the canonical text.
    pub fn hash(&self) -> String {
        let mut h: u64 = 0xcbf29ce484222325;
        for b in self.canonical_text().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        format!("{h:016x}")
    }

    fn nonlinearity(&self) -> Result<Nonlinearity> {
        match &self.table {
            Some(path) => {
                let file = fs::File::open(path)?;
                Nonlinearity::from_table_csv(std::io::BufReader::new(file))
            }
            None => make_power_family(self.m, self.s, self.p, self.dim),
        }
    }

    fn tolerances(&self) -> Tolerances {
        Tolerances {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            event_tol: self.event_tol,
            double_zero_tol: self.double_zero_tol,
        }
    }

    fn problem_params(&self, lambda: f64, lm: &Landmarks, bar_time: f64) -> Result<ProblemParams> {
        let mut params = ProblemParams::new(self.dim, self.p, lambda)?;
        params.tol = self.tolerances();
        params.r_max = match self.r_max {
            Some(r) => r,
            None => default_r_max(lambda, self, lm, bar_time),
        };
        Ok(params)
    }
}

/// Default horizon: four times the support lower bound plus ten barrier
/// times, floored at a desk-scale constant (the dichotomy has no a-priori
/// upper bound on the resolution radius, so runs that hit it are reported
/// undetermined rather than guessed).
pub fn default_r_max(lambda: f64, cfg: &RunConfig, lm: &Landmarks, bar_time: f64) -> f64 {
    let pexp = match PExponent::new(cfg.p) {
        Ok(e) => e,
        Err(_) => return 100.0,
    };
    let nl = match cfg.nonlinearity() {
        Ok(n) => n,
        Err(_) => return 100.0,
    };
    let lower = size_bounds(lambda, cfg.theta_growth, &nl, &pexp, cfg.dim, lm)
        .map(|sb| sb.r_support_lo)
        .unwrap_or(0.0);
    (4.0 * lower + 10.0 * bar_time).max(60.0)
}

/// Run manifest: configuration echo, hash, artifact list, wall time.
#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config_hash: String,
    config: String,
    version: &'a str,
    artifacts: Vec<String>,
    wall_time_s: f64,
}

struct ArtifactSink<'a> {
    dir: &'a Path,
    hash: String,
    written: Vec<String>,
}

impl<'a> ArtifactSink<'a> {
    fn new(dir: &'a Path, hash: String) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(ArtifactSink { dir, hash, written: Vec::new() })
    }

    /// Atomic write: temporary file then rename.
    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let tmp = self.dir.join(format!(".{name}.tmp"));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(bytes)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, self.dir.join(name))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        #[derive(Serialize)]
        struct Tagged<'h, 'v, T: Serialize> {
            config_hash: &'h str,
            data: &'v T,
        }
        let text = serde_json::to_string_pretty(&Tagged { config_hash: &self.hash, data: value })
            .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
        self.write_bytes(name, text.as_bytes())
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Trajectory CSV: `r,u,uprime,v,E,rho,theta`, polar columns from the
/// angular trace where it extends.
fn trajectory_csv(traj: &Trajectory, trace: Option<&AngularTrace>, hash: &str) -> String {
    let pexp = traj.params.pexp;
    let mut out = String::new();
    let _ = writeln!(out, "# config_hash={hash}");
    let _ = writeln!(out, "r,u,uprime,v,E,rho,theta");
    for (st, e) in traj.samples() {
        let up = st.uprime(&pexp);
        let rho = pexp.p() * (crate::num::big_phi(pexp.p(), st.u) + crate::num::big_phi(pexp.q(), st.v));
        let theta = trace.and_then(|t| {
            if st.r <= t.r_end() {
                t.theta_at(st.r).ok()
            } else {
                None
            }
        });
        let _ = writeln!(out, "{},{},{},{},{},{},{}", st.r, st.u, up, st.v, e, rho, fmt_opt(theta));
    }
    out
}

fn sweep_csv(rows: &[crate::shoot::SweepRow], hash: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# config_hash={hash}");
    let _ = writeln!(out, "lambda,kind,k,r_energy_zero,r_support");
    for row in rows {
        let kind = match row.kind {
            ShotKind::Ak => "Ak",
            ShotKind::Ik => "Ik",
            ShotKind::Undetermined => "Undetermined",
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.lambda,
            kind,
            row.k,
            fmt_opt(row.r_energy_zero),
            fmt_opt(row.r_support)
        );
    }
    out
}

#[derive(Serialize)]
struct SolutionRecord {
    k: usize,
    lambda_k: f64,
    bracket: (f64, f64),
    r_support: f64,
    achieved_dist: f64,
    achieved_energy: f64,
    near_ik: bool,
}

impl SolutionRecord {
    fn of(sol: &NodeSolution) -> Self {
        SolutionRecord {
            k: sol.k,
            lambda_k: sol.lambda_k,
            bracket: sol.bracket,
            r_support: sol.r_support,
            achieved_dist: sol.achieved_dist,
            achieved_energy: sol.achieved_energy,
            near_ik: sol.near_ik,
        }
    }
}

/// Execute a configured run, writing artifacts into `config.out_dir`.
/// Returns the artifact names.
pub fn run(config: &RunConfig) -> Result<Vec<String>> {
    let started = Instant::now();
    let nl = config.nonlinearity()?;
    let pexp = PExponent::new(config.p)?;
    if !(config.dim > config.p) {
        return Err(Error::Config(format!(
            "need N > p, got N = {} and p = {}",
            config.dim, config.p
        )));
    }
    let lm = landmarks(&nl, config.p, config.dim)?;
    let report = verify_hypotheses(&nl, config.p, config.dim, config.theta_growth)?;
    if !report.all_pass() {
        let failing: Vec<&str> =
            report.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
        if config.table.is_some() {
            // tabulated nonlinearities get best-effort grid checks only:
            // the growth hypotheses involve limits a finite table cannot
            // decide, so failures are reported, not fatal
            eprintln!(
                "warning: tabulated nonlinearity fails the grid checks {failing:?} (range-limited?)"
            );
        } else {
            return Err(Error::Hypothesis(format!(
                "nonlinearity fails {failing:?}; rerun with parameters satisfying the growth hypotheses"
            )));
        }
    }
    let bar = barrier(&nl, config.p, &lm)?;
    let mut sink = ArtifactSink::new(&config.out_dir, config.hash())?;
    sink.write_json("hypotheses.json", &report)?;

    match config.command {
        Command::Solve => {
            let lambda = config
                .lambda
                .ok_or_else(|| Error::Config("solve requires lambda".into()))?;
            let params = config.problem_params(lambda, &lm, bar.a_time.max(bar.b_time))?;
            let traj = integrate(&params, &nl, &lm)?;
            let trig = PTrig::new(pexp);
            let trace = track_angle(&traj, &trig, &nl).ok();
            sink.write_bytes(
                "trajectory.csv",
                trajectory_csv(&traj, trace.as_ref(), &sink.hash.clone()).as_bytes(),
            )?;
            sink.write_json("events.json", &traj.events)?;
        }
        Command::Sweep => {
            let (lo, hi, n) = config
                .lambda_grid
                .ok_or_else(|| Error::Config("sweep requires lambda_lo/lambda_hi/lambda_steps".into()))?;
            if !(lo > 0.0 && hi > lo && n >= 2) {
                return Err(Error::Config(format!(
                    "sweep grid must satisfy 0 < lo < hi with >= 2 steps (got {lo}, {hi}, {n})"
                )));
            }
            let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
            let grid: Vec<f64> = (0..n).map(|i| lo * ratio.powi(i as i32)).collect();
            let params = config.problem_params(hi, &lm, bar.a_time.max(bar.b_time))?;
            let table = sweep(&grid, &params, &nl, &lm)?;
            sink.write_bytes("sweep.csv", sweep_csv(&table.rows, &sink.hash.clone()).as_bytes())?;
            #[derive(Serialize)]
            struct Flags {
                refine_between: Vec<usize>,
            }
            sink.write_json("sweep_flags.json", &Flags { refine_between: table.refine_between })?;
        }
        Command::FindNodes => {
            let k = config.k.ok_or_else(|| Error::Config("find-nodes requires k".into()))?;
            // horizon generous enough for the largest amplitudes probed
            let params = config.problem_params(lm.big_a, &lm, bar.a_time.max(bar.b_time))?;
            let sol = find_lambda_k(k, &params, &nl, &lm, &SearchOptions::default())?;
            let horizon = sol.r_support + bar.a_time.max(bar.b_time) + 1.0;
            let published = if sol.near_ik { sol.clone() } else { extend_compact_support(&sol, horizon)? };
            sink.write_json("solution.json", &SolutionRecord::of(&published))?;
            let trig = PTrig::new(pexp);
            let trace = track_angle(&published.trajectory, &trig, &nl).ok();
            sink.write_bytes(
                "solution_trajectory.csv",
                trajectory_csv(&published.trajectory, trace.as_ref(), &sink.hash.clone()).as_bytes(),
            )?;
            #[derive(Serialize)]
            struct Support {
                check: crate::bounds::SupportCheck,
                barrier_a_time: f64,
                barrier_b_time: f64,
            }
            let check = support_upper_check(&published, &bar, &lm, None);
            sink.write_json(
                "support_check.json",
                &Support { check, barrier_a_time: bar.a_time, barrier_b_time: bar.b_time },
            )?;
        }
        Command::CertifyRotation => {
            let cert = rotation_constants(&nl, config.p, config.dim, config.omega)?;
            sink.write_json("certificate.json", &cert)?;
            if let Some(lambda) = config.lambda {
                let params = config.problem_params(lambda, &lm, bar.a_time.max(bar.b_time))?;
                let traj = integrate(&params, &nl, &lm)?;
                let trig = PTrig::new(pexp);
                let trace = track_angle(&traj, &trig, &nl)?;
                let violations = check_rotation_bound(&trace, &cert, config.p);
                sink.write_json("violations.json", &violations)?;
            }
        }
        Command::Barrier => {
            #[derive(Serialize)]
            struct BarrierOut {
                a_time: f64,
                b_time: f64,
                panels: usize,
            }
            sink.write_json(
                "barrier.json",
                &BarrierOut { a_time: bar.a_time, b_time: bar.b_time, panels: bar.panels },
            )?;
            let mut csv = String::new();
            let _ = writeln!(csv, "# config_hash={}", sink.hash);
            let _ = writeln!(csv, "r,w");
            let n = 256;
            for i in 0..=n {
                let r = bar.a_time * i as f64 / n as f64;
                let _ = writeln!(csv, "{},{}", r, bar.eval(r));
            }
            sink.write_bytes("barrier_profile.csv", csv.as_bytes())?;
        }
        Command::SizeBounds => {
            let lambda = config
                .lambda
                .ok_or_else(|| Error::Config("size-bounds requires lambda".into()))?;
            let sb = size_bounds(lambda, config.theta_growth, &nl, &pexp, config.dim, &lm)?;
            let mut params = config.problem_params(lambda, &lm, bar.a_time.max(bar.b_time))?;
            params.stop_on_trapped = false;
            params.r_max = params.r_max.min(4.0 * sb.s_hi.max(1.0));
            let traj = integrate(&params, &nl, &lm)?;
            let measured = measure_s_theta(&traj, config.theta_growth);
            #[derive(Serialize)]
            struct SizeOut {
                lambda: f64,
                #[serde(rename = "S_lo")]
                s_lo: f64,
                #[serde(rename = "S_measured")]
                s_measured: Option<f64>,
                #[serde(rename = "S_hi")]
                s_hi: f64,
                r_support_lo: f64,
                r_support_measured: Option<f64>,
                pass: Option<bool>,
                power_constant: f64,
                growth_margin: f64,
            }
            let pass = measured.map(|s| sb.s_lo <= s && s <= sb.s_hi);
            sink.write_json(
                "size_bounds.json",
                &SizeOut {
                    lambda: sb.lambda,
                    s_lo: sb.s_lo,
                    s_measured: measured,
                    s_hi: sb.s_hi,
                    r_support_lo: sb.r_support_lo,
                    r_support_measured: None,
                    pass,
                    power_constant: sb.power_constant,
                    growth_margin: sb.kappa,
                },
            )?;
        }
        Command::Limits => {
            let lambda = config
                .lambda
                .ok_or_else(|| Error::Config("limits requires lambda".into()))?;
            let mut params = config.problem_params(lambda, &lm, bar.a_time.max(bar.b_time))?;
            params.stop_on_trapped = false;
            let traj = integrate(&params, &nl, &lm)?;
            let report = asymptotic_limit(&traj, &nl, &lm);
            sink.write_json("limits.json", &report)?;
            // classification context alongside the diagnostics
            let cls = classify(lambda, &params, &nl, &lm)?;
            #[derive(Serialize)]
            struct Cls {
                kind: ShotKind,
                k: usize,
                r_energy_zero: Option<f64>,
            }
            sink.write_json(
                "classification.json",
                &Cls { kind: cls.kind, k: cls.k, r_energy_zero: cls.r_energy_zero },
            )?;
        }
    }

    let manifest = Manifest {
        command: config.command.name(),
        config_hash: config.hash(),
        config: config.canonical_text(),
        version: env!("CARGO_PKG_VERSION"),
        artifacts: sink.written.clone(),
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Config(format!("manifest serialization failed: {e}")))?;
    sink.write_bytes("manifest.json", text.as_bytes())?;
    Ok(sink.written)
}
