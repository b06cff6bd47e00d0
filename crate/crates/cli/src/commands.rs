//! The three subcommands.

use std::path::{Path, PathBuf};

use kepler_sphere::conserved::{classify_orbit, conserved_set, orbital_period, pi_vector};
use kepler_sphere::dynamics::{integrate, CollisionRecord, Method};
use kepler_sphere::gnomonic::{kepler_hamiltonian, psi};
use kepler_sphere::ligon_schaaf::{delaunay_hamiltonian, ls_map, regularized_continuation};
use kepler_sphere::moser::{hodocycle, invert};
use kepler_sphere::verify::{self, Report, Suite, VerifyOptions};
use kepler_sphere::{ConservedSet, KeplerError, KeplerParams, SpherePhasePoint, Tolerances, Trajectory};
use serde::Serialize;

use crate::config::{self, Resolved};
use crate::error::{exit, CliError, Result};
use crate::record::{trajectory_table, Table, TrajectoryRecord, TRAJECTORY_COLUMNS};

/// Image chart exported by `regularize`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    LigonSchaaf,
    Moser,
    Gnomonic,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Self::LigonSchaaf => "ligon-schaaf",
            Self::Moser => "moser",
            Self::Gnomonic => "gnomonic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateJson {
    pub q: [f64; 4],
    pub v: [f64; 4],
}

impl From<&SpherePhasePoint> for StateJson {
    fn from(p: &SpherePhasePoint) -> Self {
        Self { q: p.q.0, v: p.v.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollisionJson {
    pub t: f64,
    pub tau: f64,
    pub s: f64,
    pub margin: f64,
    pub guard: f64,
    pub last_valid: StateJson,
}

impl From<&CollisionRecord<f64>> for CollisionJson {
    fn from(c: &CollisionRecord<f64>) -> Self {
        Self {
            t: c.last_valid.t,
            tau: c.last_valid.tau,
            s: c.last_valid.s,
            margin: c.margin,
            guard: c.guard,
            last_valid: (&c.last_valid.point).into(),
        }
    }
}

/// Largest drifts of the first integrals along a run. `H` and `E` are
/// relative to `|E₀|`, `μ` to `|μ₀|`, `A` to `γ`, and `B` to `γ/|μ₀|`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Drift {
    pub h: f64,
    pub energy: f64,
    pub mu: f64,
    pub a: f64,
    pub b: f64,
}

impl Drift {
    pub fn max(&self) -> f64 {
        [self.h, self.energy, self.mu, self.a, self.b].into_iter().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    /// `completed` or `collision`.
    pub status: &'static str,
    pub gamma: f64,
    pub method: Method,
    pub dt: f64,
    pub t_end: f64,
    pub samples: usize,
    pub initial: StateJson,
    pub hamiltonian: f64,
    pub energy: f64,
    pub eps: f64,
    pub classification: String,
    pub period: Option<f64>,
    pub drift: Drift,
    pub tol_drift: f64,
    pub drift_within_tolerance: bool,
    pub max_constraint_residual: f64,
    pub collision: Option<CollisionJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuationJson {
    /// `τ` of the hand-over state; continuation rows are offset by it.
    pub start_tau: f64,
    pub start: StateJson,
    pub period: f64,
    pub periods: f64,
    pub samples: usize,
    pub mapped_back: usize,
    pub hamiltonian_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularizeSummary {
    pub mode: Mode,
    pub run: RunSummary,
    /// Largest `|⟨x,x⟩ − 1|` (ligon-schaaf), hodocycle distance (moser), or
    /// `|H_K − E|` (gnomonic) over the image rows.
    pub image_residual: f64,
    pub continuation: Option<ContinuationJson>,
}

/// What a command wrote and how the process should exit.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: u8,
    pub files: Vec<PathBuf>,
    pub message: String,
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("summaries always serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn initial_integrals(r: &Resolved) -> Result<ConservedSet> {
    Ok(conserved_set(&r.start, &r.params)?)
}

fn drift(traj: &Trajectory, c0: &ConservedSet, params: &KeplerParams) -> Drift {
    let mu0 = c0.mu.norm();
    let (e_scale, b_scale) = (c0.energy.abs().max(f64::MIN_POSITIVE), params.gamma / mu0);
    let mut d = Drift::default();
    for s in &traj.samples {
        let Ok(c) = conserved_set(&s.point, params) else {
            return Drift { h: f64::NAN, energy: f64::NAN, mu: f64::NAN, a: f64::NAN, b: f64::NAN };
        };
        d.h = d.h.max((c.h - c0.h).abs() / e_scale);
        d.energy = d.energy.max((c.energy - c0.energy).abs() / e_scale);
        d.mu = d.mu.max((c.mu - c0.mu).max_abs() / mu0);
        d.a = d.a.max((c.a - c0.a).max_abs() / params.gamma);
        d.b = d.b.max((c.b - c0.b).max_abs() / b_scale);
    }
    d
}

fn summarize(r: &Resolved, c0: &ConservedSet, traj: &Trajectory, records: &[TrajectoryRecord]) -> RunSummary {
    let drift = drift(traj, c0, &r.params);
    let tol = r.tolerances.tol_drift;
    let max_constraint_residual =
        records.iter().map(|x| x.c1_residual.abs().max(x.c2_residual.abs())).fold(0.0, f64::max);
    RunSummary {
        scenario: r.output.name.clone(),
        status: if traj.collision.is_some() { "collision" } else { "completed" },
        gamma: r.params.gamma,
        method: r.integrator.method,
        dt: r.integrator.dt,
        t_end: r.integrator.t_end,
        samples: traj.samples.len(),
        initial: (&r.start).into(),
        hamiltonian: c0.h,
        energy: c0.energy,
        eps: c0.eps,
        classification: classify_orbit(c0, r.tolerances.tol_identity).to_string(),
        period: orbital_period(c0, &r.params).ok(),
        drift,
        tol_drift: tol,
        drift_within_tolerance: drift.max() <= tol,
        max_constraint_residual,
        collision: traj.collision.as_ref().map(Into::into),
    }
}

fn run_scenario(r: &Resolved) -> Result<(ConservedSet, Trajectory, Vec<TrajectoryRecord>)> {
    let c0 = initial_integrals(r)?;
    let traj = integrate(&r.start, &r.params, &r.integrator)?;
    let records = traj.samples.iter().map(|s| TrajectoryRecord::from_sample(s, &r.params)).collect();
    Ok((c0, traj, records))
}

/// `simulate`: trajectory CSV plus JSON summary. A collision-guard stop still
/// writes both files and exits with 3.
pub fn simulate(config_path: &Path, out: &Path, tol_scale: f64) -> Result<Outcome> {
    let r = config::load(config_path, tol_scale)?;
    let (c0, traj, records) = run_scenario(&r)?;
    ensure_dir(out)?;
    let mut files = Vec::new();
    if r.output.csv {
        let path = out.join(format!("{}.csv", r.output.name));
        trajectory_table(&records).write(&path)?;
        files.push(path);
    }
    let summary = summarize(&r, &c0, &traj, &records);
    let path = out.join(format!("{}.summary.json", r.output.name));
    write_json(&path, &summary)?;
    files.push(path);
    let (exit_code, message) = match &traj.collision {
        Some(c) => (
            exit::COLLISION,
            format!("collision guard tripped at t = {:.6e} (margin {:.3e}); last valid state recorded", c.last_valid.t, c.margin),
        ),
        None => (exit::SUCCESS, format!("{} samples, max drift {:.3e}", records.len(), summary.drift.max())),
    };
    Ok(Outcome { exit_code, files, message })
}

/// `verify`: runs a property suite and writes its JSON report.
pub fn verify(suite: &str, seeds: u64, mutate_phi_c: bool, out: Option<&Path>, tol_scale: f64) -> Result<(Outcome, Report)> {
    let bad = |msg: String| CliError::config("<command line>", msg);
    let suite: Suite = suite.parse().map_err(|e: KeplerError| bad(e.to_string()))?;
    if seeds == 0 {
        return Err(bad("--seeds must be at least 1".into()));
    }
    if !(tol_scale > 0.0 && tol_scale.is_finite()) {
        return Err(bad(format!("--tol-scale must be positive, got {tol_scale}")));
    }
    let opts = VerifyOptions { seeds, mutate_phi_c, tolerances: Tolerances::default().scaled(tol_scale), ..Default::default() };
    let report = verify::run(suite, &opts)?;
    let mut files = Vec::new();
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let path = dir.join(format!("verify-{}.json", suite.name()));
        write_json(&path, &report)?;
        files.push(path);
    }
    let failed = report.failures().count();
    let outcome = Outcome {
        exit_code: if report.passed { exit::SUCCESS } else { exit::VERIFY_FAILED },
        files,
        message: format!("{}: {} checks, {failed} failed", suite.name(), report.checks.len()),
    };
    Ok((outcome, report))
}

fn image_columns(mode: Mode) -> Vec<&'static str> {
    match mode {
        Mode::LigonSchaaf => {
            vec!["x0", "x1", "x2", "x3", "y0", "y1", "y2", "y3", "H_delaunay", "x_norm_sq", "xy_dot"]
        }
        Mode::Moser => vec!["pi1", "pi2", "pi3", "w1", "w2", "w3", "hodocycle_residual"],
        Mode::Gnomonic => vec!["H_K", "L1", "L2", "L3"],
    }
}

/// Image row for one source sample, NaN where the chart is undefined.
fn image_row(mode: Mode, p: &SpherePhasePoint, c0: &ConservedSet, params: &KeplerParams) -> Result<Vec<f64>> {
    let width = image_columns(mode).len();
    let row = match mode {
        Mode::LigonSchaaf => ls_map(p, params).ok().map(|d| {
            let mut row: Vec<f64> = d.x.0.iter().chain(&d.y.0).copied().collect();
            row.push(delaunay_hamiltonian(&d, params).unwrap_or(f64::NAN));
            row.push(d.x.norm_squared());
            row.push(d.x.dot(&d.y));
            row
        }),
        Mode::Moser => {
            let hodo = hodocycle(c0, params)?;
            let pi = pi_vector(p);
            let w = invert(&pi).map(|w| w.0).unwrap_or([f64::NAN; 3]);
            let mut row: Vec<f64> = pi.0.iter().chain(&w).copied().collect();
            row.push(hodo.residual(&pi));
            Some(row)
        }
        Mode::Gnomonic => psi(p).ok().map(|e| {
            let mut row = vec![kepler_hamiltonian(&e, params).unwrap_or(f64::NAN)];
            row.extend_from_slice(&e.q.cross(&e.v).0);
            row
        }),
    };
    Ok(row.unwrap_or_else(|| vec![f64::NAN; width]))
}

fn image_residual(mode: Mode, row: &[f64], energy: f64) -> f64 {
    match mode {
        Mode::LigonSchaaf => (row[9] - 1.0).abs(),
        Mode::Moser => row[6],
        Mode::Gnomonic => (row[0] - energy).abs(),
    }
}

/// `regularize`: paired CSV of source records and image coordinates. In
/// ligon-schaaf mode the run is continued through the Delaunay flow from the
/// last valid state and mapped back to TS³ where defined.
pub fn regularize(config_path: &Path, mode: Mode, out: &Path, tol_scale: f64) -> Result<Outcome> {
    let r = config::load(config_path, tol_scale)?;
    let c0 = initial_integrals(&r)?;
    if c0.energy >= 0.0 || c0.energy.is_nan() {
        return Err(KeplerError::PositiveEnergy { energy: c0.energy }.into());
    }
    let (_, traj, records) = run_scenario(&r)?;
    ensure_dir(out)?;
    let stem = format!("{}.{}", r.output.name, mode.name());
    let mut files = Vec::new();

    let mut columns: Vec<&str> = TRAJECTORY_COLUMNS.to_vec();
    columns.extend(image_columns(mode));
    let mut paired = Table::new(&columns);
    let mut residual = 0.0f64;
    for (sample, rec) in traj.samples.iter().zip(&records) {
        let image = image_row(mode, &sample.point, &c0, &r.params)?;
        residual = residual.max(image_residual(mode, &image, c0.energy));
        let mut row = rec.to_row();
        row.extend(image);
        paired.push(row);
    }
    let path = out.join(format!("{stem}.csv"));
    paired.write(&path)?;
    files.push(path);

    let continuation = if mode == Mode::LigonSchaaf {
        let hand_over = match &traj.collision {
            Some(c) => c.last_valid,
            None => *traj.last().expect("a trajectory has at least its initial sample"),
        };
        let cont = regularized_continuation(&hand_over.point, &r.params, r.regularize.periods, r.regularize.samples_per_period)?;
        let mut table = Table::new(&[
            "tau", "x0", "x1", "x2", "x3", "y0", "y1", "y2", "y3", "H_delaunay", "mapped", "q0", "q1", "q2", "q3",
            "v0", "v1", "v2", "v3", "E",
        ]);
        let mut mapped_back = 0;
        for s in &cont.samples {
            let mut row = vec![hand_over.tau + s.tau];
            row.extend(s.delaunay.x.0.iter().chain(&s.delaunay.y.0));
            row.push(delaunay_hamiltonian(&s.delaunay, &r.params).unwrap_or(f64::NAN));
            match &s.sphere {
                Some(p) => {
                    mapped_back += 1;
                    row.push(1.0);
                    row.extend(p.q.0.iter().chain(&p.v.0));
                    row.push(conserved_set(p, &r.params).map(|c| c.energy).unwrap_or(f64::NAN));
                }
                None => {
                    row.push(0.0);
                    row.extend([f64::NAN; 9]);
                }
            }
            table.push(row);
        }
        let path = out.join(format!("{stem}.continuation.csv"));
        table.write(&path)?;
        files.push(path);
        Some(ContinuationJson {
            start_tau: hand_over.tau,
            start: (&hand_over.point).into(),
            period: cont.period,
            periods: r.regularize.periods,
            samples: cont.samples.len(),
            mapped_back,
            hamiltonian_drift: cont.hamiltonian_drift,
        })
    } else {
        None
    };

    let summary = RegularizeSummary { mode, run: summarize(&r, &c0, &traj, &records), image_residual: residual, continuation };
    let path = out.join(format!("{stem}.summary.json"));
    write_json(&path, &summary)?;
    files.push(path);

    // Only the Delaunay continuation carries a run past the guard.
    let (exit_code, message) = match (&traj.collision, mode) {
        (Some(c), Mode::LigonSchaaf) => {
            (exit::SUCCESS, format!("collision guard tripped at t = {:.6e}; continued through the Delaunay flow", c.last_valid.t))
        }
        (Some(c), _) => (exit::COLLISION, format!("collision guard tripped at t = {:.6e}; image written up to the last valid state", c.last_valid.t)),
        (None, _) => (exit::SUCCESS, format!("{} image rows, max image residual {residual:.3e}", records.len())),
    };
    Ok(Outcome { exit_code, files, message })
}
