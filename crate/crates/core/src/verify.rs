//! Seeded property suites that drive every identity of the crate and report
//! the worst residual of each against its tolerance.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::conserved::{
    classify_orbit, conserved_set, orbit_equation_residual, orbital_period, sample_elliptic_orbit, OrbitClass,
};
use crate::dynamics::brackets::{
    bracket, coordinate, grad_hamiltonian, grad_inv_spatial_norm, grad_mu, grad_pi, grad_runge_lenz,
    grad_scaled_runge_lenz, grad_spatial_norm_sq, structure_matrix, structure_matrix_from_constraints,
};
use crate::dynamics::{hamiltonian, integrate, potential, vector_field, IntegratorConfig, KeplerParams, Trajectory};
use crate::error::{KeplerError, Result};
use crate::geometry::{fixture_c1, levi_civita, sample_phase_point, SpherePhasePoint, Tolerances};
use crate::gnomonic::{
    composition_check, composition_check_corrupted, intertwine_euclid, moser_correspondence, orbit_image_residual,
    phi_c, phi_c_energy_residual, phi_c_inverse, psi, psi_inverse, pushforward_check, symplectic_witness,
};
use crate::ligon_schaaf::{
    delaunay_flow, delaunay_hamiltonian, delaunay_rate, delaunay_rk4, equivalence_check, flow_conjugation_residual,
    frame_derivative_check, ls_frame, ls_map, momentum_delaunay, momentum_j, momentum_rho,
};
use crate::moser::{
    chart_lengths, curvature_check, energy_identity_residual, geodesic_residual, hodocycle, hodograph_metric_length,
    hodograph_speed_residual,
};
use crate::gnomonic::ls_map_inverse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Brackets,
    Conserved,
    Moser,
    LigonSchaaf,
    Gnomonic,
    All,
}

impl Suite {
    pub const MODULES: [Suite; 5] = [Suite::Brackets, Suite::Conserved, Suite::Moser, Suite::LigonSchaaf, Suite::Gnomonic];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Brackets => "brackets",
            Suite::Conserved => "conserved",
            Suite::Moser => "moser",
            Suite::LigonSchaaf => "ligon-schaaf",
            Suite::Gnomonic => "gnomonic",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = KeplerError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::MODULES
            .into_iter()
            .chain([Suite::All])
            .find(|m| m.name() == s)
            .ok_or_else(|| KeplerError::InvalidConfig(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Number of seeded points; orbit checks use at most 20 of them.
    pub seeds: u64,
    pub gamma: f64,
    pub tolerances: Tolerances<f64>,
    /// Replace `Φ_c` by a sign-flipped version in the composition check.
    pub mutate_phi_c: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seeds: 100, gamma: 1.0, tolerances: Tolerances::default(), mutate_phi_c: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// The worst value must not exceed the tolerance.
    AtMost,
    /// The smallest value must exceed the tolerance.
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    /// Worst residual (largest for `AtMost`, smallest for `Above`); NaN when
    /// some evaluation failed.
    pub value: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub samples: usize,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub suite: Suite,
    pub seeds: u64,
    pub gamma: f64,
    pub mutate_phi_c: bool,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Running worst value of one identity.
struct Tally {
    suite: &'static str,
    name: String,
    tolerance: f64,
    relation: Relation,
    worst: f64,
    samples: usize,
    error: Option<String>,
}

impl Tally {
    fn new(suite: &'static str, name: &str, tolerance: f64, relation: Relation) -> Self {
        let worst = match relation {
            Relation::AtMost => 0.0,
            Relation::Above => f64::INFINITY,
        };
        Self { suite, name: name.to_owned(), tolerance, relation, worst, samples: 0, error: None }
    }

    fn push(&mut self, value: Result<f64>) {
        self.samples += 1;
        match value {
            Ok(v) if v.is_nan() => self.fail("NaN residual".into()),
            Ok(v) => {
                self.worst = match self.relation {
                    Relation::AtMost => self.worst.max(v),
                    Relation::Above => self.worst.min(v),
                }
            }
            Err(e) => self.fail(e.to_string()),
        }
    }

    fn fail(&mut self, msg: String) {
        self.error.get_or_insert(msg);
    }

    fn finish(self) -> Check {
        let value = if self.error.is_some() { f64::NAN } else { self.worst };
        let passed = self.error.is_none()
            && self.samples > 0
            && match self.relation {
                Relation::AtMost => value <= self.tolerance,
                Relation::Above => value > self.tolerance,
            };
        Check {
            suite: self.suite,
            name: self.name,
            value,
            tolerance: self.tolerance,
            relation: self.relation,
            samples: self.samples,
            passed,
            error: self.error,
        }
    }
}

/// Collects tallies in insertion order.
struct Book {
    suite: &'static str,
    tallies: Vec<Tally>,
}

impl Book {
    fn new(suite: Suite) -> Self {
        Self { suite: suite.name(), tallies: Vec::new() }
    }

    fn at_most(&mut self, name: &str, tol: f64) -> usize {
        self.tallies.push(Tally::new(self.suite, name, tol, Relation::AtMost));
        self.tallies.len() - 1
    }

    fn above(&mut self, name: &str, tol: f64) -> usize {
        self.tallies.push(Tally::new(self.suite, name, tol, Relation::Above));
        self.tallies.len() - 1
    }

    fn push(&mut self, id: usize, value: Result<f64>) {
        self.tallies[id].push(value);
    }

    fn finish(self) -> Vec<Check> {
        self.tallies.into_iter().map(Tally::finish).collect()
    }
}

/// Runs `suite` (or every suite for [`Suite::All`]).
pub fn run(suite: Suite, opts: &VerifyOptions) -> Result<Report> {
    opts.tolerances.validate()?;
    let params = KeplerParams::new(opts.gamma)?;
    let suites: Vec<Suite> = if suite == Suite::All { Suite::MODULES.to_vec() } else { vec![suite] };
    let mut checks = Vec::new();
    let ctx = Context::new(opts, params);
    for s in suites {
        checks.extend(match s {
            Suite::Brackets => brackets_suite(&ctx),
            Suite::Conserved => conserved_suite(&ctx),
            Suite::Moser => moser_suite(&ctx),
            Suite::LigonSchaaf => ligon_schaaf_suite(&ctx),
            Suite::Gnomonic => gnomonic_suite(&ctx),
            Suite::All => unreachable!(),
        });
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(Report { suite, seeds: opts.seeds, gamma: opts.gamma, mutate_phi_c: opts.mutate_phi_c, passed, checks })
}

/// Phase-space displacement for the fourth-order directional differences.
pub const DIRECTIONAL_STEP: f64 = 1e-4;

/// Maximum number of integrated orbits per suite.
const MAX_ORBITS: u64 = 20;

struct Context<'a> {
    opts: &'a VerifyOptions,
    params: KeplerParams<f64>,
    tol: Tolerances<f64>,
}

struct Orbit {
    traj: Trajectory<f64>,
    period: f64,
}

impl<'a> Context<'a> {
    fn new(opts: &'a VerifyOptions, params: KeplerParams<f64>) -> Self {
        Self { opts, params, tol: opts.tolerances }
    }

    fn points(&self) -> impl Iterator<Item = Result<SpherePhasePoint<f64>>> + '_ {
        let g = self.opts.gamma;
        (0..self.opts.seeds).map(move |seed| sample_phase_point(seed, (-g, -0.1 * g), g))
    }

    /// FixtureC1 (for γ = 1) followed by seeded elliptic orbits, each
    /// integrated over `periods` revolutions.
    fn orbits(&self, periods: f64) -> Vec<Result<Orbit>> {
        let mut starts = Vec::new();
        if self.opts.gamma == 1.0 {
            starts.push(Ok(fixture_c1::point::<f64>()));
        }
        for seed in 0..self.opts.seeds.min(MAX_ORBITS) {
            starts.push(sample_elliptic_orbit(seed, (0.05, 0.9), (0.3, 1.2), &self.params).map(|(p, _)| p));
        }
        starts.into_iter().map(|p| p.and_then(|p| self.orbit(&p, periods))).collect()
    }

    fn orbit(&self, p: &SpherePhasePoint<f64>, periods: f64) -> Result<Orbit> {
        let period = orbital_period(&conserved_set(p, &self.params)?, &self.params)?;
        let mut cfg = IntegratorConfig::dop853(period / 256.0, period * periods);
        cfg.rtol = 1e-13;
        cfg.atol = 1e-13;
        let traj = integrate(p, &self.params, &cfg)?;
        Ok(Orbit { traj: traj.into_result()?, period })
    }
}

fn rel(diff: f64, scale: f64) -> f64 {
    diff / scale.max(f64::MIN_POSITIVE)
}

fn brackets_suite(ctx: &Context) -> Vec<Check> {
    let mut b = Book::new(Suite::Brackets);
    let tol = ctx.tol.tol_identity;
    let params = &ctx.params;
    let ids = [
        b.at_most("structure_matrix_vs_constraint_oracle", tol),
        b.at_most("antisymmetry", tol),
        b.at_most("field_is_pi_grad_h", tol),
        b.at_most("tangency", tol),
        b.at_most("hamiltonian_decomposition", tol),
        b.at_most("mu_mu", tol),
        b.at_most("mu_a", tol),
        b.at_most("a_a", tol),
        b.at_most("mu_q", tol),
        b.at_most("mu_v", tol),
        b.at_most("mu_pi", tol),
        b.at_most("pi_pi", tol),
        b.at_most("mu_norm_sq", tol),
        b.at_most("pi_inv_norm", tol),
        b.at_most("pi_q", tol),
    ];
    for p in ctx.points() {
        let p = match p {
            Ok(p) => p,
            Err(e) => {
                for &id in &ids {
                    b.push(id, Err(e.clone()));
                }
                continue;
            }
        };
        let pi_mat = structure_matrix(&p);
        b.push(ids[0], Ok(pi_mat.max_diff(&structure_matrix_from_constraints(&p))));
        b.push(ids[1], Ok(pi_mat.antisymmetry_defect()));
        b.push(
            ids[2],
            (|| {
                let (qd, vd) = vector_field(&p, params)?;
                let field = SpherePhasePoint::new(qd, vd).to_array();
                let via = pi_mat.apply(&grad_hamiltonian(&p, params)?);
                let scale = field.iter().fold(1.0f64, |a, x| a.max(x.abs()));
                Ok(field.iter().zip(&via).fold(0.0f64, |a, (x, y)| a.max((x - y).abs())) / scale)
            })(),
        );
        b.push(
            ids[3],
            (|| {
                let (qd, vd) = vector_field(&p, params)?;
                let scale = 1.0f64.max(vd.max_abs());
                Ok(p.q.dot(&qd).abs().max((p.v.dot(&qd) + p.q.dot(&vd)).abs()) / scale)
            })(),
        );
        b.push(
            ids[4],
            (|| {
                let h = hamiltonian(&p, params)?;
                let cs = conserved_set(&p, params)?;
                let rhs = 0.5 * (cs.pi.norm_squared() + cs.mu.norm_squared()) + potential(&p.q, params)?;
                Ok(rel((h - rhs).abs(), 1.0f64.max(h.abs())))
            })(),
        );
        let (q, v) = (p.qs(), p.vs());
        let cs = match conserved_set(&p, params) {
            Ok(cs) => cs,
            Err(e) => {
                b.push(ids[5], Err(e));
                continue;
            }
        };
        let h = cs.h;
        let mu2 = cs.mu.norm_squared();
        let r = q.norm();
        let mut worst = [0.0f64; 10];
        let mut put = |slot: usize, got: f64, want: f64, scale: f64| {
            worst[slot] = worst[slot].max((got - want).abs() / scale.max(1.0));
        };
        let a_scale = cs.a.max_abs().max(params.gamma);
        let aa_scale = (2.0 * (h - mu2)).abs() * cs.mu.max_abs();
        for i in 0..3 {
            for j in 0..3 {
                let eps_mu: f64 = (0..3).map(|k| levi_civita::<f64>(i, j, k) * cs.mu[k]).sum();
                let eps_a: f64 = (0..3).map(|k| levi_civita::<f64>(i, j, k) * cs.a[k]).sum();
                let eps_q: f64 = (0..3).map(|k| levi_civita::<f64>(i, j, k) * q[k]).sum();
                let eps_v: f64 = (0..3).map(|k| levi_civita::<f64>(i, j, k) * v[k]).sum();
                let eps_pi: f64 = (0..3).map(|k| levi_civita::<f64>(i, j, k) * cs.pi[k]).sum();
                let (gm_i, gm_j) = (grad_mu(&p, i), grad_mu(&p, j));
                let (ga_i, ga_j) = (grad_runge_lenz(&p, params, i), grad_runge_lenz(&p, params, j));
                let (gp_i, gp_j) = (grad_pi(&p, i), grad_pi(&p, j));
                put(0, bracket(&gm_i, &gm_j, &p), eps_mu, cs.mu.max_abs());
                put(1, bracket(&gm_i, &ga_j, &p), eps_a, a_scale);
                put(2, bracket(&ga_i, &ga_j, &p), -2.0 * (h - mu2) * eps_mu, aa_scale);
                put(3, bracket(&gm_i, &coordinate(j + 1), &p), eps_q, 1.0);
                put(4, bracket(&gm_i, &coordinate(j + 5), &p), eps_v, v.max_abs());
                put(5, bracket(&gm_i, &gp_j, &p), eps_pi, cs.pi.max_abs());
                put(6, bracket(&gp_i, &gp_j, &p), q[i] * v[j] - q[j] * v[i], v.max_abs());
                // Off the diagonal this vanishes; on it the bracket is −q0.
                let pi_q = if i == j { -p.q0() } else { 0.0 };
                put(9, bracket(&gp_i, &coordinate(j + 1), &p), pi_q, 1.0);
            }
            put(7, bracket(&grad_mu(&p, i), &grad_spatial_norm_sq(&p), &p), 0.0, v.max_abs());
            put(8, bracket(&grad_pi(&p, i), &grad_inv_spatial_norm(&p), &p), p.q0() * q[i] / (r * r * r), 1.0 / (r * r));
        }
        for (slot, &w) in worst.iter().enumerate() {
            b.push(ids[5 + slot], Ok(w));
        }
    }
    b.finish()
}

fn conserved_suite(ctx: &Context) -> Vec<Check> {
    let mut b = Book::new(Suite::Conserved);
    let params = &ctx.params;
    let t = &ctx.tol;
    let relations = b.at_most("invariant_relations", t.tol_identity);
    let drift_ids = [
        b.at_most("drift_h", t.tol_drift),
        b.at_most("drift_e", t.tol_drift),
        b.at_most("drift_mu", t.tol_drift),
        b.at_most("drift_a", t.tol_drift),
        b.at_most("drift_b", t.tol_drift),
    ];
    let orbit_eq = b.at_most("orbit_equation", t.tol_drift);
    let hemisphere = b.above("min_q0_on_bound_orbits", 0.0);
    let closure = b.at_most("closure_after_one_period", t.tol_drift);
    let circle = b.at_most("fixture_is_circle", 0.0);

    for p in ctx.points() {
        b.push(relations, p.and_then(|p| Ok(conserved_set(&p, params)?.invariant_residuals(params.gamma).max())));
    }
    if ctx.opts.gamma == 1.0 {
        let cs = conserved_set(&fixture_c1::point::<f64>(), params);
        b.push(circle, cs.map(|cs| if classify_orbit(&cs, t.tol_identity) == OrbitClass::Circle { 0.0 } else { 1.0 }));
    }
    for orbit in ctx.orbits(2.0) {
        let orbit = match orbit {
            Ok(o) => o,
            Err(e) => {
                for id in drift_ids.into_iter().chain([orbit_eq, hemisphere, closure]) {
                    b.push(id, Err(e.clone()));
                }
                continue;
            }
        };
        let samples = &orbit.traj.samples;
        let first = conserved_set(&samples[0].point, params);
        let (first, samples) = match first {
            Ok(c) => (c, samples),
            Err(e) => {
                b.push(drift_ids[0], Err(e));
                continue;
            }
        };
        // B is measured against the hodocycle radius γ/|μ|, since it vanishes on circles.
        let scales = [first.energy.abs(), first.energy.abs(), first.mu.norm(), params.gamma, params.gamma / first.mu.norm()];
        let mut drift = [0.0f64; 5];
        let mut eq = 0.0f64;
        let mut min_q0 = f64::INFINITY;
        let mut failure = None;
        for s in samples {
            match conserved_set(&s.point, params) {
                Ok(c) => {
                    let d = [
                        (c.h - first.h).abs(),
                        (c.energy - first.energy).abs(),
                        (c.mu - first.mu).norm(),
                        (c.a - first.a).norm(),
                        (c.b - first.b).norm(),
                    ];
                    for k in 0..5 {
                        drift[k] = drift[k].max(rel(d[k], scales[k]));
                    }
                    let cone = params.gamma / c.mu.norm_squared();
                    match orbit_equation_residual(&s.point, params) {
                        Ok(r) => eq = eq.max(r.abs() / cone),
                        Err(e) => failure = Some(e),
                    }
                    min_q0 = min_q0.min(s.point.q0());
                }
                Err(e) => failure = Some(e),
            }
        }
        if let Some(e) = failure {
            b.push(drift_ids[0], Err(e));
            continue;
        }
        for k in 0..5 {
            b.push(drift_ids[k], Ok(drift[k]));
        }
        b.push(orbit_eq, Ok(eq));
        b.push(hemisphere, Ok(min_q0));
        let one_period = samples.iter().min_by(|a, b| {
            (a.t - orbit.period).abs().partial_cmp(&(b.t - orbit.period).abs()).unwrap()
        });
        if let Some(s) = one_period {
            let d = (s.point.q - samples[0].point.q).max_abs().max(rel((s.point.v - samples[0].point.v).max_abs(), samples[0].point.v.max_abs().max(1.0)));
            b.push(closure, Ok(d));
        }
    }
    b.finish()
}

fn moser_suite(ctx: &Context) -> Vec<Check> {
    let mut b = Book::new(Suite::Moser);
    let params = &ctx.params;
    let t = &ctx.tol;
    let energy_identity = b.at_most("energy_identity", t.tol_identity);
    let hodo = b.at_most("hodocycle_fit", t.tol_drift);
    let speed = b.at_most("hodograph_speed", t.tol_drift);
    let length = b.at_most("metric_length_equals_clock", t.tol_drift);
    let curvature = b.at_most("curvature_is_minus_two_e", 1e-3);
    let charts = b.at_most("chart_lengths_agree", t.tol_identity);
    let geodesic = b.at_most("hodocycle_is_geodesic", t.tol_fd);

    for p in ctx.points() {
        let p = match p {
            Ok(p) => p,
            Err(e) => {
                b.push(energy_identity, Err(e));
                continue;
            }
        };
        b.push(energy_identity, energy_identity_residual(&p, params).map(|r| rel(r.abs(), 1.0f64.max(params.gamma * p.q0() / p.qs().norm()))));
        let cs = conserved_set(&p, params);
        let hc = cs.clone().and_then(|cs| hodocycle(&cs, params));
        match (cs, hc) {
            (Ok(cs), Ok(h)) => {
                let scale = 1.0f64.max(h.radius * h.radius * (0.5 * cs.pi.norm_squared() - cs.energy).abs());
                b.push(geodesic, geodesic_residual(&h, &cs.pi, cs.energy, t.fd_step).map(|r| r / scale.sqrt()));
                let lengths = chart_lengths(|l| h.point_at(l), (0.0, 2.0), cs.energy, 16);
                b.push(charts, lengths.map(|(a, w)| rel((a - w).abs(), a.max(1.0))));
            }
            (Err(e), _) | (_, Err(e)) => b.push(geodesic, Err(e)),
        }
    }
    for energy in [-0.5, -1.0, -2.0] {
        let pis: Vec<_> = ctx.points().filter_map(|p| p.ok()).take(10).map(|p| crate::conserved::pi_vector(&p)).collect();
        b.push(curvature, curvature_check(energy, &pis, 1e-4));
    }
    for orbit in ctx.orbits(1.0) {
        let orbit = match orbit {
            Ok(o) => o,
            Err(e) => {
                b.push(hodo, Err(e));
                continue;
            }
        };
        let samples = &orbit.traj.samples;
        let res = (|| {
            let cs = conserved_set(&samples[0].point, params)?;
            let h = hodocycle(&cs, params)?;
            let mut fit = 0.0f64;
            let mut sp = 0.0f64;
            for s in samples {
                let c = conserved_set(&s.point, params)?;
                fit = fit.max(h.residual(&c.pi).abs() / h.radius);
                let target = (0.5 * c.pi.norm_squared() - c.energy).abs();
                sp = sp.max(hodograph_speed_residual(&s.point, params)? / target);
            }
            let len = hodograph_metric_length(&orbit.traj, params)?;
            let ds = samples.last().unwrap().s - samples[0].s;
            Ok((fit, sp, rel((len - ds).abs(), ds)))
        })();
        match res {
            Ok((f, s, l)) => {
                b.push(hodo, Ok(f));
                b.push(speed, Ok(s));
                b.push(length, Ok(l));
            }
            Err(e) => b.push(hodo, Err(e)),
        }
    }
    b.finish()
}

fn ligon_schaaf_suite(ctx: &Context) -> Vec<Check> {
    let mut b = Book::new(Suite::LigonSchaaf);
    let params = &ctx.params;
    let t = &ctx.tol;
    let ortho = b.at_most("frame_orthonormal", t.tol_identity);
    let image = b.at_most("image_on_t_plus_s3", t.tol_identity);
    let momentum = b.at_most("momentum_intertwined", t.tol_identity);
    let energy = b.at_most("energy_intertwined", t.tol_identity);
    let frame_rate = b.at_most("frame_derivatives", t.tol_fd);
    let equivalence = b.at_most("vector_fields_equivalent", t.tol_fd);
    let inverse = b.at_most("inverse_round_trip", t.tol_identity * 10.0);
    let so4 = b.at_most("rho_so4_brackets", 1e-8);
    let locus = b.at_most("circular_locus", t.tol_identity);
    let conj = b.at_most("flow_conjugation", t.tol_drift);
    let order = b.above("delaunay_rk4_order", 3.8);

    for p in ctx.points() {
        let p = match p {
            Ok(p) => p,
            Err(e) => {
                b.push(ortho, Err(e));
                continue;
            }
        };
        b.push(ortho, ls_frame(&p, params).map(|f| f.orthonormality_defect()));
        let d = ls_map(&p, params);
        b.push(image, d.as_ref().map_err(Clone::clone).map(|d| {
            let (c1, c2) = d.constraint_residual();
            c1.abs().max(c2.abs() / d.y.norm())
        }));
        b.push(momentum, (|| {
            let d = ls_map(&p, params)?;
            let j = momentum_j(&p, params)?;
            Ok(momentum_delaunay(&d).max_abs_diff(&j) / 1.0f64.max(j.max_abs()))
        })());
        b.push(energy, (|| {
            let e = conserved_set(&p, params)?.energy;
            Ok(rel((delaunay_hamiltonian(&ls_map(&p, params)?, params)? - e).abs(), e.abs()))
        })());
        b.push(frame_rate, frame_derivative_check(&p, params, t.fd_step));
        b.push(equivalence, equivalence_check(&p, params, DIRECTIONAL_STEP).map(|r| r.0));
        b.push(inverse, (|| {
            let back = ls_map_inverse(&ls_map(&p, params)?, params)?;
            Ok((back.q - p.q).max_abs().max(rel((back.v - p.v).max_abs(), p.v.max_abs().max(1.0))))
        })());
        b.push(so4, so4_residual(&p, params));
    }
    if ctx.opts.gamma == 1.0 {
        b.push(locus, momentum_rho(&fixture_c1::point::<f64>(), params, 1e-12).and_then(|r| {
            r.locus_residual.ok_or(KeplerError::NonFinite("fixture is not on the circular locus"))
        }).map(f64::abs));
    }
    for orbit in ctx.orbits(1.0) {
        b.push(conj, orbit.and_then(|o| flow_conjugation_residual(&o.traj, params)));
    }
    b.push(order, ctx.points().next().unwrap_or(Err(KeplerError::InvalidConfig("no seeds".into()))).and_then(|p| delaunay_order(&p, params)));
    b.finish()
}

/// `ρ` brackets against the so(4) structure constants.
fn so4_residual(p: &SpherePhasePoint<f64>, params: &KeplerParams<f64>) -> Result<f64> {
    let rho = momentum_rho(p, params, 0.0)?;
    let (mu, e) = (rho.element.left, rho.element.right);
    let mut worst = 0.0f64;
    let scale = 1.0f64.max(mu.max_abs()).max(e.max_abs());
    for i in 0..3 {
        for j in 0..3 {
            let ge_i = grad_scaled_runge_lenz(p, params, i)?;
            let ge_j = grad_scaled_runge_lenz(p, params, j)?;
            let eps_mu: f64 = (0..3).map(|k| levi_civita::<f64>(i, j, k) * mu[k]).sum();
            let eps_e: f64 = (0..3).map(|k| levi_civita::<f64>(i, j, k) * e[k]).sum();
            worst = worst.max((bracket(&grad_mu(p, i), &ge_j, p) - eps_e).abs());
            worst = worst.max((bracket(&ge_i, &ge_j, p) - eps_mu).abs());
        }
    }
    Ok(worst / scale)
}

/// Smallest observed convergence order of RK4 on the Delaunay field over one
/// revolution, from successive step halvings.
pub fn delaunay_order(p: &SpherePhasePoint<f64>, params: &KeplerParams<f64>) -> Result<f64> {
    let d0 = ls_map(p, params)?;
    let period = std::f64::consts::TAU / delaunay_rate(&d0, params)?;
    let exact = delaunay_flow(&d0, period, params)?;
    let errors = [16usize, 32, 64, 128]
        .iter()
        .map(|&n| delaunay_rk4(&d0, period, n, params).map(|d| d.max_abs_diff(&exact)))
        .collect::<Result<Vec<_>>>()?;
    Ok(errors.windows(2).map(|w| (w[0] / w[1]).log2()).fold(f64::INFINITY, f64::min))
}

fn gnomonic_suite(ctx: &Context) -> Vec<Check> {
    let mut b = Book::new(Suite::Gnomonic);
    let params = &ctx.params;
    let t = &ctx.tol;
    let round_trip = b.at_most("psi_round_trip", t.tol_identity);
    let energy = b.at_most("energy_intertwined", t.tol_identity);
    let momentum = b.at_most("momentum_intertwined", t.tol_identity);
    let push = b.at_most("pushforward", t.tol_fd);
    let comp = b.at_most("composition", t.tol_identity);
    let phi_c_e = b.at_most("phi_c_energy", t.tol_identity);
    let phi_c_rt = b.at_most("phi_c_round_trip", t.tol_identity * 10.0);
    let psi_def = b.above("psi_defect", 10.0 * t.tol_fd);
    let kappa = b.at_most("kappa_formula", t.tol_fd);
    let fact = b.at_most("tangent_lift_factorisation", t.tol_identity);
    let chart = b.at_most("gnomonic_chart_formula", t.tol_fd);
    let phi_c_def = b.at_most("phi_c_symplectic", t.tol_fd);
    let phi_def = b.above("phi_defect", 10.0 * t.tol_fd);
    let moser = b.at_most("moser_clock_correspondence", t.tol_drift);
    let images = b.at_most("orbit_image", t.tol_drift);

    for p in ctx.points() {
        let p = match p {
            Ok(p) => p,
            Err(e) => {
                b.push(round_trip, Err(e));
                continue;
            }
        };
        b.push(round_trip, (|| {
            let back = psi_inverse(&psi(&p)?)?;
            Ok((back.q - p.q).max_abs().max(rel((back.v - p.v).max_abs(), p.v.max_abs().max(1.0))))
        })());
        match intertwine_euclid(&p, params) {
            Ok((dh, dj)) => {
                let cs = conserved_set(&p, params);
                let (es, js) = cs.map(|c| (c.energy.abs(), 1.0f64.max(c.mu.max_abs()).max(c.nu.unwrap_or(1.0)))).unwrap_or((1.0, 1.0));
                b.push(energy, Ok(rel(dh, es)));
                b.push(momentum, Ok(dj / js));
            }
            Err(e) => b.push(energy, Err(e)),
        }
        b.push(push, pushforward_check(&p, params, DIRECTIONAL_STEP).map(|r| r.0));
        let c = if ctx.opts.mutate_phi_c { composition_check_corrupted(&p, params) } else { composition_check(&p, params) };
        b.push(comp, c);
        b.push(phi_c_e, psi(&p).and_then(|e| Ok(rel(phi_c_energy_residual(&e, params)?, conserved_set(&p, params)?.energy.abs()))));
        b.push(phi_c_rt, (|| {
            let e = psi(&p)?;
            let back = phi_c_inverse(&phi_c(&e, params)?, params)?;
            Ok(back.max_abs_diff(&e) / (1.0 + e.q.norm() + e.v.norm()))
        })());
        match symplectic_witness(&p, params, t.fd_step) {
            Ok(w) => {
                b.push(psi_def, Ok(w.psi_defect));
                b.push(kappa, Ok(w.kappa_fd_vs_formula));
                b.push(fact, Ok(w.factorisation));
                b.push(chart, Ok(w.gnomonic_chart_vs_formula));
                b.push(phi_c_def, Ok(w.phi_c_defect));
                b.push(phi_def, Ok(w.phi_defect));
            }
            Err(e) => b.push(psi_def, Err(e)),
        }
    }
    for orbit in ctx.orbits(1.0) {
        match orbit {
            Ok(o) => {
                b.push(moser, moser_correspondence(&o.traj, params));
                b.push(images, orbit_image_residual(&o.traj, params, 16));
            }
            Err(e) => b.push(moser, Err(e)),
        }
    }
    b.finish()
}
