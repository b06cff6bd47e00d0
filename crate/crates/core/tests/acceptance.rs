//! Acceptance criteria 1–8. Each criterion prints one PASS/FAIL line with
//! its worst residuals; the test fails if any criterion fails.
//!
//! Expected values come from the `oracle` module below, which re-derives
//! every quantity from its defining formula without calling the library,
//! or from closed forms (great-circle lengths, circle fits, rotation flows).

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use kepler_sphere::conserved::{orbital_period, sample_elliptic_orbit};
use kepler_sphere::dynamics::brackets::{
    bracket, coordinate, grad_inv_spatial_norm, grad_mu, grad_pi, grad_runge_lenz, grad_scaled_runge_lenz,
    grad_spatial_norm_sq, structure_matrix, Gradient,
};
use kepler_sphere::dynamics::{integrate, IntegratorConfig};
use kepler_sphere::geometry::{fixture_c1, sample_phase_point};
use kepler_sphere::gnomonic::{composition_check, moser_correspondence, psi, pushforward_check, symplectic_witness};
use kepler_sphere::ligon_schaaf::{
    delaunay_dop853, delaunay_flow, delaunay_hamiltonian, equivalence_check, frame_derivative_check, ls_frame,
    ls_map, regularized_continuation, DelaunayPoint as GenericDelaunay,
};
use kepler_sphere::moser::{chart_lengths, curvature_check, hodocycle};
use kepler_sphere::verify::DIRECTIONAL_STEP;
use kepler_sphere::{conserved::conserved_set, KeplerParams, SpherePhasePoint, Trajectory};
use nalgebra::{DMatrix, DVector, SMatrix, SVector};

type DelaunayPoint = GenericDelaunay<f64>;

/// Independent re-derivations of every quantity under test.
mod oracle {
    use nalgebra::{SMatrix, SVector};

    pub type V3 = [f64; 3];
    pub type V4 = [f64; 4];

    pub fn dot<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    pub fn norm<const N: usize>(a: &[f64; N]) -> f64 {
        dot(a, a).sqrt()
    }

    pub fn cross(a: &V3, b: &V3) -> V3 {
        [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
    }

    pub fn lin<const N: usize>(a: f64, x: &[f64; N], b: f64, y: &[f64; N]) -> [f64; N] {
        std::array::from_fn(|i| a * x[i] + b * y[i])
    }

    pub fn max_diff<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    pub fn spatial(a: &V4) -> V3 {
        [a[1], a[2], a[3]]
    }

    pub fn levi(i: usize, j: usize, k: usize) -> f64 {
        match (i, j, k) {
            (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
            (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
            _ => 0.0,
        }
    }

    /// The conserved quantities of one state, straight from their formulas.
    #[derive(Debug, Clone, Copy)]
    pub struct Integrals {
        pub h: f64,
        pub e: f64,
        pub mu: V3,
        pub pi: V3,
        pub a: V3,
        pub b: V3,
    }

    pub fn integrals(q: &V4, v: &V4, gamma: f64) -> Integrals {
        let (qs, vs) = (spatial(q), spatial(v));
        let mu = cross(&qs, &vs);
        let pi = lin(q[0], &vs, -v[0], &qs);
        let r = norm(&qs);
        let h = 0.5 * dot(v, v) - gamma * q[0] / (1.0 - q[0] * q[0]).sqrt();
        let mu2 = dot(&mu, &mu);
        let a = lin(1.0, &cross(&pi, &mu), -gamma / r, &qs);
        let b = lin(1.0, &pi, -gamma / (r * mu2), &cross(&mu, &qs));
        Integrals { h, e: h - 0.5 * mu2, mu, pi, a, b }
    }

    /// `q̇ = v`, `v̇ = γe0/(1−q0²)^{3/2} − (⟨v,v⟩ + γq0/(1−q0²)^{3/2}) q`.
    pub fn field(q: &V4, v: &V4, gamma: f64) -> (V4, V4) {
        let s3 = (1.0 - q[0] * q[0]).powf(1.5);
        let c = dot(v, v) + gamma * q[0] / s3;
        let mut vd = lin(-c, q, 0.0, q);
        vd[0] += gamma / s3;
        (*v, vd)
    }

    pub fn rk4(q: &V4, v: &V4, h: f64, gamma: f64) -> (V4, V4) {
        let k1 = field(q, v, gamma);
        let k2 = field(&lin(1.0, q, h / 2.0, &k1.0), &lin(1.0, v, h / 2.0, &k1.1), gamma);
        let k3 = field(&lin(1.0, q, h / 2.0, &k2.0), &lin(1.0, v, h / 2.0, &k2.1), gamma);
        let k4 = field(&lin(1.0, q, h, &k3.0), &lin(1.0, v, h, &k3.1), gamma);
        let comb = |x: &V4, a: &V4, b: &V4, c: &V4, d: &V4| -> V4 {
            std::array::from_fn(|i| x[i] + h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]))
        };
        (comb(q, &k1.0, &k2.0, &k3.0, &k4.0), comb(v, &k1.1, &k2.1, &k3.1, &k4.1))
    }

    /// `dπ/dt` by the product rule on the field.
    pub fn pi_rate(q: &V4, v: &V4, gamma: f64) -> V3 {
        let (qd, vd) = field(q, v, gamma);
        std::array::from_fn(|i| qd[0] * v[i + 1] + q[0] * vd[i + 1] - vd[0] * q[i + 1] - v[0] * qd[i + 1])
    }

    pub fn nu(e: f64, gamma: f64) -> f64 {
        gamma / (-2.0 * e).sqrt()
    }

    /// `(α, β)` built from `(Q, V) = (𝐪/q0, π)`.
    pub fn frame(big_q: &V3, v: &V3, nu: f64, gamma: f64) -> (V4, V4) {
        let r = norm(big_q);
        let qv = dot(big_q, v);
        let at = lin(1.0 / r, big_q, -qv / gamma, v);
        let alpha = [qv / nu, at[0], at[1], at[2]];
        let beta = [r * dot(v, v) / gamma - 1.0, r * v[0] / nu, r * v[1] / nu, r * v[2] / nu];
        (alpha, beta)
    }

    pub fn to_delaunay(alpha: &V4, beta: &V4, nu: f64) -> (V4, V4) {
        let (s, c) = alpha[0].sin_cos();
        (lin(s, alpha, c, beta), lin(-nu * c, alpha, nu * s, beta))
    }

    /// `Φ(q, v)` from the sphere-side formulas for `α` and `β`.
    pub fn ls_map(q: &V4, v: &V4, gamma: f64) -> (V4, V4) {
        let ig = integrals(q, v, gamma);
        let nu = nu(ig.e, gamma);
        let qs = spatial(q);
        let r = norm(&qs);
        let qp = dot(&qs, &ig.pi);
        let at = lin(1.0 / r, &qs, -qp / (gamma * q[0]), &ig.pi);
        let alpha = [qp / (nu * q[0]), at[0], at[1], at[2]];
        let bt = r / (nu * q[0]);
        let beta = [r * dot(&ig.pi, &ig.pi) / (gamma * q[0]) - 1.0, bt * ig.pi[0], bt * ig.pi[1], bt * ig.pi[2]];
        to_delaunay(&alpha, &beta, nu)
    }

    /// `(Q, V) = (𝐪/q0, π)`.
    pub fn gnomonic(q: &V4, v: &V4) -> (V3, V3) {
        let qs = spatial(q);
        (lin(1.0 / q[0], &qs, 0.0, &qs), lin(q[0], &spatial(v), -v[0], &qs))
    }

    pub fn kepler_energy(big_q: &V3, v: &V3, gamma: f64) -> f64 {
        0.5 * dot(v, v) - gamma / norm(big_q)
    }

    /// `J = (μ, ẽ)` with `ẽ = −ν A/γ`.
    pub fn momentum(q: &V4, v: &V4, gamma: f64) -> (V3, V3) {
        let ig = integrals(q, v, gamma);
        let nu = nu(ig.e, gamma);
        (ig.mu, lin(-nu / gamma, &ig.a, 0.0, &ig.a))
    }

    pub fn kepler_momentum(big_q: &V3, v: &V3, gamma: f64) -> (V3, V3) {
        let nu = nu(kepler_energy(big_q, v, gamma), gamma);
        let l = cross(big_q, v);
        let runge = lin(1.0 / gamma, &cross(v, &l), -1.0 / norm(big_q), big_q);
        (l, lin(-nu, &runge, 0.0, &runge))
    }

    /// `x∧y` as `(𝐱×𝐲, x0𝐲 − y0𝐱)`.
    pub fn wedge(x: &V4, y: &V4) -> (V3, V3) {
        let (xs, ys) = (spatial(x), spatial(y));
        (cross(&xs, &ys), lin(x[0], &ys, -y[0], &xs))
    }

    pub fn delaunay_energy(y: &V4, gamma: f64) -> f64 {
        -0.5 * gamma * gamma / dot(y, y)
    }

    pub fn delaunay_field(x: &V4, y: &V4, gamma: f64) -> (V4, V4) {
        let yy = dot(y, y);
        (lin(gamma * gamma / (yy * yy), y, 0.0, y), lin(-gamma * gamma / yy, x, 0.0, x))
    }

    pub fn delaunay_rk4(x: &V4, y: &V4, t: f64, n: usize, gamma: f64) -> (V4, V4) {
        let h = t / n as f64;
        let (mut x, mut y) = (*x, *y);
        for _ in 0..n {
            let k1 = delaunay_field(&x, &y, gamma);
            let k2 = delaunay_field(&lin(1.0, &x, h / 2.0, &k1.0), &lin(1.0, &y, h / 2.0, &k1.1), gamma);
            let k3 = delaunay_field(&lin(1.0, &x, h / 2.0, &k2.0), &lin(1.0, &y, h / 2.0, &k2.1), gamma);
            let k4 = delaunay_field(&lin(1.0, &x, h, &k3.0), &lin(1.0, &y, h, &k3.1), gamma);
            x = std::array::from_fn(|i| x[i] + h / 6.0 * (k1.0[i] + 2.0 * k2.0[i] + 2.0 * k3.0[i] + k4.0[i]));
            y = std::array::from_fn(|i| y[i] + h / 6.0 * (k1.1[i] + 2.0 * k2.1[i] + 2.0 * k3.1[i] + k4.1[i]));
        }
        (x, y)
    }

    /// `η A` with `η = (|μ|² − H + √(γ² + H²))^{−1/2}`.
    pub fn scaled_runge_lenz(q: &V4, v: &V4, gamma: f64) -> V3 {
        let ig = integrals(q, v, gamma);
        let eta = 1.0 / (dot(&ig.mu, &ig.mu) - ig.h + (gamma * gamma + ig.h * ig.h).sqrt()).sqrt();
        lin(eta, &ig.a, 0.0, &ig.a)
    }

    /// The Dirac bracket matrix from the two constraints
    /// `c1 = ⟨q,q⟩ − 1`, `c2 = ⟨q,v⟩` and the canonical ambient bracket.
    pub fn dirac_matrix(q: &V4, v: &V4) -> SMatrix<f64, 8, 8> {
        let mut j = SMatrix::<f64, 8, 8>::zeros();
        for i in 0..4 {
            j[(i, 4 + i)] = 1.0;
            j[(4 + i, i)] = -1.0;
        }
        let mut g = SMatrix::<f64, 8, 2>::zeros();
        for i in 0..4 {
            g[(i, 0)] = 2.0 * q[i];
            g[(i, 1)] = v[i];
            g[(4 + i, 1)] = q[i];
        }
        let c = g.transpose() * j * g;
        let c_inv = c.try_inverse().expect("constraints are second class");
        j - j * g * c_inv * g.transpose() * j
    }

    pub fn bracket(pi: &SMatrix<f64, 8, 8>, f: &[f64; 8], g: &[f64; 8]) -> f64 {
        (SVector::<f64, 8>::from_column_slice(f).transpose() * pi * SVector::<f64, 8>::from_column_slice(g))[(0, 0)]
    }

    /// Central-difference gradient of a scalar function of the ambient state.
    pub fn fd_gradient(f: impl Fn(&V4, &V4) -> f64, q: &V4, v: &V4, h: f64) -> [f64; 8] {
        std::array::from_fn(|k| {
            let (mut qp, mut vp, mut qm, mut vm) = (*q, *v, *q, *v);
            if k < 4 {
                qp[k] += h;
                qm[k] -= h;
            } else {
                vp[k - 4] += h;
                vm[k - 4] -= h;
            }
            (f(&qp, &vp) - f(&qm, &vm)) / (2.0 * h)
        })
    }

    /// Physical period of a bound orbit: `t = ∫ q0² dτ` over one revolution
    /// of the Euclidean image, in mean anomaly with Gauss–Legendre panels.
    pub fn period(e: f64, eps: f64, gamma: f64) -> f64 {
        let a = gamma / (-2.0 * e);
        let n_mean = (gamma / (a * a * a)).sqrt();
        let nodes = [
            (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
            (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (0.0, 0.568_888_888_888_888_9),
            (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (0.906_179_845_938_664, 0.236_926_885_056_189_1),
        ];
        let panels = 512;
        let w = TAU / panels as f64;
        let mut sum = 0.0;
        for k in 0..panels {
            for (x, wt) in nodes {
                let m = (k as f64 + 0.5 + 0.5 * x) * w;
                let mut ecc_anom = m;
                for _ in 0..50 {
                    ecc_anom -= (ecc_anom - eps * ecc_anom.sin() - m) / (1.0 - eps * ecc_anom.cos());
                }
                let r = a * (1.0 - eps * ecc_anom.cos());
                sum += 0.5 * w * wt / (1.0 + r * r);
            }
        }
        sum / n_mean
    }

    use std::f64::consts::TAU;
}

use oracle::{V3, V4};

fn point_arrays(p: &SpherePhasePoint) -> (V4, V4) {
    (p.q.0, p.v.0)
}

/// Outcome of one criterion.
struct Outcome {
    passed: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self { passed: true, details: Vec::new() }
    }

    /// Records `value ≤ tol`.
    fn at_most(&mut self, name: &str, value: f64, tol: f64) {
        let ok = value <= tol;
        self.passed &= ok;
        self.details.push(format!("{name}={value:.2e}{}{tol:.0e}", if ok { "≤" } else { ">" }));
    }

    /// Records `value > tol`.
    fn above(&mut self, name: &str, value: f64, tol: f64) {
        let ok = value > tol;
        self.passed &= ok;
        self.details.push(format!("{name}={value:.3e}{}{tol:.1e}", if ok { ">" } else { "≤" }));
    }

    fn runtime(&mut self, elapsed: Duration, limit: Duration) {
        let ok = elapsed < limit;
        self.passed &= ok;
        self.details.push(format!("runtime={:.3}s{}{}s", elapsed.as_secs_f64(), if ok { "<" } else { "≥" }, limit.as_secs()));
    }

    fn note(&mut self, text: String) {
        self.details.push(text);
    }

    fn print(&self, n: usize, title: &str) -> bool {
        println!("criterion {n} [{title}]: {} | {}", if self.passed { "PASS" } else { "FAIL" }, self.details.join(", "));
        self.passed
    }
}

fn unit() -> KeplerParams {
    KeplerParams::new(1.0).unwrap()
}

fn seeded_points() -> Vec<SpherePhasePoint> {
    (0..100).map(|s| sample_phase_point(s, (-1.0, -0.1), 1.0).unwrap()).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut out = Outcome::new();
    let params = unit();
    let gamma = params.gamma;
    let mut table = 0.0f64;
    let mut grads = 0.0f64;
    let mut worst = [0.0f64; 11];
    let mut pi_q_offdiag = 0.0f64;
    for p in seeded_points() {
        let (q, v) = point_arrays(&p);
        let dirac = oracle::dirac_matrix(&q, &v);
        let lib = structure_matrix(&p);
        for a in 0..8 {
            for b in 0..8 {
                table = table.max((lib.entry(a, b) - dirac[(a, b)]).abs());
            }
        }
        let ig = oracle::integrals(&q, &v, gamma);
        let qs = oracle::spatial(&q);
        let vs = oracle::spatial(&v);
        let r = oracle::norm(&qs);
        let mu2 = oracle::dot(&ig.mu, &ig.mu);

        // The analytic gradients are checked once against central differences
        // of the defining formulas.
        let fd_a = oracle::fd_gradient(|q, v| oracle::integrals(q, v, gamma).a[0], &q, &v, 1e-6);
        let an_a: Gradient<f64> = grad_runge_lenz(&p, &params, 0);
        grads = grads.max(oracle::max_diff(&fd_a, &an_a) / oracle::norm(&an_a).max(1.0));
        let fd_pi = oracle::fd_gradient(|q, v| oracle::integrals(q, v, gamma).pi[1], &q, &v, 1e-6);
        grads = grads.max(oracle::max_diff(&fd_pi, &grad_pi(&p, 1)) / oracle::norm(&fd_pi).max(1.0));
        let fd_mu = oracle::fd_gradient(|q, v| oracle::integrals(q, v, gamma).mu[2], &q, &v, 1e-6);
        grads = grads.max(oracle::max_diff(&fd_mu, &grad_mu(&p, 2)) / oracle::norm(&fd_mu).max(1.0));

        let mut br = |f: &Gradient<f64>, g: &Gradient<f64>| {
            let via_lib = bracket(f, g, &p);
            let via_oracle = oracle::bracket(&dirac, f, g);
            table = table.max((via_lib - via_oracle).abs() / via_oracle.abs().max(1.0));
            via_oracle
        };
        let mut put = |slot: usize, got: f64, want: f64, scale: f64| {
            worst[slot] = worst[slot].max((got - want).abs() / scale.max(1.0));
        };
        let max3 = |a: &V3| a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let eps_dot = |i: usize, j: usize, x: &V3| -> f64 { (0..3).map(|k| oracle::levi(i, j, k) * x[k]).sum() };
        for i in 0..3 {
            for j in 0..3 {
                let (gm_i, gm_j) = (grad_mu(&p, i), grad_mu(&p, j));
                let (ga_i, ga_j) = (grad_runge_lenz(&p, &params, i), grad_runge_lenz(&p, &params, j));
                let (gp_i, gp_j) = (grad_pi(&p, i), grad_pi(&p, j));
                put(0, br(&gm_i, &gm_j), eps_dot(i, j, &ig.mu), max3(&ig.mu));
                put(1, br(&gm_i, &ga_j), eps_dot(i, j, &ig.a), max3(&ig.a).max(gamma));
                put(2, br(&ga_i, &ga_j), -2.0 * (ig.h - mu2) * eps_dot(i, j, &ig.mu), (2.0 * (ig.h - mu2)).abs() * max3(&ig.mu));
                put(3, br(&gm_i, &coordinate(j + 1)), eps_dot(i, j, &qs), 1.0);
                put(4, br(&gm_i, &coordinate(j + 5)), eps_dot(i, j, &vs), max3(&vs));
                put(5, br(&gm_i, &gp_j), eps_dot(i, j, &ig.pi), max3(&ig.pi));
                put(6, br(&gp_i, &gp_j), qs[i] * vs[j] - qs[j] * vs[i], max3(&vs));
                let pq = br(&gp_i, &coordinate(j + 1));
                if i == j {
                    put(10, pq, -q[0], 1.0);
                } else {
                    pi_q_offdiag = pi_q_offdiag.max(pq.abs());
                }
            }
            put(7, br(&grad_mu(&p, i), &grad_spatial_norm_sq(&p)), 0.0, oracle::norm(&vs));
            put(8, br(&grad_pi(&p, i), &grad_inv_spatial_norm(&p)), q[0] * qs[i] / (r * r * r), 1.0 / (r * r));
        }
        // Structure matrix entries directly.
        for a in 0..4 {
            for b in 0..4 {
                let delta = if a == b { 1.0 } else { 0.0 };
                put(9, lib.entry(a, 4 + b), delta - q[a] * q[b], 1.0);
                put(9, lib.entry(4 + a, 4 + b), q[b] * v[a] - q[a] * v[b], 1.0);
                put(9, lib.entry(a, b), 0.0, 1.0);
            }
        }
    }
    let tol = 1e-9;
    out.at_most("dirac_oracle", table, tol);
    out.at_most("gradients_vs_fd", grads, 1e-6);
    let names = ["mu_mu", "mu_A", "A_A", "mu_q", "mu_v", "mu_pi", "pi_pi", "mu_|q|2", "pi_inv|q|", "table", "pi_q_diag(-q0)"];
    for (name, w) in names.iter().zip(worst) {
        out.at_most(name, w, tol);
    }
    out.at_most("pi_q_offdiag", pi_q_offdiag, tol);
    out.runtime(start.elapsed(), Duration::from_secs(1));
    out
}

/// One integrated orbit of criterion 2 with its oracle period.
struct Orbit {
    traj: Trajectory,
    period: f64,
    start: SpherePhasePoint,
}

fn criterion_2_orbits() -> Vec<Orbit> {
    let params = unit();
    let mut starts = vec![fixture_c1::point::<f64>()];
    for seed in 0..20 {
        starts.push(sample_elliptic_orbit(seed, (0.01, 0.9), (0.3, 1.2), &params).unwrap().0);
    }
    starts
        .into_iter()
        .map(|p| {
            let (q, v) = point_arrays(&p);
            let ig = oracle::integrals(&q, &v, 1.0);
            let eps = oracle::norm(&ig.a);
            let period = oracle::period(ig.e, eps, 1.0);
            let cfg = IntegratorConfig::dop853(period / 200.0, 10.0 * period);
            let traj = integrate(&p, &params, &cfg).unwrap();
            assert!(traj.collision.is_none());
            Orbit { traj, period, start: p }
        })
        .collect()
}

fn criterion_2(orbits: &[Orbit], elapsed: Duration) -> Outcome {
    let mut out = Outcome::new();
    let mut drift = [0.0f64; 5];
    let mut period_check = 0.0f64;
    for o in orbits {
        let (q, v) = point_arrays(&o.start);
        let i0 = oracle::integrals(&q, &v, 1.0);
        let mu_n = oracle::norm(&i0.mu);
        let scales = [i0.e.abs(), i0.e.abs(), mu_n, 1.0, 1.0 / mu_n];
        for s in &o.traj.samples {
            let (q, v) = point_arrays(&s.point);
            let ig = oracle::integrals(&q, &v, 1.0);
            let d = [
                (ig.h - i0.h).abs(),
                (ig.e - i0.e).abs(),
                oracle::max_diff(&ig.mu, &i0.mu),
                oracle::max_diff(&ig.a, &i0.a),
                oracle::max_diff(&ig.b, &i0.b),
            ];
            for k in 0..5 {
                drift[k] = drift[k].max(d[k] / scales[k]);
            }
        }
        let lib_period = orbital_period(&conserved_set(&o.start, &unit()).unwrap(), &unit()).unwrap();
        period_check = period_check.max((lib_period - o.period).abs() / o.period);
    }
    for (name, d) in ["H", "E", "mu", "A", "B"].iter().zip(drift) {
        out.at_most(&format!("drift_{name}"), d, 1e-6);
    }
    out.at_most("library_period_vs_oracle", period_check, 1e-10);
    out.note(format!("orbits={} x 10 periods", orbits.len()));
    out.runtime(elapsed, Duration::from_secs(30));
    out
}

fn criterion_3(orbits: &[Orbit]) -> Outcome {
    let mut out = Outcome::new();
    let params = unit();
    let mut residual = 0.0f64;
    let mut min_q0 = f64::INFINITY;
    let mut closure = 0.0f64;
    for o in orbits {
        for s in &o.traj.samples {
            let (q, v) = point_arrays(&s.point);
            let ig = oracle::integrals(&q, &v, 1.0);
            let qs = oracle::spatial(&q);
            let mu2 = oracle::dot(&ig.mu, &ig.mu);
            let eps = oracle::norm(&ig.a);
            let cos_phi = if eps > 1e-12 {
                let a_hat = oracle::lin(1.0 / eps, &ig.a, 0.0, &ig.a);
                let side = oracle::cross(&oracle::lin(1.0 / mu2.sqrt(), &ig.mu, 0.0, &ig.mu), &a_hat);
                let (x, y) = (oracle::dot(&qs, &a_hat), oracle::dot(&qs, &side));
                y.atan2(x).cos()
            } else {
                0.0
            };
            let cot = q[0] / oracle::norm(&qs);
            let cone = 1.0 / mu2;
            residual = residual.max((cot - cone * (1.0 + eps * cos_phi)).abs() / cone);
            min_q0 = min_q0.min(q[0]);
        }
        let cfg = IntegratorConfig::dop853(o.period / 200.0, o.period);
        let one = integrate(&o.start, &params, &cfg).unwrap();
        let end = one.last().unwrap();
        assert!((end.t - o.period).abs() < 1e-12 * o.period);
        let dq = (end.point.q - o.start.q).max_abs();
        let dv = (end.point.v - o.start.v).max_abs() / o.start.v.max_abs().max(1.0);
        closure = closure.max(dq.max(dv));
    }
    out.at_most("orbit_equation", residual, 1e-6);
    out.above("min_q0", min_q0, 0.0);
    out.at_most("closure", closure, 1e-6);
    out
}

/// Least-squares circle through 3-D points: plane by SVD, then an algebraic
/// fit in the plane. Returns the worst distance to the fitted circle relative
/// to its radius, the centre and the radius.
fn fit_circle(points: &[V3]) -> (f64, V3, f64) {
    let n = points.len();
    let mean: V3 = std::array::from_fn(|k| points.iter().map(|p| p[k]).sum::<f64>() / n as f64);
    let centred = DMatrix::from_fn(n, 3, |i, k| points[i][k] - mean[k]);
    let svd = centred.clone().svd(false, true);
    let vt = svd.v_t.unwrap();
    let (imin, _) = svd.singular_values.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    let others: Vec<usize> = (0..3).filter(|&i| i != imin).collect();
    let axis = |i: usize| -> V3 { [vt[(i, 0)], vt[(i, 1)], vt[(i, 2)]] };
    let (u, w, normal) = (axis(others[0]), axis(others[1]), axis(imin));
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|p| {
            let d = oracle::lin(1.0, p, -1.0, &mean);
            (oracle::dot(&d, &u), oracle::dot(&d, &w))
        })
        .collect();
    let a = DMatrix::from_fn(n, 3, |i, k| match k {
        0 => xy[i].0,
        1 => xy[i].1,
        _ => 1.0,
    });
    let b = DVector::from_fn(n, |i, _| -(xy[i].0 * xy[i].0 + xy[i].1 * xy[i].1));
    let sol = a.svd(true, true).solve(&b, 1e-14).unwrap();
    let (cx, cy) = (-sol[0] / 2.0, -sol[1] / 2.0);
    let radius = (cx * cx + cy * cy - sol[2]).sqrt();
    let centre: V3 = std::array::from_fn(|k| mean[k] + cx * u[k] + cy * w[k]);
    let worst = points
        .iter()
        .map(|p| {
            let d = oracle::lin(1.0, p, -1.0, &centre);
            let off = oracle::dot(&d, &normal);
            let inplane = oracle::lin(1.0, &d, -off, &normal);
            off.hypot(oracle::norm(&inplane) - radius) / radius
        })
        .fold(0.0, f64::max);
    (worst, centre, radius)
}

/// Sectional curvatures of `4 dπ²/(|π|² − 2E)²` from the analytic
/// derivatives of `f = ln 2 − ln(|π|² − 2E)`.
fn analytic_curvature(pi: &V3, e: f64) -> f64 {
    let d = oracle::dot(pi, pi) - 2.0 * e;
    let grad: V3 = std::array::from_fn(|i| -2.0 * pi[i] / d);
    let hess = |i: usize| -2.0 / d + 4.0 * pi[i] * pi[i] / (d * d);
    let f = (2.0 / d).ln();
    let g2 = oracle::dot(&grad, &grad);
    let mut worst = 0.0f64;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let k = (-2.0 * f).exp() * (-hess(i) - hess(j) + grad[i] * grad[i] + grad[j] * grad[j] - g2);
        worst = worst.max((k + 2.0 * e).abs());
    }
    worst
}

fn criterion_4(orbits: &[Orbit]) -> Outcome {
    let mut out = Outcome::new();
    let params = unit();
    let mut fit = 0.0f64;
    let mut centre_vs_b = 0.0f64;
    let mut lengths = 0.0f64;
    let mut great_circle = 0.0f64;
    let mut speed = 0.0f64;
    for o in orbits {
        let (q, v) = point_arrays(&o.start);
        let i0 = oracle::integrals(&q, &v, 1.0);
        let pis: Vec<V3> = o
            .traj
            .samples
            .iter()
            .take(201)
            .map(|s| oracle::integrals(&s.point.q.0, &s.point.v.0, 1.0).pi)
            .collect();
        let mu_n = oracle::norm(&i0.mu);
        if oracle::norm(&i0.a) > 1e-8 {
            let (worst, centre, radius) = fit_circle(&pis);
            fit = fit.max(worst);
            centre_vs_b = centre_vs_b.max(oracle::max_diff(&centre, &i0.b) * mu_n).max((radius * mu_n - 1.0).abs());
        } else {
            // Circular orbit: π runs on a circle about the origin.
            let r0 = oracle::norm(&pis[0]);
            let worst = pis.iter().map(|p| (oracle::norm(p) - r0).abs() / r0).fold(0.0, f64::max);
            fit = fit.max(worst);
            centre_vs_b = centre_vs_b.max((r0 * mu_n - 1.0).abs());
        }
        let h = hodocycle(&conserved_set(&o.start, &params).unwrap(), &params).unwrap();
        let (lp, lw) = chart_lengths(|l| h.point_at(l), (0.0, TAU), i0.e, 64).unwrap();
        lengths = lengths.max((lp - lw).abs() / lp);
        great_circle = great_circle.max((lp - TAU / (-2.0 * i0.e).sqrt()).abs() / lp);
        for s in &o.traj.samples {
            let (q, v) = point_arrays(&s.point);
            let ig = oracle::integrals(&q, &v, 1.0);
            let rate = oracle::norm(&oracle::pi_rate(&q, &v, 1.0)) * q[0] * oracle::norm(&oracle::spatial(&q));
            let target = (0.5 * oracle::dot(&ig.pi, &ig.pi) - ig.e).abs();
            speed = speed.max((rate - target).abs() / target);
        }
    }
    out.at_most("hodocycle_fit", fit, 1e-6);
    out.at_most("fit_centre_radius_vs_B_and_gamma/|mu|", centre_vs_b, 1e-6);
    let mut curvature = 0.0f64;
    let mut curvature_exact = 0.0f64;
    for e in [-0.5, -1.0, -2.0] {
        let samples: Vec<_> = seeded_points().iter().take(20).map(kepler_sphere::conserved::pi_vector).collect();
        curvature = curvature.max(curvature_check(e, &samples, 1e-4).unwrap());
        for s in &samples {
            curvature_exact = curvature_exact.max(analytic_curvature(&s.0, e));
        }
    }
    out.at_most("curvature_fd", curvature, 1e-3);
    out.at_most("curvature_analytic", curvature_exact, 1e-9);
    out.at_most("chart_lengths", lengths, 1e-9);
    out.at_most("length_vs_great_circle", great_circle, 1e-9);
    out.at_most("dpi_ds", speed, 1e-6);
    out
}

fn criterion_5() -> Outcome {
    let mut out = Outcome::new();
    let params = unit();
    let gamma = 1.0;
    let mut frame_match = 0.0f64;
    let mut ortho = 0.0f64;
    let mut momentum = 0.0f64;
    let mut energy = 0.0f64;
    let mut lemma = 0.0f64;
    let mut lemma_oracle = 0.0f64;
    let mut equivalence = 0.0f64;
    for p in seeded_points() {
        let (q, v) = point_arrays(&p);
        let ig = oracle::integrals(&q, &v, gamma);
        let nu = oracle::nu(ig.e, gamma);
        let (big_q, big_v) = oracle::gnomonic(&q, &v);
        let (alpha, beta) = oracle::frame(&big_q, &big_v, nu, gamma);
        let lib = ls_frame(&p, &params).unwrap();
        frame_match = frame_match.max(oracle::max_diff(&alpha, &lib.alpha.0)).max(oracle::max_diff(&beta, &lib.beta.0));
        let (aa, bb, ab) = (oracle::dot(&lib.alpha.0, &lib.alpha.0), oracle::dot(&lib.beta.0, &lib.beta.0), oracle::dot(&lib.alpha.0, &lib.beta.0));
        ortho = ortho.max((aa - 1.0).abs()).max((bb - 1.0).abs()).max(ab.abs());

        let d = ls_map(&p, &params).unwrap();
        let (jl, jr) = oracle::wedge(&d.x.0, &d.y.0);
        let (ml, mr) = oracle::momentum(&q, &v, gamma);
        momentum = momentum.max(oracle::max_diff(&jl, &ml).max(oracle::max_diff(&jr, &mr)) / nu.max(1.0));
        energy = energy.max((oracle::delaunay_energy(&d.y.0, gamma) - ig.e).abs() / ig.e.abs());

        lemma = lemma.max(frame_derivative_check(&p, &params, 1e-6).unwrap());
        // Central differences along the oracle's own RK4 arcs.
        let h = 1e-5;
        let k = (-2.0 * ig.e).sqrt() / (q[0] * oracle::norm(&oracle::spatial(&q)));
        let frame_at = |(q, v): (V4, V4)| {
            let ig = oracle::integrals(&q, &v, gamma);
            let (bq, bv) = oracle::gnomonic(&q, &v);
            oracle::frame(&bq, &bv, oracle::nu(ig.e, gamma), gamma)
        };
        let (af, bf) = frame_at(oracle::rk4(&q, &v, h, gamma));
        let (ab_, bb_) = frame_at(oracle::rk4(&q, &v, -h, gamma));
        let da: V4 = std::array::from_fn(|i| (af[i] - ab_[i]) / (2.0 * h));
        let db: V4 = std::array::from_fn(|i| (bf[i] - bb_[i]) / (2.0 * h));
        let ra = oracle::max_diff(&da, &oracle::lin(k, &beta, 0.0, &beta));
        let rb = oracle::max_diff(&db, &oracle::lin(-k, &alpha, 0.0, &alpha));
        lemma_oracle = lemma_oracle.max(ra.max(rb) / k.max(1.0));

        equivalence = equivalence.max(equivalence_check(&p, &params, DIRECTIONAL_STEP).unwrap().0);
    }
    out.at_most("frame_vs_oracle", frame_match, 1e-9);
    out.at_most("orthonormality", ortho, 1e-9);
    out.at_most("J_intertwined", momentum, 1e-9);
    out.at_most("H_intertwined", energy, 1e-9);
    out.at_most("frame_derivatives", lemma, 1e-5);
    out.at_most("frame_derivatives_oracle_arc", lemma_oracle, 1e-5);
    out.at_most("equivalence", equivalence, 1e-5);

    // dt-halving study of RK4 on the Delaunay field against the closed form.
    let mut min_order = f64::INFINITY;
    for p in seeded_points().iter().take(5) {
        let d0 = ls_map(p, &params).unwrap();
        let yn = oracle::norm(&d0.y.0);
        let period = TAU * yn * yn * yn;
        let exact = delaunay_flow(&d0, period, &params).unwrap();
        // The closed form must return to the start after one period.
        assert!(exact.max_abs_diff(&d0) < 1e-12);
        let errors: Vec<f64> = [16usize, 32, 64, 128]
            .iter()
            .map(|&n| {
                let (x, y) = oracle::delaunay_rk4(&d0.x.0, &d0.y.0, period, n, gamma);
                oracle::max_diff(&x, &exact.x.0).max(oracle::max_diff(&y, &exact.y.0))
            })
            .collect();
        for w in errors.windows(2) {
            min_order = min_order.min((w[0] / w[1]).log2());
        }
    }
    out.above("rk4_observed_order", min_order, 3.8);
    out
}

fn criterion_6() -> Outcome {
    let mut out = Outcome::new();
    let params = unit();
    let gamma = 1.0;
    let mut worst = 0.0f64;
    let mut grad_check = 0.0f64;
    for p in seeded_points() {
        let (q, v) = point_arrays(&p);
        let dirac = oracle::dirac_matrix(&q, &v);
        let mu = oracle::integrals(&q, &v, gamma).mu;
        let e = oracle::scaled_runge_lenz(&q, &v, gamma);
        let scale = mu.iter().chain(&e).fold(1.0f64, |m, x| m.max(x.abs()));
        for i in 0..3 {
            let ge_i = grad_scaled_runge_lenz(&p, &params, i).unwrap();
            // Ambient extensions may differ off TS³, so only the Dirac
            // projections of the two gradients are compared.
            let fd = oracle::fd_gradient(|q, v| oracle::scaled_runge_lenz(q, v, gamma)[i], &q, &v, 1e-6);
            let proj = |g: &[f64; 8]| dirac * SVector::<f64, 8>::from_column_slice(g);
            let (pf, pl) = (proj(&fd), proj(&ge_i));
            grad_check = grad_check.max((pf - pl).amax() / pf.amax().max(1.0));
            for j in 0..3 {
                let ge_j = grad_scaled_runge_lenz(&p, &params, j).unwrap();
                let eps_mu: f64 = (0..3).map(|k| oracle::levi(i, j, k) * mu[k]).sum();
                let eps_e: f64 = (0..3).map(|k| oracle::levi(i, j, k) * e[k]).sum();
                let mm = oracle::bracket(&dirac, &grad_mu(&p, i), &grad_mu(&p, j));
                let me = oracle::bracket(&dirac, &grad_mu(&p, i), &ge_j);
                let ee = oracle::bracket(&dirac, &ge_i, &ge_j);
                worst = worst.max((mm - eps_mu).abs() / scale).max((me - eps_e).abs() / scale).max((ee - eps_mu).abs() / scale);
            }
        }
    }
    out.at_most("so4_structure_constants", worst, 1e-8);
    out.at_most("eta_A_gradient_vs_fd", grad_check, 1e-6);
    let (q, v) = point_arrays(&fixture_c1::point());
    let ig = oracle::integrals(&q, &v, gamma);
    let c = ig.h + (gamma * gamma + ig.h * ig.h).sqrt();
    out.at_most("circular_locus", (oracle::dot(&ig.mu, &ig.mu) - c).abs(), 1e-9);
    out.at_most("fixture_A_vanishes", oracle::norm(&ig.a), 1e-9);
    out
}

fn criterion_7(orbits: &[Orbit]) -> Outcome {
    let mut out = Outcome::new();
    let params = unit();
    let gamma = 1.0;
    let (mut dh, mut dj, mut psi_match, mut push, mut comp, mut comp_oracle) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut psi_def, mut phi_def) = (f64::INFINITY, f64::INFINITY);
    let (mut kappa, mut kappa_oracle, mut fact, mut chart, mut phi_c_def, mut literal) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for p in seeded_points() {
        let (q, v) = point_arrays(&p);
        let ig = oracle::integrals(&q, &v, gamma);
        let nu = oracle::nu(ig.e, gamma);
        let (bq, bv) = oracle::gnomonic(&q, &v);
        let lib = psi(&p).unwrap();
        psi_match = psi_match.max(oracle::max_diff(&bq, &lib.q.0)).max(oracle::max_diff(&bv, &lib.v.0));
        dh = dh.max((oracle::kepler_energy(&bq, &bv, gamma) - ig.e).abs() / ig.e.abs());
        let (kl, kr) = oracle::kepler_momentum(&bq, &bv, gamma);
        let (ml, mr) = oracle::momentum(&q, &v, gamma);
        dj = dj.max(oracle::max_diff(&kl, &ml).max(oracle::max_diff(&kr, &mr)) / nu.max(1.0));
        push = push.max(pushforward_check(&p, &params, DIRECTIONAL_STEP).unwrap().0);
        comp = comp.max(composition_check(&p, &params).unwrap());
        // Φ_c from the Euclidean formulas against the sphere-side Φ.
        let nu_c = oracle::nu(oracle::kepler_energy(&bq, &bv, gamma), gamma);
        let (ac, bc) = oracle::frame(&bq, &bv, nu_c, gamma);
        let (xc, yc) = oracle::to_delaunay(&ac, &bc, nu_c);
        let (xs, ys) = oracle::ls_map(&q, &v, gamma);
        comp_oracle = comp_oracle.max(oracle::max_diff(&xc, &xs)).max(oracle::max_diff(&yc, &ys));

        let w = symplectic_witness(&p, &params, 1e-6).unwrap();
        psi_def = psi_def.min(w.psi_defect);
        phi_def = phi_def.min(w.phi_defect);
        kappa = kappa.max(w.kappa_fd_vs_formula);
        fact = fact.max(w.factorisation);
        chart = chart.max(w.gnomonic_chart_vs_formula);
        phi_c_def = phi_c_def.max(w.phi_c_defect);
        literal = literal.max(w.psi_vs_kappa_chart);
        kappa_oracle = kappa_oracle.max(kappa_oracle_defect(&oracle::spatial(&q), &oracle::spatial(&v)));
    }
    out.at_most("psi_vs_oracle", psi_match, 1e-12);
    out.at_most("H_K_pullback", dh, 1e-9);
    out.at_most("J_K_pullback", dj, 1e-9);
    out.at_most("pushforward", push, 1e-5);
    out.at_most("composition", comp, 1e-9);
    out.at_most("composition_oracle", comp_oracle, 1e-9);
    out.above("psi_defect_min", psi_def, 10.0 * 1e-5);
    out.at_most("kappa_fd_vs_formula", kappa, 1e-5);
    out.at_most("kappa_oracle_fd_vs_formula", kappa_oracle, 1e-5);
    out.at_most("psi_factorisation", fact, 1e-9);
    out.at_most("psi_defect_vs_kappa_formula_gnomonic_chart", chart, 1e-5);
    out.at_most("phi_c_defect", phi_c_def, 1e-5);
    out.above("phi_defect_min", phi_def, 10.0 * 1e-5);
    out.note(format!("info: q-chart psi defect minus kappa formula = {literal:.2e} (not asserted)"));
    let mut moser = 0.0f64;
    for o in orbits {
        let cfg = IntegratorConfig::dop853(o.period / 400.0, o.period);
        let traj = integrate(&o.start, &params, &cfg).unwrap();
        moser = moser.max(moser_correspondence(&traj, &params).unwrap());
    }
    out.at_most("moser_clock_correspondence", moser, 1e-6);
    out
}

/// FD pullback of `κ(𝐪,𝐯) = (𝐪, (1−|𝐪|²)𝐯)` against
/// `−|𝐪|² d𝐪∧d𝐯 − 2 Σ vᵢqⱼ dqᵢ∧dqⱼ`, all computed here.
fn kappa_oracle_defect(q: &V3, v: &V3) -> f64 {
    let kappa = |z: &SVector<f64, 6>| -> SVector<f64, 6> {
        let f = 1.0 - (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]);
        SVector::from([z[0], z[1], z[2], f * z[3], f * z[4], f * z[5]])
    };
    let z = SVector::<f64, 6>::from([q[0], q[1], q[2], v[0], v[1], v[2]]);
    let h = 1e-6;
    let d = SMatrix::<f64, 6, 6>::from_fn(|i, j| {
        let mut e = SVector::<f64, 6>::zeros();
        e[j] = h;
        (kappa(&(z + e))[i] - kappa(&(z - e))[i]) / (2.0 * h)
    });
    let mut j = SMatrix::<f64, 6, 6>::zeros();
    for i in 0..3 {
        j[(i, 3 + i)] = 1.0;
        j[(3 + i, i)] = -1.0;
    }
    let defect = d.transpose() * j * d - j;
    let q2 = oracle::dot(q, q);
    let mut formula = SMatrix::<f64, 6, 6>::zeros();
    for i in 0..3 {
        for k in 0..3 {
            formula[(i, k)] = -2.0 * v[i] * q[k] + 2.0 * v[k] * q[i];
        }
        formula[(i, 3 + i)] = -q2;
        formula[(3 + i, i)] = q2;
    }
    (defect - formula).amax()
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut out = Outcome::new();
    let params = unit();
    let gamma = 1.0;
    let eps = 0.999;
    // Apocentre at colatitude 0.1: orbit equation at φ = π gives
    // |μ|² = γ(1 − ε) tan θa, and the pericentre sits at 1 − q0² ≈ 2.5e-9.
    let theta = 0.1f64;
    let mu = (gamma * (1.0 - eps) * theta.tan()).sqrt();
    let p0 = SpherePhasePoint::new(
        kepler_sphere::Vec4::new(theta.cos(), -theta.sin(), 0.0, 0.0),
        kepler_sphere::Vec4::new(0.0, 0.0, -mu / theta.sin(), 0.0),
    );
    let (q, v) = point_arrays(&p0);
    let i0 = oracle::integrals(&q, &v, gamma);
    out.at_most("eccentricity_error", (oracle::norm(&i0.a) - eps).abs(), 1e-12);
    let period = oracle::period(i0.e, eps, gamma);
    let direct = integrate(&p0, &params, &IntegratorConfig::dop853(period / 100.0, 2.0 * period)).unwrap();
    let Some(collision) = direct.collision else {
        out.above("guard_tripped", 0.0, 0.5);
        return out;
    };
    out.note(format!("guard tripped at t={:.6} margin={:.2e}", collision.last_valid.t, collision.margin));
    let last = collision.last_valid.point;

    let cont = regularized_continuation(&last, &params, 5.0, 64).unwrap();
    let h0 = oracle::delaunay_energy(&cont.start.y.0, gamma);
    out.at_most("H_delaunay_vs_E", (h0 - i0.e).abs() / i0.e.abs(), 1e-6);
    out.at_most("H_delaunay_drift", cont.hamiltonian_drift, 1e-14);
    let periods_covered = cont.samples.last().unwrap().tau / cont.period;
    out.above("periods_covered", periods_covered, 5.0 - 1e-9);

    // Adaptive integration of the Delaunay field over the same span.
    let run = delaunay_dop853(&cont.start, 5.0 * cont.period, &params, 1e-12).unwrap();
    let exact = delaunay_flow(&cont.start, 5.0 * cont.period, &params).unwrap();
    let ratio = run.min_step() / run.max_step();
    out.above("min_step/max_step", ratio, 1e-2);
    out.at_most("adaptive_vs_closed_form", run.end.max_abs_diff(&exact), 1e-8);
    out.note(format!("adaptive steps={}", run.step_sizes.len()));

    // The continuation maps back onto the same spherical orbit.
    let mut back = 0.0f64;
    let mut mapped = 0usize;
    for s in &cont.samples {
        if let Some(p) = s.sphere {
            let (q, v) = point_arrays(&p);
            if 1.0 - q[0] * q[0] < 1e-6 {
                continue;
            }
            let ig = oracle::integrals(&q, &v, gamma);
            let d = ((ig.e - i0.e) / i0.e).abs().max(oracle::max_diff(&ig.mu, &i0.mu) / oracle::norm(&i0.mu)).max(oracle::max_diff(&ig.a, &i0.a));
            back = back.max(d);
            mapped += 1;
        }
    }
    out.at_most("pulled_back_integrals", back, 1e-6);
    out.above("pulled_back_samples", mapped as f64, 100.0);
    // 𝓗 along the closed form is constant: check the flow keeps ⟨y,y⟩.
    let end: DelaunayPoint = cont.samples.last().unwrap().delaunay;
    out.at_most("closed_form_H_end", (delaunay_hamiltonian(&end, &params).unwrap() - h0).abs(), 1e-15);
    out.runtime(start.elapsed(), Duration::from_secs(10));
    out
}

#[test]
fn acceptance() {
    let mut all = true;
    all &= criterion_1().print(1, "bracket table");
    let start = Instant::now();
    let orbits = criterion_2_orbits();
    all &= criterion_2(&orbits, start.elapsed()).print(2, "conservation");
    all &= criterion_3(&orbits).print(3, "orbit equation");
    all &= criterion_4(&orbits).print(4, "moser");
    all &= criterion_5().print(5, "ligon-schaaf");
    all &= criterion_6().print(6, "so(4)");
    all &= criterion_7(&orbits).print(7, "gnomonic");
    all &= criterion_8().print(8, "regularized continuation");
    assert!(all, "some acceptance criteria failed");
}
