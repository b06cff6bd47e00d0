//! Hodograph regularization for negative reduced energy.
//!
//! Along an orbit `π` runs on a circle, the hodocycle, with centre `B`,
//! radius `γ/|μ|` and normal `μ̂`. On a fixed energy level the conformal
//! metric `4 dπ·dπ/(|π|² − 2E)²` has constant curvature `−2E` and the
//! hodocycles are its geodesics, traversed at unit speed in the clock
//! `s = ∫ dt/(q0|𝐪|)`.

use crate::conserved::{conserved_set, pi_vector, ConservedSet};
use crate::dynamics::{hamiltonian, vector_field, KeplerParams, Trajectory};
use crate::error::{KeplerError, Result};
use crate::geometry::{SpherePhasePoint, Vec3};
use crate::scalar::Real;

/// The circle traced by `π` along one orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hodocycle<T> {
    pub center: Vec3<T>,
    pub radius: T,
    pub normal: Vec3<T>,
}

impl<T: Real> Hodocycle<T> {
    /// Euclidean distance from `pi` to the circle.
    pub fn residual(&self, pi: &Vec3<T>) -> T {
        let d = *pi - self.center;
        let off_plane = d.dot(&self.normal);
        let in_plane = (d - self.normal * off_plane).norm() - self.radius;
        off_plane.hypot(in_plane)
    }

    /// Point at angle `lambda` from an arbitrary in-plane reference axis,
    /// together with its derivative in `lambda`.
    pub fn point_at(&self, lambda: T) -> (Vec3<T>, Vec3<T>) {
        let (u, w) = self.plane_basis();
        let (s, c) = lambda.sin_cos();
        let point = self.center + (u * c + w * s) * self.radius;
        let tangent = (w * c - u * s) * self.radius;
        (point, tangent)
    }

    fn plane_basis(&self) -> (Vec3<T>, Vec3<T>) {
        let n = self.normal;
        let seed = if n[0].abs() < T::of(0.9) { Vec3::unit(0) } else { Vec3::unit(1) };
        let u = (seed - n * n.dot(&seed)).normalized().expect("seed is not parallel to normal");
        (u, n.cross(&u))
    }
}

/// Predicted hodocycle `(B, γ/|μ|, μ̂)` of the orbit through `cs`.
pub fn hodocycle<T: Real>(cs: &ConservedSet<T>, params: &KeplerParams<T>) -> Result<Hodocycle<T>> {
    if !(cs.energy < T::zero()) {
        return Err(KeplerError::PositiveEnergy { energy: cs.energy.as_f64() });
    }
    let normal = cs.mu.normalized().ok_or(KeplerError::DegenerateOrbit)?;
    Ok(Hodocycle { center: cs.b, radius: params.gamma / cs.mu.norm(), normal })
}

/// Conformal factor `4/(|π|² − 2E)²` of the metric on velocity space.
pub fn moser_metric<T: Real>(pi: &Vec3<T>, energy: T) -> Result<T> {
    let d = pi.norm_squared() - T::of(2.0) * energy;
    if !(d > T::zero()) {
        return Err(KeplerError::OutsideChart);
    }
    Ok(T::of(4.0) / (d * d))
}

/// Conformal factor `4/(1 − 2E w·w)²` in the inverted chart.
pub fn moser_metric_inverted<T: Real>(w: &Vec3<T>, energy: T) -> Result<T> {
    let d = T::one() - T::of(2.0) * energy * w.norm_squared();
    if !(d > T::zero()) {
        return Err(KeplerError::OutsideChart);
    }
    Ok(T::of(4.0) / (d * d))
}

/// Inverted coordinate `w = π/|π|²`; the origin `π = 0` has no image.
pub fn invert<T: Real>(pi: &Vec3<T>) -> Result<Vec3<T>> {
    let n2 = pi.norm_squared();
    if !(n2 > T::zero()) {
        return Err(KeplerError::OutsideChart);
    }
    Ok(*pi / n2)
}

/// Both charts at a point of velocity space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoserChart<T> {
    pub energy: T,
    pub factor: T,
    pub w: Vec3<T>,
}

pub fn moser_chart<T: Real>(pi: &Vec3<T>, energy: T) -> Result<MoserChart<T>> {
    Ok(MoserChart { energy, factor: moser_metric(pi, energy)?, w: invert(pi)? })
}

/// `γ q0/|𝐪| − (½|π|² − ½(2H − |μ|²))`.
pub fn energy_identity_residual<T: Real>(
    p: &SpherePhasePoint<T>,
    params: &KeplerParams<T>,
) -> Result<T> {
    let h = hamiltonian(p, params)?;
    let mu2 = p.qs().cross(&p.vs()).norm_squared();
    let pi = pi_vector(p);
    let lhs = params.gamma * p.q0() / p.qs().norm();
    Ok(lhs - (T::of(0.5) * pi.norm_squared() - T::of(0.5) * (h + h - mu2)))
}

/// `dπ/dt` from the constrained field.
pub fn pi_rate<T: Real>(p: &SpherePhasePoint<T>, params: &KeplerParams<T>) -> Result<Vec3<T>> {
    let (qd, vd) = vector_field(p, params)?;
    Ok(p.vs() * qd.head() + vd.tail() * p.q0() - p.qs() * vd.head() - qd.tail() * p.v0())
}

/// `| |dπ/ds| − |½|π|² − E| |` with `ds = dt/(q0|𝐪|)`.
pub fn hodograph_speed_residual<T: Real>(
    p: &SpherePhasePoint<T>,
    params: &KeplerParams<T>,
) -> Result<T> {
    let cs = conserved_set(p, params)?;
    let speed = pi_rate(p, params)?.norm() * p.q0() * p.qs().norm();
    Ok((speed - (T::of(0.5) * cs.pi.norm_squared() - cs.energy).abs()).abs())
}

/// `1/(q0|𝐪|)` and its time derivative.
fn clock_integrand<T: Real>(p: &SpherePhasePoint<T>) -> Result<(T, T)> {
    let (q0, r) = (p.q0(), p.qs().norm());
    if !(q0 > T::zero() && r > T::zero()) {
        return Err(KeplerError::EquatorSingularity { q0: q0.as_f64() });
    }
    let r_dot = p.qs().dot(&p.vs()) / r;
    let g = T::one() / (q0 * r);
    Ok((g, -(p.v0() * r + q0 * r_dot) * g * g))
}

/// Re-derives the arc-length clock `s` of every sample by composite Hermite
/// quadrature over the recorded states.
///
/// The integrator already carries `s` as a state component; this is the
/// independent route for trajectories assembled elsewhere.
pub fn arclength_clock<T: Real>(traj: &Trajectory<T>, params: &KeplerParams<T>) -> Result<Trajectory<T>> {
    if let Some(c) = &traj.collision {
        return Err(KeplerError::CollisionProximity { margin: c.margin.as_f64(), guard: c.guard.as_f64() });
    }
    let Some(first) = traj.first() else { return Ok(traj.clone()) };
    let energy = conserved_set(&first.point, params)?.energy;
    if !(energy < T::zero()) {
        return Err(KeplerError::PositiveEnergy { energy: energy.as_f64() });
    }
    let mut out = traj.clone();
    let mut s = T::zero();
    let mut prev = clock_integrand(&first.point)?;
    out.samples[0].s = s;
    for k in 1..out.samples.len() {
        let cur = clock_integrand(&out.samples[k].point)?;
        let h = out.samples[k].t - out.samples[k - 1].t;
        s = s + h / T::of(2.0) * (prev.0 + cur.0) + h * h / T::of(12.0) * (prev.1 - cur.1);
        out.samples[k].s = s;
        prev = cur;
    }
    Ok(out)
}

/// Length of the sampled hodograph in the conformal metric, by composite
/// Simpson quadrature in `t` of `2|π̇|/(|π|² − 2E)`.
pub fn hodograph_metric_length<T: Real>(traj: &Trajectory<T>, params: &KeplerParams<T>) -> Result<T> {
    let Some(first) = traj.first() else { return Ok(T::zero()) };
    let energy = conserved_set(&first.point, params)?.energy;
    let speed = |p: &SpherePhasePoint<T>| -> Result<T> {
        Ok(pi_rate(p, params)?.norm() * moser_metric(&pi_vector(p), energy)?.sqrt())
    };
    let f: Vec<T> = traj.points().map(speed).collect::<Result<_>>()?;
    let t: Vec<T> = traj.samples.iter().map(|s| s.t).collect();
    Ok(simpson_nonuniform(&t, &f))
}

/// Composite Simpson rule on possibly uneven nodes; an odd interval count
/// closes with a trapezoid.
fn simpson_nonuniform<T: Real>(t: &[T], f: &[T]) -> T {
    let n = t.len();
    let mut total = T::zero();
    let mut k = 0;
    while k + 2 < n {
        let (h0, h1) = (t[k + 1] - t[k], t[k + 2] - t[k + 1]);
        let hs = h0 + h1;
        let w0 = (T::of(2.0) * h0 - h1) * hs / (T::of(6.0) * h0);
        let w1 = hs * hs * hs / (T::of(6.0) * h0 * h1);
        let w2 = (T::of(2.0) * h1 - h0) * hs / (T::of(6.0) * h1);
        total = total + w0 * f[k] + w1 * f[k + 1] + w2 * f[k + 2];
        k += 2;
    }
    if k + 1 < n {
        total += (t[k + 1] - t[k]) * (f[k] + f[k + 1]) / T::of(2.0);
    }
    total
}

/// `log` of the conformal scale, `f = log(2/(|π|² − 2E))`, so the metric is
/// `e^{2f} dπ·dπ`.
fn log_scale<T: Real>(pi: &Vec3<T>, energy: T) -> Result<T> {
    Ok(moser_metric(pi, energy)?.sqrt().ln())
}

fn fd_gradient<T: Real>(pi: &Vec3<T>, energy: T, h: T) -> Result<Vec3<T>> {
    let mut g = Vec3::zeros();
    for i in 0..3 {
        let e = Vec3::unit(i) * h;
        g[i] = (log_scale(&(*pi + e), energy)? - log_scale(&(*pi - e), energy)?) / (h + h);
    }
    Ok(g)
}

/// Largest deviation from `−2E` of the sectional curvatures of the three
/// coordinate planes at each sample, with all derivatives of the conformal
/// scale taken by central differences of step `h`.
pub fn curvature_check<T: Real>(energy: T, samples: &[Vec3<T>], h: T) -> Result<T> {
    if !(energy < T::zero()) {
        return Err(KeplerError::PositiveEnergy { energy: energy.as_f64() });
    }
    let target = T::of(-2.0) * energy;
    let mut worst = T::zero();
    for pi in samples {
        let f0 = log_scale(pi, energy)?;
        let grad = fd_gradient(pi, energy, h)?;
        let mut second = [T::zero(); 3];
        for (i, slot) in second.iter_mut().enumerate() {
            let e = Vec3::unit(i) * h;
            let fp = log_scale(&(*pi + e), energy)?;
            let fm = log_scale(&(*pi - e), energy)?;
            *slot = (fp - f0 - f0 + fm) / (h * h);
        }
        let conformal = (-(f0 + f0)).exp();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let k = conformal
                * (-second[i] - second[j] + grad[i] * grad[i] + grad[j] * grad[j] - grad.norm_squared());
            worst = worst.max((k - target).abs());
        }
    }
    Ok(worst)
}

/// Geodesic defect of the hodocycle at `pi`: its curvature vector
/// `(c − π)/R²` against the component of `∇f` normal to the curve, scaled by
/// the radius. `∇f` is taken by central differences of step `h`.
pub fn geodesic_residual<T: Real>(hodo: &Hodocycle<T>, pi: &Vec3<T>, energy: T, h: T) -> Result<T> {
    let radial = *pi - hodo.center;
    let tangent = hodo.normal.cross(&radial).normalized().ok_or(KeplerError::OutsideChart)?;
    let grad = fd_gradient(pi, energy, h)?;
    let normal_part = grad - tangent * grad.dot(&tangent);
    let curvature = -radial / (hodo.radius * hodo.radius);
    Ok((curvature - normal_part).norm() * hodo.radius)
}

/// Five-point Gauss–Legendre nodes and weights on `[−1, 1]`.
const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Metric length of the curve `λ ↦ π(λ)`, `λ ∈ [a, b]`, computed once in the
/// `π`-chart and once in the `w`-chart. `curve` returns the point and its
/// `λ`-derivative.
pub fn chart_lengths<T: Real>(
    curve: impl Fn(T) -> (Vec3<T>, Vec3<T>),
    (a, b): (T, T),
    energy: T,
    panels: usize,
) -> Result<(T, T)> {
    let width = (b - a) / T::of(panels as f64);
    let half = width / T::of(2.0);
    let (mut len_pi, mut len_w) = (T::zero(), T::zero());
    for k in 0..panels {
        let mid = a + width * T::of(k as f64) + half;
        for (x, wgt) in GAUSS5 {
            let (pi, dpi) = curve(mid + half * T::of(x));
            let n2 = pi.norm_squared();
            let w = invert(&pi)?;
            let dw = (dpi * n2 - pi * (T::of(2.0) * pi.dot(&dpi))) / (n2 * n2);
            let weight = T::of(wgt) * half;
            len_pi += weight * dpi.norm() * moser_metric(&pi, energy)?.sqrt();
            len_w += weight * dw.norm() * moser_metric_inverted(&w, energy)?.sqrt();
        }
    }
    Ok((len_pi, len_w))
}
