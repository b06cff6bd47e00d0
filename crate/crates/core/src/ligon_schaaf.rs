//! Regularization of all negative-energy orbits at once by a modified
//! Ligon–Schaaf map onto the Delaunay system on T⁺S³.
//!
//! The map `Φ(q,v) = (α sin φ + β cos φ, ν(−α cos φ + β sin φ))` with
//! `φ = α0` sends Kepler orbits to great circles. It intertwines the
//! momentum-like map `J = (μ, ẽ)` with the SO(4) momentum map `𝒥(x,y) = x∧y`,
//! the reduced energy with `𝓗 = −½γ²/⟨y,y⟩`, and the vector fields up to the
//! clock `τ = ∫ dt/q0²`.

use ode_solvers::dop_shared::{IntegrationError, OutputType, System};
use ode_solvers::{Dop853, SVector};

use crate::conserved::{pi_vector, reduced_energy};
use crate::dynamics::brackets::eta_scale;
use crate::dynamics::{hamiltonian, vector_field, KeplerParams, Trajectory};
use crate::error::{KeplerError, Result};
use crate::fd;
use crate::geometry::{SpherePhasePoint, Vec3, Vec4};
use crate::gnomonic::ls_map_inverse;
use crate::scalar::Real;

/// The orthonormal pair `(α, β)` with the phase `φ = α0` and `ν = γ/√(−2E)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsFrame<T> {
    pub alpha: Vec4<T>,
    pub beta: Vec4<T>,
    pub phi: T,
    pub nu: T,
}

impl<T: Real> LsFrame<T> {
    /// Largest of `|⟨α,α⟩ − 1|`, `|⟨β,β⟩ − 1|`, `|⟨α,β⟩|`.
    pub fn orthonormality_defect(&self) -> T {
        let aa = (self.alpha.norm_squared() - T::one()).abs();
        let bb = (self.beta.norm_squared() - T::one()).abs();
        aa.max(bb).max(self.alpha.dot(&self.beta).abs())
    }
}

/// `ν = γ/√(−2E)` for `E < 0`.
pub(crate) fn nu_of<T: Real>(energy: T, gamma: T) -> Result<T> {
    if energy < T::zero() {
        Ok(gamma / (T::of(-2.0) * energy).sqrt())
    } else {
        Err(KeplerError::PositiveEnergy { energy: energy.as_f64() })
    }
}

/// Builds `(α, β)` from the Euclidean-looking data `(𝐪/q0, π)`, which is all
/// the frame depends on. Shared with the gnomonic side.
pub(crate) fn frame_from_qv<T: Real>(big_q: &Vec3<T>, v: &Vec3<T>, nu: T, gamma: T) -> LsFrame<T> {
    let r = big_q.norm();
    let qv = big_q.dot(v);
    let alpha = Vec4::from_parts(qv / nu, *big_q / r - *v * (qv / gamma));
    let beta = Vec4::from_parts(r * v.norm_squared() / gamma - T::one(), *v * (r / nu));
    LsFrame { alpha, beta, phi: alpha.head(), nu }
}

pub fn ls_frame<T: Real>(p: &SpherePhasePoint<T>, params: &KeplerParams<T>) -> Result<LsFrame<T>> {
    let energy = reduced_energy(p, params)?;
    let nu = nu_of(energy, params.gamma)?;
    let q0 = p.q0();
    if !(q0 > T::zero()) {
        return Err(KeplerError::EquatorSingularity { q0: q0.as_f64() });
    }
    let q = p.qs();
    let pi = pi_vector(p);
    let r = q.norm();
    let qp = q.dot(&pi);
    let alpha = Vec4::from_parts(qp / (nu * q0), q / r - pi * (qp / (params.gamma * q0)));
    let beta = Vec4::from_parts(
        r * pi.norm_squared() / (params.gamma * q0) - T::one(),
        pi * (r / (nu * q0)),
    );
    Ok(LsFrame { alpha, beta, phi: alpha.head(), nu })
}

/// A point `(x, y)` of T⁺S³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaunayPoint<T> {
    pub x: Vec4<T>,
    pub y: Vec4<T>,
}

impl<T: Real> DelaunayPoint<T> {
    pub fn new(x: Vec4<T>, y: Vec4<T>) -> Self {
        Self { x, y }
    }

    /// `(⟨x,x⟩ − 1, ⟨x,y⟩)`.
    pub fn constraint_residual(&self) -> (T, T) {
        (self.x.norm_squared() - T::one(), self.x.dot(&self.y))
    }

    pub fn to_array(&self) -> [T; 8] {
        let mut z = [T::zero(); 8];
        z[..4].copy_from_slice(&self.x.0);
        z[4..].copy_from_slice(&self.y.0);
        z
    }

    pub fn from_array(z: [T; 8]) -> Self {
        Self::new(Vec4([z[0], z[1], z[2], z[3]]), Vec4([z[4], z[5], z[6], z[7]]))
    }

    /// Largest componentwise difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        (self.x - other.x).max_abs().max((self.y - other.y).max_abs())
    }
}

/// `Φ` with an arbitrary phase `φ`; every choice intertwines `𝒥` and `J`.
pub fn frame_to_delaunay<T: Real>(frame: &LsFrame<T>, phi: T) -> DelaunayPoint<T> {
    let (s, c) = phi.sin_cos();
    DelaunayPoint::new(
        frame.alpha * s + frame.beta * c,
        (frame.beta * s - frame.alpha * c) * frame.nu,
    )
}

/// `Φ(q, v)` with `φ = α0`.
pub fn ls_map<T: Real>(p: &SpherePhasePoint<T>, params: &KeplerParams<T>) -> Result<DelaunayPoint<T>> {
    let frame = ls_frame(p, params)?;
    Ok(frame_to_delaunay(&frame, frame.phi))
}

pub fn ls_map_with_phi<T: Real>(
    p: &SpherePhasePoint<T>,
    params: &KeplerParams<T>,
    phi: T,
) -> Result<DelaunayPoint<T>> {
    Ok(frame_to_delaunay(&ls_frame(p, params)?, phi))
}

fn nonzero_y<T: Real>(d: &DelaunayPoint<T>) -> Result<T> {
    let yy = d.y.norm_squared();
    if yy > T::zero() {
        Ok(yy)
    } else {
        Err(KeplerError::ZeroSection)
    }
}

/// `𝓗 = −½ γ²/⟨y,y⟩`.
pub fn delaunay_hamiltonian<T: Real>(d: &DelaunayPoint<T>, params: &KeplerParams<T>) -> Result<T> {
    let yy = nonzero_y(d)?;
    Ok(T::of(-0.5) * params.gamma * params.gamma / yy)
}

/// `ẋ = γ² y/⟨y,y⟩²`, `ẏ = −γ² x/⟨y,y⟩`.
pub fn delaunay_field<T: Real>(
    d: &DelaunayPoint<T>,
    params: &KeplerParams<T>,
) -> Result<(Vec4<T>, Vec4<T>)> {
    let yy = nonzero_y(d)?;
    let g2 = params.gamma * params.gamma;
    Ok((d.y * (g2 / (yy * yy)), d.x * (-g2 / yy)))
}

/// Closed-form Delaunay flow: rotation in the `(x, ŷ)` plane at the rate
/// `Ω = γ²/|y|³`.
pub fn delaunay_flow<T: Real>(
    d0: &DelaunayPoint<T>,
    t: T,
    params: &KeplerParams<T>,
) -> Result<DelaunayPoint<T>> {
    let yy = nonzero_y(d0)?;
    let ny = yy.sqrt();
    let omega = params.gamma * params.gamma / (yy * ny);
    let (s, c) = (omega * t).sin_cos();
    Ok(DelaunayPoint::new(
        d0.x * c + d0.y * (s / ny),
        d0.y * c - d0.x * (ny * s),
    ))
}

/// Angular rate `Ω = γ²/|y|³` of the Delaunay flow.
pub fn delaunay_rate<T: Real>(d: &DelaunayPoint<T>, params: &KeplerParams<T>) -> Result<T> {
    let yy = nonzero_y(d)?;
    Ok(params.gamma * params.gamma / (yy * yy.sqrt()))
}

/// Classical RK4 on the Delaunay field with `steps` equal steps up to `t`.
pub fn delaunay_rk4<T: Real>(
    d0: &DelaunayPoint<T>,
    t: T,
    steps: usize,
    params: &KeplerParams<T>,
) -> Result<DelaunayPoint<T>> {
    let h = t / T::of(steps as f64);
    let f = |z: &[T; 8]| -> Result<[T; 8]> {
        let (dx, dy) = delaunay_field(&DelaunayPoint::from_array(*z), params)?;
        Ok(DelaunayPoint::new(dx, dy).to_array())
    };
    let axpy = |z: &[T; 8], a: T, k: &[T; 8]| -> [T; 8] { std::array::from_fn(|i| z[i] + a * k[i]) };
    let mut z = d0.to_array();
    let half = T::of(0.5);
    for _ in 0..steps {
        let k1 = f(&z)?;
        let k2 = f(&axpy(&z, h * half, &k1))?;
        let k3 = f(&axpy(&z, h * half, &k2))?;
        let k4 = f(&axpy(&z, h, &k3))?;
        z = std::array::from_fn(|i| {
            z[i] + h / T::of(6.0) * (k1[i] + T::of(2.0) * (k2[i] + k3[i]) + k4[i])
        });
    }
    Ok(DelaunayPoint::from_array(z))
}

/// An element of so(4) written as a pair of 3-vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct So4Element<T> {
    pub left: Vec3<T>,
    pub right: Vec3<T>,
}

impl<T: Real> So4Element<T> {
    pub fn new(left: Vec3<T>, right: Vec3<T>) -> Self {
        Self { left, right }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        (self.left - other.left).max_abs().max((self.right - other.right).max_abs())
    }

    /// Largest component magnitude.
    pub fn max_abs(&self) -> T {
        self.left.max_abs().max(self.right.max_abs())
    }
}

/// `J(q, v) = (μ, ẽ)` with `ẽ = −(ν/γ) A`.
pub fn momentum_j<T: Real>(p: &SpherePhasePoint<T>, params: &KeplerParams<T>) -> Result<So4Element<T>> {
    let energy = reduced_energy(p, params)?;
    let nu = nu_of(energy, params.gamma)?;
    let q = p.qs();
    let mu = q.cross(&p.vs());
    let a = pi_vector(p).cross(&mu) - q * (params.gamma / q.norm());
    Ok(So4Element::new(mu, a * (-nu / params.gamma)))
}

/// `𝒥(x, y) = x∧y`, written as `(𝐱×𝐲, x0𝐲 − y0𝐱)`.
pub fn momentum_delaunay<T: Real>(d: &DelaunayPoint<T>) -> So4Element<T> {
    let (x, y) = (d.x.tail(), d.y.tail());
    So4Element::new(x.cross(&y), y * d.x.head() - x * d.y.head())
}

/// The so(4)-valued map `ρ = (μ, ηA)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rho<T> {
    pub element: So4Element<T>,
    /// `|μ|² − C(H)` with `C(H) = H + √(γ² + H²)`, reported on the circular
    /// locus `A = 0` where it must vanish.
    pub locus_residual: Option<T>,
}

/// `C(H) = H + √(γ² + H²)`.
pub fn c_of_h<T: Real>(h: T, gamma: T) -> T {
    h + (gamma * gamma + h * h).sqrt()
}

/// `ρ(q, v)`. Points with `|A| ≤ circular_tol·γ` are treated as circular.
pub fn momentum_rho<T: Real>(
    p: &SpherePhasePoint<T>,
    params: &KeplerParams<T>,
    circular_tol: T,
) -> Result<Rho<T>> {
    let h = hamiltonian(p, params)?;
    let q = p.qs();
    let mu = q.cross(&p.vs());
    let a = pi_vector(p).cross(&mu) - q * (params.gamma / q.norm());
    if a.norm() <= circular_tol * params.gamma {
        let locus = mu.norm_squared() - c_of_h(h, params.gamma);
        return Ok(Rho { element: So4Element::new(mu, Vec3::zeros()), locus_residual: Some(locus) });
    }
    let eta = eta_scale(p, params)?;
    Ok(Rho { element: So4Element::new(mu, a * eta), locus_residual: None })
}

/// Residual of `Φ_* X_H = (1/q0²) X_𝓗` at `p`, with `DΦ` applied to `X_H` by
/// a central difference of step `h` along the field direction. Returns the
/// residual relative to `max(1, |X_𝓗|/q0²)` and the rescaling `1/q0²`.
pub fn equivalence_check<T: Real>(
    p: &SpherePhasePoint<T>,
    params: &KeplerParams<T>,
    h: T,
) -> Result<(T, T)> {
    let (qd, vd) = vector_field(p, params)?;
    let field = SpherePhasePoint::new(qd, vd).to_array();
    let scale = field.iter().fold(T::zero(), |acc, &a| acc.max(a.abs()));
    let phi = |z: &[T; 8]| ls_map(&SpherePhasePoint::from_array(*z), params).map(|d| d.to_array());
    let lhs = fd::directional4(phi, &p.to_array(), &field, h / scale.max(T::one()))?;
    let image = ls_map(p, params)?;
    let (dx, dy) = delaunay_field(&image, params)?;
    let rescale = T::one() / (p.q0() * p.q0());
    let rhs = DelaunayPoint::new(dx * rescale, dy * rescale).to_array();
    let mut worst = T::zero();
    let mut size = T::one();
    for k in 0..8 {
        worst = worst.max((lhs[k] - rhs[k]).abs());
        size = size.max(rhs[k].abs());
    }
    Ok((worst / size, rescale))
}

/// One classical RK4 step of the constrained field.
fn rk4_sphere_step<T: Real>(
    p: &SpherePhasePoint<T>,
    dt: T,
    params: &KeplerParams<T>,
) -> Result<SpherePhasePoint<T>> {
    let f = |z: &SpherePhasePoint<T>| -> Result<SpherePhasePoint<T>> {
        let (a, b) = vector_field(z, params)?;
        Ok(SpherePhasePoint::new(a, b))
    };
    let shift = |z: &SpherePhasePoint<T>, a: T, k: &SpherePhasePoint<T>| {
        SpherePhasePoint::new(z.q + k.q * a, z.v + k.v * a)
    };
    let half = dt * T::of(0.5);
    let k1 = f(p)?;
    let k2 = f(&shift(p, half, &k1))?;
    let k3 = f(&shift(p, half, &k2))?;
    let k4 = f(&shift(p, dt, &k3))?;
    let sixth = dt / T::of(6.0);
    Ok(SpherePhasePoint::new(
        p.q + (k1.q + k2.q * T::of(2.0) + k3.q * T::of(2.0) + k4.q) * sixth,
        p.v + (k1.v + k2.v * T::of(2.0) + k3.v * T::of(2.0) + k4.v) * sixth,
    ))
}

/// Compares central differences of `α` and `β` along the flow (one RK4 step
/// of size `h` each way) with `dα/dt = kβ`, `dβ/dt = −kα`,
/// `k = √(−2E)/(q0|𝐪|)`. The residual is relative to `max(1, k)`.
pub fn frame_derivative_check<T: Real>(
    p: &SpherePhasePoint<T>,
    params: &KeplerParams<T>,
    h: T,
) -> Result<T> {
    let frame = ls_frame(p, params)?;
    let energy = reduced_energy(p, params)?;
    let k = (T::of(-2.0) * energy).sqrt() / (p.q0() * p.qs().norm());
    let fwd = ls_frame(&rk4_sphere_step(p, h, params)?, params)?;
    let bwd = ls_frame(&rk4_sphere_step(p, -h, params)?, params)?;
    let d_alpha = (fwd.alpha - bwd.alpha) / (h + h);
    let d_beta = (fwd.beta - bwd.beta) / (h + h);
    let ra = (d_alpha - frame.beta * k).max_abs();
    let rb = (d_beta + frame.alpha * k).max_abs();
    Ok(ra.max(rb) / k.max(T::one()))
}

/// Largest difference between `Φ` applied along a trajectory and the
/// Delaunay flow from `Φ(p(0))` evaluated at the sample's `τ`.
pub fn flow_conjugation_residual<T: Real>(traj: &Trajectory<T>, params: &KeplerParams<T>) -> Result<T> {
    let Some(first) = traj.first() else { return Ok(T::zero()) };
    let d0 = ls_map(&first.point, params)?;
    let mut worst = T::zero();
    for s in &traj.samples {
        let predicted = delaunay_flow(&d0, s.tau, params)?;
        worst = worst.max(ls_map(&s.point, params)?.max_abs_diff(&predicted));
    }
    Ok(worst)
}

/// One sample of a regularized continuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationSample<T> {
    /// Delaunay time since the hand-over point.
    pub tau: T,
    pub delaunay: DelaunayPoint<T>,
    /// The preimage on TS³, absent at the collision point.
    pub sphere: Option<SpherePhasePoint<T>>,
}

/// Continuation of a trajectory past a collision through its Delaunay image.
#[derive(Debug, Clone, PartialEq)]
pub struct Continuation<T> {
    pub start: DelaunayPoint<T>,
    /// `2π/Ω`.
    pub period: T,
    pub samples: Vec<ContinuationSample<T>>,
    /// Largest relative change of `𝓗` over the samples.
    pub hamiltonian_drift: T,
}

/// Maps `last_valid` through `Φ` and follows the closed-form Delaunay flow
/// for `periods` revolutions, mapping back through `Φ⁻¹` where it exists.
pub fn regularized_continuation<T: Real>(
    last_valid: &SpherePhasePoint<T>,
    params: &KeplerParams<T>,
    periods: T,
    samples_per_period: usize,
) -> Result<Continuation<T>> {
    let start = ls_map(last_valid, params)?;
    let h0 = delaunay_hamiltonian(&start, params)?;
    let period = T::TAU() / delaunay_rate(&start, params)?;
    let n = (periods * T::of(samples_per_period as f64)).ceil().to_usize().unwrap_or(0);
    let dt = period / T::of(samples_per_period as f64);
    let mut samples = Vec::with_capacity(n + 1);
    let mut drift = T::zero();
    for k in 0..=n {
        let tau = dt * T::of(k as f64);
        let d = delaunay_flow(&start, tau, params)?;
        drift = drift.max(((delaunay_hamiltonian(&d, params)? - h0) / h0).abs());
        let sphere = ls_map_inverse(&d, params).ok();
        samples.push(ContinuationSample { tau, delaunay: d, sphere });
    }
    Ok(Continuation { start, period, samples, hamiltonian_drift: drift })
}

/// Accepted steps of an adaptive run of the Delaunay field.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveRun<T> {
    pub end: DelaunayPoint<T>,
    pub step_sizes: Vec<T>,
}

impl<T: Real> AdaptiveRun<T> {
    pub fn min_step(&self) -> T {
        self.step_sizes.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_step(&self) -> T {
        self.step_sizes.iter().copied().fold(T::zero(), T::max)
    }
}

struct DelaunaySystem<T> {
    gamma: T,
}

impl<T: Real> System<T, SVector<T, 8>> for DelaunaySystem<T> {
    fn system(&self, _t: T, y: &SVector<T, 8>, dy: &mut SVector<T, 8>) {
        let d = DelaunayPoint::from_array(std::array::from_fn(|i| y[i]));
        let yy = d.y.norm_squared();
        let g2 = self.gamma * self.gamma;
        let (dx, dyv) = (d.y * (g2 / (yy * yy)), d.x * (-g2 / yy));
        let out = DelaunayPoint::new(dx, dyv).to_array();
        *dy = SVector::from_fn(|i, _| out[i]);
    }
}

/// Integrates the Delaunay field with DOP853 up to `tau_end` and reports
/// every accepted step size.
pub fn delaunay_dop853<T: Real>(
    d0: &DelaunayPoint<T>,
    tau_end: T,
    params: &KeplerParams<T>,
    tol: T,
) -> Result<AdaptiveRun<T>>
where
    f64: From<T>,
{
    nonzero_y(d0)?;
    let z0 = d0.to_array();
    let y0 = SVector::<T, 8>::from_fn(|i, _| z0[i]);
    let system = DelaunaySystem { gamma: params.gamma };
    let mut solver = Dop853::new(system, T::zero(), tau_end, tau_end, y0, tol, tol);
    solver.set_output(OutputType::Sparse);
    solver.integrate().map_err(|e| match e {
        IntegrationError::MaxNumStepReached { x, .. }
        | IntegrationError::StepSizeUnderflow { x }
        | IntegrationError::StiffnessDetected { x } => KeplerError::StepFailure { t: x, reason: e.to_string() },
    })?;
    let xs = solver.x_out();
    let step_sizes = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let last = solver.y_out().last().expect("solver output is never empty");
    Ok(AdaptiveRun { end: DelaunayPoint::from_array(std::array::from_fn(|i| last[i])), step_sizes })
}
