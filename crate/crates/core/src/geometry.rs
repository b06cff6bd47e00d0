//! Fixed-dimension vector algebra, the constraint manifold TS³ ⊂ Tℝ⁴, the
//! tolerance policy, and the shared FixtureC1 relative equilibrium.
//!
//! A point of ℝ⁴ is split as `q = (q0, 𝐪)`, where `q0` is the coordinate
//! along the attracting pole `e0` and `𝐪 ∈ ℝ³` is the spatial part. The
//! same split is used for velocities.

use std::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{KeplerError, Result};
use crate::scalar::Real;

macro_rules! impl_vector_ops {
    ($name:ident, $n:expr) => {
        impl<T: Real> $name<T> {
            pub fn zeros() -> Self {
                Self([T::zero(); $n])
            }

            pub fn from_fn(mut f: impl FnMut(usize) -> T) -> Self {
                let mut out = [T::zero(); $n];
                for (i, slot) in out.iter_mut().enumerate() {
                    *slot = f(i);
                }
                Self(out)
            }

            pub fn dot(&self, other: &Self) -> T {
                self.0
                    .iter()
                    .zip(other.0.iter())
                    .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            }

            pub fn norm_squared(&self) -> T {
                self.dot(self)
            }

            pub fn norm(&self) -> T {
                self.norm_squared().sqrt()
            }

            /// Largest absolute component.
            pub fn max_abs(&self) -> T {
                self.0.iter().fold(T::zero(), |acc, &a| acc.max(a.abs()))
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|a| a.is_finite())
            }

            pub fn map(&self, f: impl Fn(T) -> T) -> Self {
                Self::from_fn(|i| f(self.0[i]))
            }

            /// Unit vector in the same direction, or `None` for the zero vector.
            pub fn normalized(&self) -> Option<Self> {
                let n = self.norm();
                (n > T::zero()).then(|| *self / n)
            }

            pub fn as_array(&self) -> &[T; $n] {
                &self.0
            }

            pub fn cast<U: Real>(&self) -> $name<U> {
                $name::from_fn(|i| U::of(self.0[i].as_f64()))
            }
        }

        impl<T: Real> Default for $name<T> {
            fn default() -> Self {
                Self::zeros()
            }
        }

        impl<T> Index<usize> for $name<T> {
            type Output = T;
            fn index(&self, i: usize) -> &T {
                &self.0[i]
            }
        }

        impl<T> IndexMut<usize> for $name<T> {
            fn index_mut(&mut self, i: usize) -> &mut T {
                &mut self.0[i]
            }
        }

        impl<T: Real> Add for $name<T> {
            type Output = Self;
            fn add(self, rhs: Self) -> Self {
                Self::from_fn(|i| self.0[i] + rhs.0[i])
            }
        }

        impl<T: Real> AddAssign for $name<T> {
            fn add_assign(&mut self, rhs: Self) {
                *self = *self + rhs;
            }
        }

        impl<T: Real> Sub for $name<T> {
            type Output = Self;
            fn sub(self, rhs: Self) -> Self {
                Self::from_fn(|i| self.0[i] - rhs.0[i])
            }
        }

        impl<T: Real> SubAssign for $name<T> {
            fn sub_assign(&mut self, rhs: Self) {
                *self = *self - rhs;
            }
        }

        impl<T: Real> Neg for $name<T> {
            type Output = Self;
            fn neg(self) -> Self {
                self.map(|a| -a)
            }
        }

        impl<T: Real> Mul<T> for $name<T> {
            type Output = Self;
            fn mul(self, s: T) -> Self {
                self.map(|a| a * s)
            }
        }

        impl<T: Real> Div<T> for $name<T> {
            type Output = Self;
            fn div(self, s: T) -> Self {
                self.map(|a| a / s)
            }
        }
    };
}

/// A vector in ℝ³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3<T>(pub [T; 3]);

/// A vector in ℝ⁴, indexed `0..4` with index 0 along the pole `e0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec4<T>(pub [T; 4]);

impl_vector_ops!(Vec3, 3);
impl_vector_ops!(Vec4, 4);

impl<T: Real> Vec3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self([x, y, z])
    }

    pub fn cross(&self, o: &Self) -> Self {
        let [a1, a2, a3] = self.0;
        let [b1, b2, b3] = o.0;
        Self([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }

    /// Standard basis vector `e_i`.
    pub fn unit(i: usize) -> Self {
        Self::from_fn(|k| if k == i { T::one() } else { T::zero() })
    }
}

impl<T: Real> Vec4<T> {
    pub fn new(a0: T, a1: T, a2: T, a3: T) -> Self {
        Self([a0, a1, a2, a3])
    }

    /// Assembles `(head, 𝐭𝐚𝐢𝐥)`.
    pub fn from_parts(head: T, tail: Vec3<T>) -> Self {
        Self([head, tail[0], tail[1], tail[2]])
    }

    /// Component along `e0`.
    pub fn head(&self) -> T {
        self.0[0]
    }

    /// Spatial part in ℝ³.
    pub fn tail(&self) -> Vec3<T> {
        Vec3([self.0[1], self.0[2], self.0[3]])
    }

    pub fn unit(i: usize) -> Self {
        Self::from_fn(|k| if k == i { T::one() } else { T::zero() })
    }
}

/// Levi-Civita symbol on `{0, 1, 2}`.
pub fn levi_civita<T: Real>(i: usize, j: usize, k: usize) -> T {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => T::one(),
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -T::one(),
        _ => T::zero(),
    }
}

/// Rotation of ℝ³ from z-x-z Euler angles `(node, inclination, argument)`.
pub fn rotate_zxz<T: Real>(v: Vec3<T>, node: T, inclination: T, argument: T) -> Vec3<T> {
    let rz = |v: Vec3<T>, a: T| {
        let (s, c) = a.sin_cos();
        Vec3::new(c * v[0] - s * v[1], s * v[0] + c * v[1], v[2])
    };
    let rx = |v: Vec3<T>, a: T| {
        let (s, c) = a.sin_cos();
        Vec3::new(v[0], c * v[1] - s * v[2], s * v[1] + c * v[2])
    };
    rz(rx(rz(v, argument), inclination), node)
}

/// Numerical tolerances used by checks throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    /// Constraint residuals `⟨q,q⟩−1` and `⟨q,v⟩`.
    pub tol_constraint: T,
    /// Algebraic identities evaluated pointwise.
    pub tol_identity: T,
    /// Conservation checks; multiplied by the integration length where stated.
    pub tol_drift: T,
    /// Identities that go through a finite-difference derivative.
    pub tol_fd: T,
    /// Step used by the finite-difference derivatives.
    pub fd_step: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            tol_constraint: T::of(1e-10),
            tol_identity: T::of(1e-9),
            tol_drift: T::of(1e-6),
            tol_fd: T::of(1e-5),
            fd_step: T::of(1e-6),
        }
    }
}

impl<T: Real> Tolerances<T> {
    /// Scales every acceptance tolerance by `factor`; the step is unchanged.
    pub fn scaled(&self, factor: T) -> Self {
        Self {
            tol_constraint: self.tol_constraint * factor,
            tol_identity: self.tol_identity * factor,
            tol_drift: self.tol_drift * factor,
            tol_fd: self.tol_fd * factor,
            fd_step: self.fd_step,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("tol_constraint", self.tol_constraint),
            ("tol_identity", self.tol_identity),
            ("tol_drift", self.tol_drift),
            ("tol_fd", self.tol_fd),
            ("fd_step", self.fd_step),
        ];
        for (name, value) in fields {
            if !(value > T::zero() && value.is_finite()) {
                return Err(KeplerError::InvalidConfig(format!(
                    "tolerance `{name}` must be strictly positive, got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// A point `(q, v)` of the tangent bundle TS³, stored in ambient coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePhasePoint<T> {
    pub q: Vec4<T>,
    pub v: Vec4<T>,
}

impl<T: Real> SpherePhasePoint<T> {
    /// Wraps `(q, v)` without projecting. Use [`project_to_ts3`] for data that
    /// may have drifted off the constraint manifold.
    pub fn new(q: Vec4<T>, v: Vec4<T>) -> Self {
        Self { q, v }
    }

    pub fn q0(&self) -> T {
        self.q.head()
    }

    pub fn v0(&self) -> T {
        self.v.head()
    }

    /// Spatial position 𝐪.
    pub fn qs(&self) -> Vec3<T> {
        self.q.tail()
    }

    /// Spatial velocity 𝐯.
    pub fn vs(&self) -> Vec3<T> {
        self.v.tail()
    }

    /// The eight ambient coordinates `(q0..q3, v0..v3)`.
    pub fn to_array(&self) -> [T; 8] {
        let mut z = [T::zero(); 8];
        z[..4].copy_from_slice(&self.q.0);
        z[4..].copy_from_slice(&self.v.0);
        z
    }

    pub fn from_array(z: [T; 8]) -> Self {
        Self {
            q: Vec4([z[0], z[1], z[2], z[3]]),
            v: Vec4([z[4], z[5], z[6], z[7]]),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.q.is_finite() && self.v.is_finite()
    }

    /// True when both constraint residuals are within `tol`.
    pub fn is_on_ts3(&self, tol: T) -> bool {
        let (c1, c2) = constraint_residual(self);
        c1.abs() <= tol && c2.abs() <= tol
    }

    pub fn cast<U: Real>(&self) -> SpherePhasePoint<U> {
        SpherePhasePoint::new(self.q.cast(), self.v.cast())
    }
}

/// Orthogonal projection onto TS³: `(q/‖q‖, v − ⟨q̂,v⟩q̂)`.
pub fn project_to_ts3<T: Real>(q: Vec4<T>, v: Vec4<T>) -> Result<SpherePhasePoint<T>> {
    if !q.is_finite() || !v.is_finite() {
        return Err(KeplerError::NonFinite("project_to_ts3 input"));
    }
    let qhat = q.normalized().ok_or(KeplerError::ZeroPosition)?;
    let v = v - qhat * qhat.dot(&v);
    Ok(SpherePhasePoint::new(qhat, v))
}

/// The constraint values `(⟨q,q⟩ − 1, ⟨q,v⟩)`.
pub fn constraint_residual<T: Real>(p: &SpherePhasePoint<T>) -> (T, T) {
    (p.q.norm_squared() - T::one(), p.q.dot(&p.v))
}

/// Named constants of the circular relative equilibrium used as a fixture.
///
/// γ = 1, colatitude π/4, angular rate ω = 2 and period π. Values are built
/// from `√2/2` rather than decimal literals.
pub mod fixture_c1 {
    use super::*;

    pub fn gamma<T: Real>() -> T {
        T::one()
    }

    pub fn colatitude<T: Real>() -> T {
        T::FRAC_PI_4()
    }

    /// ω² = γ / (cos θ sin³ θ) at θ = π/4.
    pub fn omega<T: Real>() -> T {
        T::of(2.0)
    }

    pub fn period<T: Real>() -> T {
        T::PI()
    }

    /// `q* = (√2/2, √2/2, 0, 0)`, `v* = (0, 0, √2, 0)`.
    pub fn point<T: Real>() -> SpherePhasePoint<T> {
        let h = T::FRAC_1_SQRT_2();
        let z = T::zero();
        SpherePhasePoint::new(Vec4::new(h, h, z, z), Vec4::new(z, z, T::SQRT_2(), z))
    }

    /// Closed-form circular solution `(cos θ, sin θ cos ωt, sin θ sin ωt, 0)`
    /// rotated to match [`point`]: the orbit moves from `e1` toward `e2`.
    pub fn exact<T: Real>(t: T) -> SpherePhasePoint<T> {
        let th = colatitude::<T>();
        let w = omega::<T>();
        let (st, ct) = th.sin_cos();
        let (s, c) = (w * t).sin_cos();
        let z = T::zero();
        SpherePhasePoint::new(
            Vec4::new(ct, st * c, st * s, z),
            Vec4::new(z, -st * w * s, st * w * c, z),
        )
    }
}

/// Energy `E = ½|π|² + V(q)` with `π = q0𝐯 − v0𝐪`, evaluated without the
/// collision guard. Shared by the sampler; the public version with error
/// handling lives in `conserved`.
pub(crate) fn reduced_energy_raw<T: Real>(p: &SpherePhasePoint<T>, gamma: T) -> T {
    let pi = p.vs() * p.q0() - p.qs() * p.v0();
    let s = p.qs().norm();
    T::of(0.5) * pi.norm_squared() - gamma * p.q0() / s
}

const MAX_SAMPLE_ATTEMPTS: usize = 10_000;

/// Draws a deterministic random point on TS³ with reduced energy `E` inside
/// `energy_window` (open interval) and nonzero angular momentum.
///
/// For negative windows every admissible point lies in the upper hemisphere.
/// Points are kept away from the pole (`|𝐪| ≥ 0.05`) so that the collision
/// guard never trips at the sampled state itself.
pub fn sample_phase_point<T: Real>(
    seed: u64,
    energy_window: (T, T),
    gamma: T,
) -> Result<SpherePhasePoint<T>> {
    sample_with(seed, energy_window, gamma, |_| true)
}

/// Like [`sample_phase_point`] with an extra acceptance predicate on the point.
pub fn sample_with<T: Real>(
    seed: u64,
    energy_window: (T, T),
    gamma: T,
    accept: impl Fn(&SpherePhasePoint<f64>) -> bool,
) -> Result<SpherePhasePoint<T>> {
    let (e_min, e_max) = (energy_window.0.as_f64(), energy_window.1.as_f64());
    let gamma = gamma.as_f64();
    if !(e_min < e_max) || !e_min.is_finite() || !e_max.is_finite() {
        return Err(KeplerError::InvalidConfig(format!(
            "energy window ({e_min}, {e_max}) is empty"
        )));
    }
    if !(gamma > 0.0) {
        return Err(KeplerError::InvalidConfig(format!("gamma must be positive, got {gamma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaussian4 = |rng: &mut ChaCha8Rng| {
        Vec4::<f64>::from_fn(|_| rng.sample::<f64, _>(StandardNormal))
    };
    for _ in 0..MAX_SAMPLE_ATTEMPTS {
        let energy = rng.random_range(e_min..e_max);
        let mut q = gaussian4(&mut rng);
        if energy < 0.0 {
            q[0] = q[0].abs();
        }
        let Some(q) = q.normalized() else { continue };
        let spatial = q.tail().norm();
        if spatial < 0.05 || q[0].abs() < 1e-3 {
            continue;
        }
        let potential = -gamma * q[0] / spatial;
        if potential >= energy {
            continue;
        }
        let d = gaussian4(&mut rng);
        let d = d - q * q.dot(&d);
        let Some(d) = d.normalized() else { continue };
        let pi_dir = d.tail() * q[0] - q.tail() * d[0];
        if pi_dir.norm() < 1e-6 {
            continue;
        }
        let speed = (2.0 * (energy - potential) / pi_dir.norm_squared()).sqrt();
        let p = SpherePhasePoint::new(q, d * speed);
        if p.qs().cross(&p.vs()).norm() < 1e-6 {
            continue;
        }
        let e = reduced_energy_raw(&p, gamma);
        if !(e > e_min && e < e_max) || !accept(&p) {
            continue;
        }
        return Ok(p.cast());
    }
    Err(KeplerError::SamplingFailed {
        attempts: MAX_SAMPLE_ATTEMPTS,
        reason: "energy window infeasible",
    })
}
