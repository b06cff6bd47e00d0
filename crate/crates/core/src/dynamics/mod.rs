//! The constrained Hamiltonian system on TS³: potential, Hamiltonian, the
//! explicit constrained vector field and the Dirac structure matrix.
//!
//! The potential `V(q) = −γ q0 / √(1 − q0²)` attracts toward the pole
//! `q0 = +1` for `γ > 0` and is singular at both poles. Every evaluation that
//! can see the singularity takes a collision guard on `1 − q0²`.

pub mod brackets;
pub mod integrate;

pub use brackets::{bracket, structure_matrix, StructureMatrix};
pub use integrate::{
    integrate, CollisionRecord, IntegratorConfig, Method, Trajectory, TrajectorySample,
};

use crate::error::{KeplerError, Result};
use crate::geometry::{SpherePhasePoint, Vec4};
use crate::scalar::Real;

/// Default lower bound on `1 − q0²` below which evaluation is refused.
pub const DEFAULT_COLLISION_GUARD: f64 = 1e-8;

/// Model parameters. Only the coupling strength `γ` enters the dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerParams<T> {
    pub gamma: T,
}

impl<T: Real> KeplerParams<T> {
    pub fn new(gamma: T) -> Result<Self> {
        if gamma > T::zero() && gamma.is_finite() {
            Ok(Self { gamma })
        } else {
            Err(KeplerError::InvalidConfig(format!("gamma must be positive and finite, got {gamma}")))
        }
    }
}

impl<T: Real> Default for KeplerParams<T> {
    fn default() -> Self {
        Self { gamma: T::one() }
    }
}

/// `|𝐪|²`, which equals `1 − q0²` on the sphere without the cancellation
/// near the pole, after checking it against `guard`.
pub(crate) fn guarded_margin<T: Real>(q: &Vec4<T>, guard: T) -> Result<T> {
    let margin = q.tail().norm_squared();
    if margin > guard {
        Ok(margin)
    } else {
        Err(KeplerError::CollisionProximity { margin: margin.as_f64(), guard: guard.as_f64() })
    }
}

/// `V(q) = −γ q0 (1 − q0²)^{−1/2}` with the default collision guard.
pub fn potential<T: Real>(q: &Vec4<T>, params: &KeplerParams<T>) -> Result<T> {
    potential_guarded(q, params, T::of(DEFAULT_COLLISION_GUARD))
}

pub fn potential_guarded<T: Real>(q: &Vec4<T>, params: &KeplerParams<T>, guard: T) -> Result<T> {
    let margin = guarded_margin(q, guard)?;
    Ok(-params.gamma * q.head() / margin.sqrt())
}

/// `H = ½⟨v,v⟩ + V(q)`.
pub fn hamiltonian<T: Real>(p: &SpherePhasePoint<T>, params: &KeplerParams<T>) -> Result<T> {
    Ok(T::of(0.5) * p.v.norm_squared() + potential(&p.q, params)?)
}

/// The constrained field `(q̇, v̇)` with
/// `v̇ = γe0/(1−q0²)^{3/2} − (⟨v,v⟩ + γq0/(1−q0²)^{3/2}) q`.
pub fn vector_field<T: Real>(
    p: &SpherePhasePoint<T>,
    params: &KeplerParams<T>,
) -> Result<(Vec4<T>, Vec4<T>)> {
    vector_field_guarded(p, params, T::of(DEFAULT_COLLISION_GUARD))
}

pub fn vector_field_guarded<T: Real>(
    p: &SpherePhasePoint<T>,
    params: &KeplerParams<T>,
    guard: T,
) -> Result<(Vec4<T>, Vec4<T>)> {
    let margin = guarded_margin(&p.q, guard)?;
    Ok(field_unchecked(p, params.gamma, margin))
}

/// Field evaluation with a precomputed positive margin `m = |𝐪|²`.
///
/// The head component `f − q0(⟨v,v⟩ + f q0)` is evaluated as
/// `f m − q0⟨v,v⟩`, which avoids cancelling two terms of size `f` near
/// the pole.
pub(crate) fn field_unchecked<T: Real>(
    p: &SpherePhasePoint<T>,
    gamma: T,
    margin: T,
) -> (Vec4<T>, Vec4<T>) {
    let f = gamma / (margin * margin.sqrt());
    let vv = p.v.norm_squared();
    let mut vdot = p.q * (-vv) - Vec4::from_parts(T::zero(), p.qs()) * (f * p.q0());
    vdot.0[0] += gamma / margin.sqrt();
    (p.v, vdot)
}

/// Ambient gradient `(∂H/∂q, ∂H/∂v)` with `V` extended as a function of `q0`
/// alone.
pub fn hamiltonian_gradient<T: Real>(
    p: &SpherePhasePoint<T>,
    params: &KeplerParams<T>,
) -> Result<[T; 8]> {
    let margin = guarded_margin(&p.q, T::of(DEFAULT_COLLISION_GUARD))?;
    let mut g = [T::zero(); 8];
    g[0] = -params.gamma / (margin * margin.sqrt());
    g[4..].copy_from_slice(&p.v.0);
    Ok(g)
}
