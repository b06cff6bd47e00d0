//! First integrals of the spherical Kepler problem, the orbit equation and
//! orbit classification.
//!
//! With `μ = 𝐪×𝐯` and `π = q0𝐯 − v0𝐪` the Runge–Lenz vector is
//! `A = π×μ − γ𝐪/|𝐪|` and the binormal is
//! `B = π − γ/(|𝐪||μ|²) μ×𝐪`. The reduced energy `E = H − |μ|²/2` plays the
//! role of the Kepler energy and fixes `ν = γ/√(−2E)` on bound orbits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::{hamiltonian, KeplerParams};
use crate::error::{KeplerError, Result};
use crate::geometry::{rotate_zxz, SpherePhasePoint, Vec3, Vec4};
use crate::scalar::Real;

/// Nodes of the periodic trapezoid rule used by [`orbital_period`].
const PERIOD_NODES: usize = 4096;

/// Angular momentum `μ = 𝐪 × 𝐯`.
pub fn angular_momentum<T: Real>(p: &SpherePhasePoint<T>) -> Vec3<T> {
    p.qs().cross(&p.vs())
}

/// `π = q0𝐯 − v0𝐪`, the velocity that traces the hodograph.
pub fn pi_vector<T: Real>(p: &SpherePhasePoint<T>) -> Vec3<T> {
    p.vs() * p.q0() - p.qs() * p.v0()
}

/// Reduced energy `E = H − |μ|²/2`.
pub fn reduced_energy<T: Real>(p: &SpherePhasePoint<T>, params: &KeplerParams<T>) -> Result<T> {
    let mu = angular_momentum(p);
    Ok(hamiltonian(p, params)? - T::of(0.5) * mu.norm_squared())
}

/// The full record of first integrals at a phase point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedSet<T> {
    pub h: T,
    /// Reduced energy `E`.
    pub energy: T,
    pub mu: Vec3<T>,
    pub pi: Vec3<T>,
    /// Runge–Lenz vector.
    pub a: Vec3<T>,
    /// Binormal; the hodocycle centre.
    pub b: Vec3<T>,
    /// Eccentricity vector `A/γ`.
    pub ecc: Vec3<T>,
    pub eps: T,
    /// `γ/√(−2E)`, present only for `E < 0`.
    pub nu: Option<T>,
    /// `−ν e`, present only for `E < 0`.
    pub e_tilde: Option<Vec3<T>>,
}

impl<T: Real> ConservedSet<T> {
    pub fn nu(&self) -> Result<T> {
        self.nu.ok_or(KeplerError::PositiveEnergy { energy: self.energy.as_f64() })
    }

    pub fn e_tilde(&self) -> Result<Vec3<T>> {
        self.e_tilde.ok_or(KeplerError::PositiveEnergy { energy: self.energy.as_f64() })
    }

    /// Residuals of the algebraic relations between the integrals, each
    /// scaled to be dimensionless.
    pub fn invariant_residuals(&self, gamma: T) -> InvariantResiduals<T> {
        let mu_n = self.mu.norm();
        let mu_dot_a = self.mu.dot(&self.a).abs() / (mu_n * gamma);
        let mu_dot_b = self.mu.dot(&self.b).abs() / gamma;
        let a_is_b_cross_mu = (self.a - self.b.cross(&self.mu)).norm() / gamma;
        let eccentricity_energy = (self.eps * self.eps
            - (T::one() + T::of(2.0) * self.energy * self.mu.norm_squared() / (gamma * gamma)))
            .abs();
        let sphere_product = match (self.nu, self.e_tilde) {
            (Some(nu), Some(et)) => {
                let orth = self.mu.dot(&et).abs() / (nu * nu);
                let norm = (self.mu.norm_squared() + et.norm_squared() - nu * nu).abs() / (nu * nu);
                Some(orth.max(norm))
            }
            _ => None,
        };
        InvariantResiduals { mu_dot_a, mu_dot_b, a_is_b_cross_mu, eccentricity_energy, sphere_product }
    }
}

/// Relations that hold between the fields of a [`ConservedSet`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantResiduals<T> {
    /// `μ·A`.
    pub mu_dot_a: T,
    /// `μ·B`.
    pub mu_dot_b: T,
    /// `A − B×μ`.
    pub a_is_b_cross_mu: T,
    /// `ε² − (1 + 2E|μ|²/γ²)`.
    pub eccentricity_energy: T,
    /// `μ·ẽ` and `|μ|² + |ẽ|² − ν²`, for `E < 0`.
    pub sphere_product: Option<T>,
}

impl<T: Real> InvariantResiduals<T> {
    pub fn max(&self) -> T {
        [self.mu_dot_a, self.mu_dot_b, self.a_is_b_cross_mu, self.eccentricity_energy]
            .into_iter()
            .chain(self.sphere_product)
            .fold(T::zero(), T::max)
    }
}

/// True when `μ` vanishes to rounding relative to `|𝐪||𝐯|`.
fn is_rectilinear<T: Real>(p: &SpherePhasePoint<T>, mu: &Vec3<T>) -> bool {
    let scale = p.qs().norm() * p.vs().norm();
    !(mu.norm() > T::of(64.0) * T::epsilon() * scale)
}

pub fn conserved_set<T: Real>(
    p: &SpherePhasePoint<T>,
    params: &KeplerParams<T>,
) -> Result<ConservedSet<T>> {
    let gamma = params.gamma;
    let q = p.qs();
    let r = q.norm();
    if !(r > T::zero()) {
        return Err(KeplerError::ZeroPosition);
    }
    let mu = angular_momentum(p);
    if is_rectilinear(p, &mu) {
        return Err(KeplerError::DegenerateOrbit);
    }
    let h = hamiltonian(p, params)?;
    let mu2 = mu.norm_squared();
    let energy = h - T::of(0.5) * mu2;
    let pi = pi_vector(p);
    let a = pi.cross(&mu) - q * (gamma / r);
    let b = pi - mu.cross(&q) * (gamma / (r * mu2));
    let ecc = a / gamma;
    let eps = ecc.norm();
    let nu = (energy < T::zero()).then(|| gamma / (T::of(-2.0) * energy).sqrt());
    let e_tilde = nu.map(|nu| ecc * -nu);
    Ok(ConservedSet { h, energy, mu, pi, a, b, ecc, eps, nu, e_tilde })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitClass {
    Circle,
    Ellipse,
    Parabola,
    Hyperbola,
}

impl std::fmt::Display for OrbitClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Self::Circle => "circle",
            Self::Ellipse => "ellipse",
            Self::Parabola => "parabola",
            Self::Hyperbola => "hyperbola",
        };
        f.write_str(name)
    }
}

/// Classifies by eccentricity with ties at 0 and 1 resolved within `tol`.
pub fn classify_eccentricity<T: Real>(eps: T, tol: T) -> OrbitClass {
    if eps.abs() <= tol {
        OrbitClass::Circle
    } else if (eps - T::one()).abs() <= tol {
        OrbitClass::Parabola
    } else if eps < T::one() {
        OrbitClass::Ellipse
    } else {
        OrbitClass::Hyperbola
    }
}

pub fn classify_orbit<T: Real>(cs: &ConservedSet<T>, tol: T) -> OrbitClass {
    classify_eccentricity(cs.eps, tol)
}

/// Shape data of an orbit in its plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitGeometry<T> {
    /// `γ/|μ|²`, the cotangent of the colatitude on the circular orbit.
    pub cone_coefficient: T,
    pub eps: T,
    /// `(Â, B̂, μ̂)`; absent on circular orbits where `A = B = 0`.
    pub frame: Option<[Vec3<T>; 3]>,
    pub class: OrbitClass,
}

pub fn orbit_geometry<T: Real>(
    cs: &ConservedSet<T>,
    params: &KeplerParams<T>,
    tol: T,
) -> OrbitGeometry<T> {
    let class = classify_orbit(cs, tol);
    let frame = match class {
        OrbitClass::Circle => None,
        _ => orbit_frame(cs),
    };
    OrbitGeometry {
        cone_coefficient: params.gamma / cs.mu.norm_squared(),
        eps: cs.eps,
        frame,
        class,
    }
}

fn orbit_frame<T: Real>(cs: &ConservedSet<T>) -> Option<[Vec3<T>; 3]> {
    let a_hat = cs.a.normalized()?;
    let mu_hat = cs.mu.normalized()?;
    Some([a_hat, mu_hat.cross(&a_hat), mu_hat])
}

/// In-plane angle of `𝐪` measured from `Â` toward `μ̂ × Â`, or `None` when
/// `A = 0`.
pub fn orbit_angle<T: Real>(p: &SpherePhasePoint<T>, cs: &ConservedSet<T>) -> Option<T> {
    let [a_hat, b_hat, _] = orbit_frame(cs)?;
    let q = p.qs();
    Some(q.dot(&b_hat).atan2(q.dot(&a_hat)))
}

/// `cot θ − (γ/|μ|²)(1 + ε cos φ)` with `cot θ = q0/|𝐪|`.
pub fn orbit_equation_residual<T: Real>(
    p: &SpherePhasePoint<T>,
    params: &KeplerParams<T>,
) -> Result<T> {
    let cs = conserved_set(p, params)?;
    let cot = p.q0() / p.qs().norm();
    let cone = params.gamma / cs.mu.norm_squared();
    let shape = match orbit_angle(p, &cs) {
        Some(phi) if cs.eps > T::zero() => cs.eps * phi.cos(),
        _ => T::zero(),
    };
    Ok(cot - cone * (T::one() + shape))
}

/// Orbit specified by its shape and orientation.
///
/// `colatitude` is the polar angle of the apocentre. Pericentre and
/// apocentre colatitudes satisfy `cot θp / cot θa = (1+ε)/(1−ε)`. The three
/// angles act on the spatial part by z-x-z rotation of the reference orbit
/// whose pericentre lies on `e1` and whose angular momentum points along
/// `e3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitElements<T> {
    pub colatitude: T,
    pub eccentricity: T,
    pub inclination: T,
    pub node: T,
    pub argument: T,
}

impl<T: Real> OrbitElements<T> {
    pub fn planar(colatitude: T, eccentricity: T) -> Self {
        Self {
            colatitude,
            eccentricity,
            inclination: T::zero(),
            node: T::zero(),
            argument: T::zero(),
        }
    }
}

/// Apocentre state of the bound orbit with the given elements.
///
/// Starting at the apocentre keeps the initial state as far from the pole as
/// the orbit allows, so near-collision orbits begin outside the guard.
pub fn orbit_from_elements<T: Real>(
    el: &OrbitElements<T>,
    params: &KeplerParams<T>,
) -> Result<SpherePhasePoint<T>> {
    let eps = el.eccentricity;
    if !(eps >= T::zero() && eps < T::one()) {
        return Err(KeplerError::InvalidConfig(format!(
            "eccentricity must lie in [0, 1), got {eps}"
        )));
    }
    if !(el.colatitude > T::zero() && el.colatitude < T::FRAC_PI_2()) {
        return Err(KeplerError::InvalidConfig(format!(
            "apocentre colatitude must lie in (0, pi/2), got {}",
            el.colatitude
        )));
    }
    let (sin_a, cos_a) = el.colatitude.sin_cos();
    // Orbit equation at φ = π: cot θa = (γ/|μ|²)(1 − ε).
    let mu = (params.gamma * (T::one() - eps) * sin_a / cos_a).sqrt();
    let speed = mu / sin_a;
    let rot = |v: Vec3<T>| rotate_zxz(v, el.node, el.inclination, el.argument);
    let q = Vec4::from_parts(cos_a, rot(Vec3::unit(0) * -sin_a));
    let v = Vec4::from_parts(T::zero(), rot(Vec3::unit(1) * -speed));
    Ok(SpherePhasePoint::new(q, v))
}

/// Period of a bound orbit in physical time.
///
/// The orbit is the image of a Euclidean Kepler ellipse with the same energy
/// and eccentricity, semi-major axis `a = γ/(−2E)`, and `dt = dτ/(1 + r²)`
/// along it. The integral over one revolution is evaluated in eccentric
/// anomaly with the periodic trapezoid rule.
pub fn orbital_period<T: Real>(cs: &ConservedSet<T>, params: &KeplerParams<T>) -> Result<T> {
    if !(cs.energy < T::zero()) {
        return Err(KeplerError::PositiveEnergy { energy: cs.energy.as_f64() });
    }
    let a = params.gamma / (T::of(-2.0) * cs.energy);
    let eps = cs.eps;
    let n = PERIOD_NODES;
    let h = T::TAU() / T::of(n as f64);
    let sum = (0..n).fold(T::zero(), |acc, k| {
        let r = a * (T::one() - eps * (h * T::of(k as f64)).cos());
        acc + r / (a * (T::one() + r * r))
    });
    Ok((a * a * a / params.gamma).sqrt() * sum * h)
}

/// Draws a bound orbit with eccentricity in `eps_range` and apocentre
/// colatitude in `colatitude_range`, in a uniformly random orientation.
pub fn sample_elliptic_orbit<T: Real>(
    seed: u64,
    eps_range: (T, T),
    colatitude_range: (T, T),
    params: &KeplerParams<T>,
) -> Result<(SpherePhasePoint<T>, OrbitElements<T>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |lo: T, hi: T| lo + (hi - lo) * T::of(rng.random::<f64>());
    let el = OrbitElements {
        eccentricity: draw(eps_range.0, eps_range.1),
        colatitude: draw(colatitude_range.0, colatitude_range.1),
        inclination: draw(-T::one(), T::one()).acos(),
        node: draw(T::zero(), T::TAU()),
        argument: draw(T::zero(), T::TAU()),
    };
    Ok((orbit_from_elements(&el, params)?, el))
}
