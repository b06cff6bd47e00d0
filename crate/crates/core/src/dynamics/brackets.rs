//! Dirac-Poisson structure on TS³ and analytic gradients of the observables
//! whose brackets are checked.
//!
//! Phase-space coordinates are ordered `(q0, q1, q2, q3, v0, v1, v2, v3)`.
//! A bracket of two observables is `∇Fᵀ Π ∇G` with `Π` the structure matrix.

use crate::dynamics::{hamiltonian, hamiltonian_gradient, KeplerParams};
use crate::error::Result;
use crate::geometry::{levi_civita, SpherePhasePoint, Vec3};
use crate::scalar::Real;

/// Ambient gradient of a phase-space function.
pub type Gradient<T> = [T; 8];

/// The 8×8 matrix of pairwise Dirac brackets of the coordinate functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureMatrix<T>(pub [[T; 8]; 8]);

impl<T: Real> StructureMatrix<T> {
    pub fn entry(&self, a: usize, b: usize) -> T {
        self.0[a][b]
    }

    /// `Π ∇G`, the Hamiltonian vector field of `G` in ambient coordinates.
    pub fn apply(&self, grad: &Gradient<T>) -> Gradient<T> {
        let mut out = [T::zero(); 8];
        for (a, row) in self.0.iter().enumerate() {
            out[a] = row.iter().zip(grad).fold(T::zero(), |acc, (&m, &g)| acc + m * g);
        }
        out
    }

    pub fn bracket(&self, grad_f: &Gradient<T>, grad_g: &Gradient<T>) -> T {
        let pg = self.apply(grad_g);
        grad_f.iter().zip(&pg).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    /// Largest entry of `Π + Πᵀ`.
    pub fn antisymmetry_defect(&self) -> T {
        let mut worst = T::zero();
        for a in 0..8 {
            for b in 0..8 {
                worst = worst.max((self.0[a][b] + self.0[b][a]).abs());
            }
        }
        worst
    }

    /// Largest entrywise difference to `other`.
    pub fn max_diff(&self, other: &Self) -> T {
        let mut worst = T::zero();
        for a in 0..8 {
            for b in 0..8 {
                worst = worst.max((self.0[a][b] - other.0[a][b]).abs());
            }
        }
        worst
    }
}

/// The closed-form structure matrix:
/// `{qα,vβ}* = δαβ − qαqβ`, `{vα,vβ}* = qβvα − qαvβ`, `{qα,qβ}* = 0`.
pub fn structure_matrix<T: Real>(p: &SpherePhasePoint<T>) -> StructureMatrix<T> {
    let (q, v) = (p.q, p.v);
    let mut m = [[T::zero(); 8]; 8];
    for a in 0..4 {
        for b in 0..4 {
            let delta = if a == b { T::one() } else { T::zero() };
            let qv = delta - q[a] * q[b];
            m[a][4 + b] = qv;
            m[4 + b][a] = -qv;
            m[4 + a][4 + b] = q[b] * v[a] - q[a] * v[b];
        }
    }
    StructureMatrix(m)
}

/// `{F, G}* = ∇Fᵀ Π(p) ∇G`.
pub fn bracket<T: Real>(grad_f: &Gradient<T>, grad_g: &Gradient<T>, p: &SpherePhasePoint<T>) -> T {
    structure_matrix(p).bracket(grad_f, grad_g)
}

/// Builds the structure matrix from the canonical bracket on Tℝ⁴ and the
/// constraints `c1 = ⟨q,q⟩ − 1`, `c2 = ⟨q,v⟩` through
/// `{F,G}* = {F,G} − Σ {F,cᵢ} Cᵢⱼ {cⱼ,G}`, with `C` the inverse of the
/// constraint bracket matrix.
pub fn structure_matrix_from_constraints<T: Real>(p: &SpherePhasePoint<T>) -> StructureMatrix<T> {
    let (q, v) = (p.q, p.v);
    let two = T::of(2.0);
    let mut grad_c1 = [T::zero(); 8];
    let mut grad_c2 = [T::zero(); 8];
    for a in 0..4 {
        grad_c1[a] = two * q[a];
        grad_c2[a] = v[a];
        grad_c2[4 + a] = q[a];
    }
    let canonical = |f: &Gradient<T>, g: &Gradient<T>| {
        (0..4).fold(T::zero(), |acc, a| acc + f[a] * g[4 + a] - f[4 + a] * g[a])
    };
    let c12 = canonical(&grad_c1, &grad_c2);
    // C = [[0, −1/c12], [1/c12, 0]]
    let inv = T::one() / c12;
    let mut m = [[T::zero(); 8]; 8];
    for a in 0..8 {
        for b in 0..8 {
            let (ea, eb) = (coordinate::<T>(a), coordinate::<T>(b));
            let fc1 = canonical(&ea, &grad_c1);
            let fc2 = canonical(&ea, &grad_c2);
            let c1g = canonical(&grad_c1, &eb);
            let c2g = canonical(&grad_c2, &eb);
            let correction = -fc1 * inv * c2g + fc2 * inv * c1g;
            m[a][b] = canonical(&ea, &eb) - correction;
        }
    }
    StructureMatrix(m)
}

/// Gradient of the `k`-th coordinate function.
pub fn coordinate<T: Real>(k: usize) -> Gradient<T> {
    let mut g = [T::zero(); 8];
    g[k] = T::one();
    g
}

fn axpy<T: Real>(acc: &mut Gradient<T>, a: T, x: &Gradient<T>) {
    for (o, &xi) in acc.iter_mut().zip(x) {
        *o += a * xi;
    }
}

/// Ambient index of the spatial component `i ∈ {0,1,2}` of `q`.
const fn qi(i: usize) -> usize {
    i + 1
}

/// Ambient index of the spatial component `i ∈ {0,1,2}` of `v`.
const fn vi(i: usize) -> usize {
    i + 5
}

/// Gradient of `μᵢ = (𝐪 × 𝐯)ᵢ`.
pub fn grad_mu<T: Real>(p: &SpherePhasePoint<T>, i: usize) -> Gradient<T> {
    let (q, v) = (p.qs(), p.vs());
    let mut g = [T::zero(); 8];
    for j in 0..3 {
        for k in 0..3 {
            let e: T = levi_civita(i, j, k);
            if e != T::zero() {
                g[qi(j)] = g[qi(j)] + e * v[k];
                g[vi(k)] = g[vi(k)] + e * q[j];
            }
        }
    }
    g
}

/// Gradient of `πᵢ = q0 vᵢ − v0 qᵢ`.
pub fn grad_pi<T: Real>(p: &SpherePhasePoint<T>, i: usize) -> Gradient<T> {
    let mut g = [T::zero(); 8];
    g[0] = p.vs()[i];
    g[qi(i)] = -p.v0();
    g[4] = -p.qs()[i];
    g[vi(i)] = p.q0();
    g
}

/// Gradient of `1/|𝐪|`.
pub fn grad_inv_spatial_norm<T: Real>(p: &SpherePhasePoint<T>) -> Gradient<T> {
    let q = p.qs();
    let r3 = q.norm_squared() * q.norm();
    let mut g = [T::zero(); 8];
    for i in 0..3 {
        g[qi(i)] = -q[i] / r3;
    }
    g
}

/// Gradient of `|𝐪|²`.
pub fn grad_spatial_norm_sq<T: Real>(p: &SpherePhasePoint<T>) -> Gradient<T> {
    let q = p.qs();
    let mut g = [T::zero(); 8];
    for i in 0..3 {
        g[qi(i)] = T::of(2.0) * q[i];
    }
    g
}

pub fn grad_hamiltonian<T: Real>(
    p: &SpherePhasePoint<T>,
    params: &KeplerParams<T>,
) -> Result<Gradient<T>> {
    hamiltonian_gradient(p, params)
}

/// Gradient of the Runge–Lenz component `Aᵢ = (π × μ)ᵢ − γ qᵢ/|𝐪|`.
pub fn grad_runge_lenz<T: Real>(
    p: &SpherePhasePoint<T>,
    params: &KeplerParams<T>,
    i: usize,
) -> Gradient<T> {
    let pi = p.vs() * p.q0() - p.qs() * p.v0();
    let mu = p.qs().cross(&p.vs());
    let mut g = [T::zero(); 8];
    for j in 0..3 {
        for k in 0..3 {
            let e: T = levi_civita(i, j, k);
            if e != T::zero() {
                axpy(&mut g, e * mu[k], &grad_pi(p, j));
                axpy(&mut g, e * pi[j], &grad_mu(p, k));
            }
        }
    }
    let q = p.qs();
    let r = q.norm();
    let r3 = r * r * r;
    for m in 0..3 {
        let delta = if m == i { T::one() } else { T::zero() };
        g[qi(m)] = g[qi(m)] - params.gamma * (delta / r - q[i] * q[m] / r3);
    }
    g
}

/// `η = (|μ|² − H + √(γ² + H²))^{−1/2}`, the scale that turns `A` into the
/// second so(4) component.
pub fn eta_scale<T: Real>(p: &SpherePhasePoint<T>, params: &KeplerParams<T>) -> Result<T> {
    let h = hamiltonian(p, params)?;
    let mu2 = p.qs().cross(&p.vs()).norm_squared();
    let root = (params.gamma * params.gamma + h * h).sqrt();
    Ok((mu2 - h + root).powf(T::of(-0.5)))
}

/// Gradient of `η Aᵢ`, the right so(4) component of the momentum map ρ.
pub fn grad_scaled_runge_lenz<T: Real>(
    p: &SpherePhasePoint<T>,
    params: &KeplerParams<T>,
    i: usize,
) -> Result<Gradient<T>> {
    let h = hamiltonian(p, params)?;
    let mu = p.qs().cross(&p.vs());
    let root = (params.gamma * params.gamma + h * h).sqrt();
    let eta = eta_scale(p, params)?;
    let a = runge_lenz_component(p, params, i);

    // ∂η = −½η³ (2μ·∂μ − ∂H + (H/√(γ²+H²)) ∂H)
    let gh = grad_hamiltonian(p, params)?;
    let mut d_inner = [T::zero(); 8];
    for k in 0..3 {
        axpy(&mut d_inner, T::of(2.0) * mu[k], &grad_mu(p, k));
    }
    axpy(&mut d_inner, h / root - T::one(), &gh);
    let scale = T::of(-0.5) * eta * eta * eta;

    let mut g = [T::zero(); 8];
    axpy(&mut g, eta, &grad_runge_lenz(p, params, i));
    axpy(&mut g, a * scale, &d_inner);
    Ok(g)
}

fn runge_lenz_component<T: Real>(p: &SpherePhasePoint<T>, params: &KeplerParams<T>, i: usize) -> T {
    let pi = p.vs() * p.q0() - p.qs() * p.v0();
    let mu = p.qs().cross(&p.vs());
    let q = p.qs();
    let a: Vec3<T> = pi.cross(&mu) - q * (params.gamma / q.norm());
    a[i]
}
