//! Gnomonic projection of the upper hemisphere onto the tangent space at the
//! pole, lifted to phase space as `Ψ(q, v) = (𝐪/q0, π)`.
//!
//! `Ψ` carries spherical Kepler orbits to Euclidean ones on the clock
//! `τ = ∫ dt/q0²` and intertwines the energies and momenta, but it is not
//! symplectic. The defect is measured here in the `𝐪`-chart of the upper
//! hemisphere, where `Ψ` factors as the tangent lift of the projection after
//! the fibre scaling `κ(𝐪, 𝐯) = (𝐪, (1 − |𝐪|²)𝐯)`.

use crate::conserved::{angular_momentum, pi_vector, reduced_energy};
use crate::dynamics::{vector_field, KeplerParams, Trajectory};
use crate::error::{KeplerError, Result};
use crate::fd;
use crate::geometry::{SpherePhasePoint, Vec3, Vec4};
use crate::ligon_schaaf::{
    delaunay_hamiltonian, frame_from_qv, frame_to_delaunay, ls_map, momentum_j, nu_of, DelaunayPoint,
    LsFrame, So4Element,
};
use crate::scalar::Real;

/// Points with `q0` at or below this level are rejected by [`psi`].
pub const CHART_GUARD: f64 = 1e-8;

/// A point `(Q, V)` of `(ℝ³ − {0}) × ℝ³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EuclidPhasePoint<T> {
    pub q: Vec3<T>,
    pub v: Vec3<T>,
}

impl<T: Real> EuclidPhasePoint<T> {
    pub fn new(q: Vec3<T>, v: Vec3<T>) -> Self {
        Self { q, v }
    }

    pub fn to_array(&self) -> [T; 6] {
        [self.q[0], self.q[1], self.q[2], self.v[0], self.v[1], self.v[2]]
    }

    pub fn from_array(z: [T; 6]) -> Self {
        Self::new(Vec3([z[0], z[1], z[2]]), Vec3([z[3], z[4], z[5]]))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        (self.q - other.q).max_abs().max((self.v - other.v).max_abs())
    }
}

fn punctured<T: Real>(q: &Vec3<T>) -> Result<T> {
    let r = q.norm();
    if r > T::zero() {
        Ok(r)
    } else {
        Err(KeplerError::PunctureHit)
    }
}

/// `Ψ(q, v) = (𝐪/q0, q0𝐯 − v0𝐪)`.
pub fn psi<T: Real>(p: &SpherePhasePoint<T>) -> Result<EuclidPhasePoint<T>> {
    let q0 = p.q0();
    if !(q0 > T::of(CHART_GUARD)) {
        return Err(KeplerError::EquatorSingularity { q0: q0.as_f64() });
    }
    let big_q = p.qs() / q0;
    punctured(&big_q)?;
    Ok(EuclidPhasePoint::new(big_q, pi_vector(p)))
}

/// Inverse of [`psi`]: `q0 = 1/√(1+|Q|²)`, `𝐪 = q0 Q`, `v0 = −𝐪·V`,
/// `𝐯 = (V − (𝐪·V)𝐪)/q0`.
pub fn psi_inverse<T: Real>(e: &EuclidPhasePoint<T>) -> Result<SpherePhasePoint<T>> {
    punctured(&e.q)?;
    let q0 = T::one() / (T::one() + e.q.norm_squared()).sqrt();
    let q = e.q * q0;
    let qv = q.dot(&e.v);
    let v = (e.v - q * qv) / q0;
    Ok(SpherePhasePoint::new(Vec4::from_parts(q0, q), Vec4::from_parts(-qv, v)))
}

/// `Q̇ = V`, `V̇ = −γQ/|Q|³`.
pub fn euclid_field<T: Real>(e: &EuclidPhasePoint<T>, params: &KeplerParams<T>) -> Result<(Vec3<T>, Vec3<T>)> {
    let r = punctured(&e.q)?;
    Ok((e.v, e.q * (-params.gamma / (r * r * r))))
}

/// `H_K = ½|V|² − γ/|Q|`.
pub fn kepler_hamiltonian<T: Real>(e: &EuclidPhasePoint<T>, params: &KeplerParams<T>) -> Result<T> {
    let r = punctured(&e.q)?;
    Ok(T::of(0.5) * e.v.norm_squared() - params.gamma / r)
}

/// `J_K = (Q×V, −ν_c((1/γ)V×(Q×V) − Q/|Q|))` with `ν_c = γ/√(−2H_K)`.
pub fn kepler_momentum<T: Real>(e: &EuclidPhasePoint<T>, params: &KeplerParams<T>) -> Result<So4Element<T>> {
    let h = kepler_hamiltonian(e, params)?;
    let nu = nu_of(h, params.gamma)?;
    let l = e.q.cross(&e.v);
    let runge = e.v.cross(&l) / params.gamma - e.q / e.q.norm();
    Ok(So4Element::new(l, runge * (-nu)))
}

/// Energy and (for `H_K < 0`) momentum of a Euclidean point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EuclidConserved<T> {
    pub h_k: T,
    pub j_k: Option<So4Element<T>>,
}

pub fn euclid_conserved<T: Real>(e: &EuclidPhasePoint<T>, params: &KeplerParams<T>) -> Result<EuclidConserved<T>> {
    Ok(EuclidConserved { h_k: kepler_hamiltonian(e, params)?, j_k: kepler_momentum(e, params).ok() })
}

/// `DΨ·X_H − (1/q0²) X_{H_K}` with `DΨ` by a central difference of step `h`
/// along the field direction. Returns the residual relative to
/// `max(1, |X_{H_K}|/q0²)` and the factor `1/q0²`.
pub fn pushforward_check<T: Real>(p: &SpherePhasePoint<T>, params: &KeplerParams<T>, h: T) -> Result<(T, T)> {
    let (qd, vd) = vector_field(p, params)?;
    let field = SpherePhasePoint::new(qd, vd).to_array();
    let scale = field.iter().fold(T::zero(), |acc, &a| acc.max(a.abs()));
    let map = |z: &[T; 8]| psi(&SpherePhasePoint::from_array(*z)).map(|e| e.to_array());
    let lhs = fd::directional4(map, &p.to_array(), &field, h / scale.max(T::one()))?;
    let (dq, dv) = euclid_field(&psi(p)?, params)?;
    let rescale = T::one() / (p.q0() * p.q0());
    let rhs = EuclidPhasePoint::new(dq * rescale, dv * rescale).to_array();
    let mut worst = T::zero();
    let mut size = T::one();
    for k in 0..6 {
        worst = worst.max((lhs[k] - rhs[k]).abs());
        size = size.max(rhs[k].abs());
    }
    Ok((worst / size, rescale))
}

/// `(|H_K(Ψ(p)) − E(p)|, max |J_K(Ψ(p)) − J(p)|)`.
pub fn intertwine_euclid<T: Real>(p: &SpherePhasePoint<T>, params: &KeplerParams<T>) -> Result<(T, T)> {
    let energy = reduced_energy(p, params)?;
    nu_of(energy, params.gamma)?;
    let e = psi(p)?;
    let dh = (kepler_hamiltonian(&e, params)? - energy).abs();
    let dj = kepler_momentum(&e, params)?.max_abs_diff(&momentum_j(p, params)?);
    Ok((dh, dj))
}

fn phi_c_frame<T: Real>(e: &EuclidPhasePoint<T>, params: &KeplerParams<T>) -> Result<LsFrame<T>> {
    let h = kepler_hamiltonian(e, params)?;
    let nu = nu_of(h, params.gamma)?;
    Ok(frame_from_qv(&e.q, &e.v, nu, params.gamma))
}

/// The Euclidean Ligon–Schaaf map `Φ_c` with `φ_c = α_{c,0}`.
pub fn phi_c<T: Real>(e: &EuclidPhasePoint<T>, params: &KeplerParams<T>) -> Result<DelaunayPoint<T>> {
    let frame = phi_c_frame(e, params)?;
    Ok(frame_to_delaunay(&frame, frame.phi))
}

/// `Φ_c` with the phase sign flipped. Only meant for checking that the
/// verification suites catch a corrupted map.
pub fn phi_c_corrupted<T: Real>(e: &EuclidPhasePoint<T>, params: &KeplerParams<T>) -> Result<DelaunayPoint<T>> {
    let frame = phi_c_frame(e, params)?;
    Ok(frame_to_delaunay(&frame, -frame.phi))
}

/// Solves `χ − r sin χ = m` for `0 ≤ r ≤ 1` by safeguarded Newton.
fn solve_kepler_equation<T: Real>(r: T, m: T) -> T {
    let (mut lo, mut hi) = (m - r, m + r);
    let mut chi = m + r * m.sin();
    for _ in 0..100 {
        let g = chi - r * chi.sin() - m;
        if g > T::zero() {
            hi = chi;
        } else {
            lo = chi;
        }
        let dg = T::one() - r * chi.cos();
        let mut next = chi - g / dg;
        if !(next > lo && next < hi) {
            next = (lo + hi) * T::of(0.5);
        }
        if (next - chi).abs() <= T::epsilon() * (T::one() + chi.abs()) {
            return next;
        }
        chi = next;
    }
    chi
}

/// Inverse of [`phi_c`] on `T⁺S³` away from the collision fibre `β0 = 1`.
pub fn phi_c_inverse<T: Real>(d: &DelaunayPoint<T>, params: &KeplerParams<T>) -> Result<EuclidPhasePoint<T>> {
    let yy = d.y.norm_squared();
    if !(yy > T::zero()) {
        return Err(KeplerError::ZeroSection);
    }
    let nu = yy.sqrt();
    let w = d.y / nu;
    // α0 = r sin(φ − δ) with (x0, y0/ν) = r(cos δ, sin δ); with φ = α0 this
    // is Kepler's equation in χ = φ − δ.
    let r = (d.x.head() * d.x.head() + w.head() * w.head()).sqrt().min(T::one());
    let delta = w.head().atan2(d.x.head());
    let phi = solve_kepler_equation(r, -delta) + delta;
    let (s, c) = phi.sin_cos();
    let alpha = d.x * s - w * c;
    let beta = d.x * c + w * s;
    let gamma = params.gamma;
    let radius = nu * nu * (T::one() - beta.head()) / gamma;
    if !(radius > T::zero()) {
        return Err(KeplerError::PunctureHit);
    }
    let v = beta.tail() * (nu / radius);
    let q = (alpha.tail() + v * (nu * alpha.head() / gamma)) * radius;
    Ok(EuclidPhasePoint::new(q, v))
}

/// `Φ⁻¹ = Ψ⁻¹ ∘ Φ_c⁻¹`.
pub fn ls_map_inverse<T: Real>(d: &DelaunayPoint<T>, params: &KeplerParams<T>) -> Result<SpherePhasePoint<T>> {
    psi_inverse(&phi_c_inverse(d, params)?)
}

/// `max |Φ_c(Ψ(p)) − Φ(p)|`.
pub fn composition_check<T: Real>(p: &SpherePhasePoint<T>, params: &KeplerParams<T>) -> Result<T> {
    Ok(phi_c(&psi(p)?, params)?.max_abs_diff(&ls_map(p, params)?))
}

/// Same as [`composition_check`] through [`phi_c_corrupted`].
pub fn composition_check_corrupted<T: Real>(p: &SpherePhasePoint<T>, params: &KeplerParams<T>) -> Result<T> {
    Ok(phi_c_corrupted(&psi(p)?, params)?.max_abs_diff(&ls_map(p, params)?))
}

/// Embeds `𝐪`-chart coordinates `(𝐪, 𝐯)` of the upper hemisphere into TS³.
pub fn chart_embedding<T: Real>(z: &[T; 6]) -> Result<SpherePhasePoint<T>> {
    let q = Vec3([z[0], z[1], z[2]]);
    let v = Vec3([z[3], z[4], z[5]]);
    let rest = T::one() - q.norm_squared();
    if !(rest > T::zero()) {
        return Err(KeplerError::EquatorSingularity { q0: 0.0 });
    }
    let q0 = rest.sqrt();
    Ok(SpherePhasePoint::new(Vec4::from_parts(q0, q), Vec4::from_parts(-q.dot(&v) / q0, v)))
}

/// `𝐪`-chart coordinates of an upper-hemisphere point.
pub fn chart_coordinates<T: Real>(p: &SpherePhasePoint<T>) -> [T; 6] {
    let (q, v) = (p.qs(), p.vs());
    [q[0], q[1], q[2], v[0], v[1], v[2]]
}

/// `κ(𝐪, 𝐯) = (𝐪, (1 − |𝐪|²)𝐯)`.
pub fn kappa<T: Real>(z: &[T; 6]) -> [T; 6] {
    let f = T::one() - (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]);
    [z[0], z[1], z[2], f * z[3], f * z[4], f * z[5]]
}

/// Closed form of `κ*ω − ω` for `ω = d𝐪∧d𝐯`:
/// `−|𝐪|² d𝐪∧d𝐯 − 2 Σ vᵢqⱼ dqᵢ∧dqⱼ`, as an antisymmetric matrix.
pub fn kappa_defect_formula<T: Real>(z: &[T; 6]) -> [[T; 6]; 6] {
    let w = |i: usize, j: usize| T::of(-2.0) * z[3 + i] * z[j];
    scaled_fibre_defect(w, -(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]))
}

/// `[[W − Wᵀ, c I], [−c I, 0]]`.
fn scaled_fibre_defect<T: Real>(w: impl Fn(usize, usize) -> T, c: T) -> [[T; 6]; 6] {
    let mut m = [[T::zero(); 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = w(i, j) - w(j, i);
        }
        m[i][3 + i] = c;
        m[3 + i][i] = -c;
    }
    m
}

fn pullback_defect<T: Real>(jac: &[[T; 6]; 6]) -> [[T; 6]; 6] {
    let j6 = fd::canonical_form::<T, 6>();
    let pb = fd::pullback(jac, &j6);
    std::array::from_fn(|a| std::array::from_fn(|b| pb[a][b] - j6[a][b]))
}

fn max_entry<T: Real>(m: &[[T; 6]; 6]) -> T {
    fd::max_abs_diff(m, &[[T::zero(); 6]; 6])
}

/// Tangent lift of the projection `𝐪 ↦ 𝐪/q0` in the `𝐪`-chart.
fn gnomonic_tangent_lift<T: Real>(z: &[T; 6]) -> [T; 6] {
    let q = Vec3([z[0], z[1], z[2]]);
    let u = Vec3([z[3], z[4], z[5]]);
    let q0 = (T::one() - q.norm_squared()).sqrt();
    let big_q = q / q0;
    let big_v = u / q0 + q * (q.dot(&u) / (q0 * q0 * q0));
    [big_q[0], big_q[1], big_q[2], big_v[0], big_v[1], big_v[2]]
}

/// `max(1, max|Dᵢⱼ|²)`.
fn jacobian_scale<T: Real, const N: usize, const M: usize>(d: &[[T; N]; M]) -> T {
    let m = d.iter().flatten().fold(T::zero(), |acc, x| acc.max(x.abs()));
    (m * m).max(T::one())
}

/// Maximum entry of `Ψ*ω₃ − ω` at `p` in the `𝐪`-chart with `ω = d𝐪∧d𝐯`,
/// from a finite-difference Jacobian with step `h`.
pub fn symplectic_defect<T: Real>(p: &SpherePhasePoint<T>, h: T) -> Result<T> {
    psi(p)?;
    let map = |z: &[T; 6]| psi(&chart_embedding(z)?).map(|e| e.to_array());
    let jac = fd::jacobian(map, &chart_coordinates(p), h)?;
    Ok(max_entry(&pullback_defect(&jac)))
}

/// All non-symplecticity witnesses at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticWitness<T> {
    /// Max entry of `Ψ*ω₃ − ω` in the `𝐪`-chart.
    pub psi_defect: T,
    /// Max entry of the closed-form `κ*ω − ω`.
    pub kappa_formula: T,
    /// Finite-difference `κ*ω − ω` against its closed form.
    pub kappa_fd_vs_formula: T,
    /// `|T g(κ(z)) − Ψ(z)|` for the projection `g`.
    pub factorisation: T,
    /// `Ψ*ω − ω` in the chart `(Q, Ṽ)` lifted by `g`, against the closed
    /// form of a fibre scaling by `q0²`.
    pub gnomonic_chart_vs_formula: T,
    /// `𝐪`-chart `Ψ` defect minus the `κ` closed form (not expected to vanish:
    /// the tangent lift of `g` is not symplectic for `d𝐪∧d𝐯`).
    pub psi_vs_kappa_chart: T,
    /// Max entry of `Φ_c*ω₄ − ω₃` at `Ψ(p)`, relative to `max(1, max|DΦ_c|²)`
    /// since pullback entries are quadratic in the Jacobian.
    pub phi_c_defect: T,
    /// Max entry of `Φ*ω₄ − ω` in the `𝐪`-chart.
    pub phi_defect: T,
}

pub fn symplectic_witness<T: Real>(
    p: &SpherePhasePoint<T>,
    params: &KeplerParams<T>,
    h: T,
) -> Result<SymplecticWitness<T>> {
    let z = chart_coordinates(p);
    let e = psi(p)?;

    let psi_map = |z: &[T; 6]| psi(&chart_embedding(z)?).map(|e| e.to_array());
    let psi_pb = pullback_defect(&fd::jacobian(psi_map, &z, h)?);

    let kappa_closed = kappa_defect_formula(&z);
    let kappa_pb = pullback_defect(&fd::jacobian(|z: &[T; 6]| Ok(kappa(z)), &z, h)?);

    let lifted = gnomonic_tangent_lift(&kappa(&z));
    let direct = e.to_array();
    let factorisation = (0..6).fold(T::zero(), |acc, k| acc.max((lifted[k] - direct[k]).abs()));

    // Chart (Q, Ṽ) with Ṽ the tangent lift of the ambient velocity.
    let lift_inverse = |w: &[T; 6]| -> Result<SpherePhasePoint<T>> {
        let big_q = Vec3([w[0], w[1], w[2]]);
        let vt = Vec3([w[3], w[4], w[5]]);
        let q0 = T::one() / (T::one() + big_q.norm_squared()).sqrt();
        let c = q0 * q0 * q0 * big_q.dot(&vt);
        Ok(SpherePhasePoint::new(
            Vec4::from_parts(q0, big_q * q0),
            Vec4::from_parts(-c, vt * q0 - big_q * c),
        ))
    };
    let wpt = {
        let vt = e.v * (T::one() + e.q.norm_squared());
        [e.q[0], e.q[1], e.q[2], vt[0], vt[1], vt[2]]
    };
    let chart_map = |w: &[T; 6]| psi(&lift_inverse(w)?).map(|e| e.to_array());
    let chart_pb = pullback_defect(&fd::jacobian(chart_map, &wpt, h)?);
    let chart_closed = {
        let rr = T::one() + e.q.norm_squared();
        // f = 1/(1+|Q|²), ∂ⱼf = −2Qⱼ f².
        let grad = |j: usize| T::of(-2.0) * e.q[j] / (rr * rr);
        scaled_fibre_defect(|i, j| wpt[3 + i] * grad(j), T::one() / rr - T::one())
    };

    let j8 = fd::canonical_form::<T, 8>();
    let j6 = fd::canonical_form::<T, 6>();
    let phi_c_map = |w: &[T; 6]| phi_c(&EuclidPhasePoint::from_array(*w), params).map(|d| d.to_array());
    let phi_c_jac = fd::jacobian(phi_c_map, &e.to_array(), h)?;
    let phi_c_defect = fd::max_abs_diff(&fd::pullback(&phi_c_jac, &j8), &j6) / jacobian_scale(&phi_c_jac);

    let phi_map = |w: &[T; 6]| ls_map(&chart_embedding(w)?, params).map(|d| d.to_array());
    let phi_jac = fd::jacobian(phi_map, &z, h)?;
    let phi_defect = fd::max_abs_diff(&fd::pullback(&phi_jac, &j8), &j6);

    Ok(SymplecticWitness {
        psi_defect: max_entry(&psi_pb),
        kappa_formula: max_entry(&kappa_closed),
        kappa_fd_vs_formula: fd::max_abs_diff(&kappa_pb, &kappa_closed),
        factorisation,
        gnomonic_chart_vs_formula: fd::max_abs_diff(&chart_pb, &chart_closed),
        psi_vs_kappa_chart: fd::max_abs_diff(&psi_pb, &kappa_closed),
        phi_c_defect,
        phi_defect,
    })
}

/// Hermite quadrature of `g` over consecutive samples with derivative `dg`.
fn hermite_integral<T: Real>(xs: &[T], g: &[T], dg: &[T]) -> Vec<T> {
    let mut acc = T::zero();
    let mut out = Vec::with_capacity(xs.len());
    out.push(acc);
    for k in 1..xs.len() {
        let h = xs[k] - xs[k - 1];
        acc = acc + h * (g[k - 1] + g[k]) * T::of(0.5) + h * h * (dg[k - 1] - dg[k]) / T::of(12.0);
        out.push(acc);
    }
    out
}

/// Cumulative Euclidean Moser clock `∫ dτ/|Q|` along `Ψ(traj)` and the
/// spherical clock `∫ dt/(q0|𝐪|)`, both by Hermite quadrature over the
/// samples. Returns the largest difference of the two running integrals.
pub fn moser_correspondence<T: Real>(traj: &Trajectory<T>, params: &KeplerParams<T>) -> Result<T> {
    let (euclid, sphere) = moser_clocks(traj, params)?;
    Ok(euclid.iter().zip(&sphere).fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).abs())))
}

/// The two running integrals compared by [`moser_correspondence`].
pub fn moser_clocks<T: Real>(traj: &Trajectory<T>, params: &KeplerParams<T>) -> Result<(Vec<T>, Vec<T>)> {
    if let Some(c) = &traj.collision {
        return Err(KeplerError::CollisionProximity { margin: c.margin.as_f64(), guard: c.guard.as_f64() });
    }
    let n = traj.samples.len();
    let (mut taus, mut ts) = (Vec::with_capacity(n), Vec::with_capacity(n));
    let (mut ge, mut dge, mut gs, mut dgs) = (vec![], vec![], vec![], vec![]);
    for s in &traj.samples {
        let p = &s.point;
        let e = psi(p)?;
        let (qd, _) = vector_field(p, params)?;
        let q0 = p.q0();
        // dQ/dτ = q0² dQ/dt = q0 d𝐪/dt − 𝐪 dq0/dt.
        let dq_dtau = qd.tail() * q0 - p.qs() * qd.head();
        let r = e.q.norm();
        taus.push(s.tau);
        ge.push(T::one() / r);
        dge.push(-e.q.dot(&dq_dtau) / (r * r * r));
        // g = 1/(q0 ρ), ρ = |𝐪|.
        let rho = p.qs().norm();
        let drho = p.qs().dot(&qd.tail()) / rho;
        let g = T::one() / (q0 * rho);
        ts.push(s.t);
        gs.push(g);
        dgs.push(-g * g * (qd.head() * rho + q0 * drho));
    }
    Ok((hermite_integral(&taus, &ge, &dge), hermite_integral(&ts, &gs, &dgs)))
}

/// Classical RK4 on the Euclidean Kepler field.
pub fn euclid_rk4<T: Real>(
    e0: &EuclidPhasePoint<T>,
    t: T,
    steps: usize,
    params: &KeplerParams<T>,
) -> Result<EuclidPhasePoint<T>> {
    let h = t / T::of(steps as f64);
    let f = |e: &EuclidPhasePoint<T>| euclid_field(e, params).map(|(a, b)| EuclidPhasePoint::new(a, b));
    let shift = |e: &EuclidPhasePoint<T>, a: T, k: &EuclidPhasePoint<T>| EuclidPhasePoint::new(e.q + k.q * a, e.v + k.v * a);
    let half = h * T::of(0.5);
    let mut e = *e0;
    for _ in 0..steps {
        let k1 = f(&e)?;
        let k2 = f(&shift(&e, half, &k1))?;
        let k3 = f(&shift(&e, half, &k2))?;
        let k4 = f(&shift(&e, h, &k3))?;
        let sixth = h / T::of(6.0);
        e = EuclidPhasePoint::new(
            e.q + (k1.q + k2.q * T::of(2.0) + k3.q * T::of(2.0) + k4.q) * sixth,
            e.v + (k1.v + k2.v * T::of(2.0) + k3.v * T::of(2.0) + k4.v) * sixth,
        );
    }
    Ok(e)
}

/// Integrates the Euclidean field from `Ψ(p(0))` on the τ clock, with
/// `substeps` RK4 steps between samples, and returns the largest distance
/// to `Ψ(p(t))`.
pub fn orbit_image_residual<T: Real>(
    traj: &Trajectory<T>,
    params: &KeplerParams<T>,
    substeps: usize,
) -> Result<T> {
    let Some(first) = traj.first() else { return Ok(T::zero()) };
    let mut e = psi(&first.point)?;
    let mut tau = first.tau;
    let mut worst = T::zero();
    for s in traj.samples.iter().skip(1) {
        e = euclid_rk4(&e, s.tau - tau, substeps, params)?;
        tau = s.tau;
        worst = worst.max(e.max_abs_diff(&psi(&s.point)?));
    }
    Ok(worst)
}

/// `𝓗(Φ_c(e)) − H_K(e)`.
pub fn phi_c_energy_residual<T: Real>(e: &EuclidPhasePoint<T>, params: &KeplerParams<T>) -> Result<T> {
    Ok((delaunay_hamiltonian(&phi_c(e, params)?, params)? - kepler_hamiltonian(e, params)?).abs())
}

/// `|μ(p) − Q×V|` at `Ψ(p)`: the angular momenta agree exactly.
pub fn angular_momentum_residual<T: Real>(p: &SpherePhasePoint<T>) -> Result<T> {
    let e = psi(p)?;
    Ok((angular_momentum(p) - e.q.cross(&e.v)).max_abs())
}
