//! Numerical flow of the constrained field with periodic reprojection onto
//! TS³ and a collision guard on `1 − q0²`.
//!
//! The two regularization clocks are carried as extra state components so
//! they are integrated to the same order as the motion itself:
//! `τ = ∫ dt/q0²` and `s = ∫ dt/(q0|𝐪|)`. Both are only defined in the open
//! upper hemisphere. Once a trajectory leaves it they are reported as NaN.

use ode_solvers::dop_shared::{IntegrationError, OutputType, System};
use ode_solvers::{Dop853, SVector};
use serde::{Deserialize, Serialize};

use crate::dynamics::{field_unchecked, guarded_margin, KeplerParams, DEFAULT_COLLISION_GUARD};
use crate::error::{KeplerError, Result};
use crate::geometry::{project_to_ts3, SpherePhasePoint, Vec4};
use crate::scalar::Real;

/// Below this `q0` the clock integrands are switched off.
const CLOCK_Q0_MIN: f64 = 1e-6;

type State<T> = SVector<T, 10>;

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Classical fixed-step RK4; `dt` is the step.
    #[default]
    Rk4Projected,
    /// Adaptive Dormand–Prince 8(5,3); `dt` is the output interval.
    Dop853Projected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig<T> {
    pub method: Method,
    pub dt: T,
    pub t_end: T,
    /// Reproject after this many steps (RK4) or output intervals (DOP853).
    pub reproject_every: usize,
    /// Minimum allowed `1 − q0²`.
    pub collision_guard: T,
    /// Keep every n-th step as a sample. The final state is always kept.
    pub sample_every: usize,
    /// Relative and absolute tolerances of the adaptive method.
    pub rtol: T,
    pub atol: T,
}

impl<T: Real> IntegratorConfig<T> {
    pub fn rk4(dt: T, t_end: T) -> Self {
        Self { dt, t_end, ..Self::default() }
    }

    pub fn dop853(dt: T, t_end: T) -> Self {
        Self { method: Method::Dop853Projected, dt, t_end, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(KeplerError::InvalidConfig(msg));
        if !(self.dt > T::zero() && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= T::zero() && self.t_end.is_finite()) {
            return bad(format!("t_end must be non-negative, got {}", self.t_end));
        }
        if !(self.collision_guard > T::zero()) {
            return bad(format!("collision_guard must be positive, got {}", self.collision_guard));
        }
        if self.reproject_every == 0 || self.sample_every == 0 {
            return bad("reproject_every and sample_every must be at least 1".into());
        }
        if !(self.rtol > T::zero() && self.atol > T::zero()) {
            return bad("rtol and atol must be positive".into());
        }
        Ok(())
    }
}

impl<T: Real> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self {
            method: Method::Rk4Projected,
            dt: T::of(1e-3),
            t_end: T::one(),
            reproject_every: 1,
            collision_guard: T::of(DEFAULT_COLLISION_GUARD),
            sample_every: 1,
            rtol: T::of(1e-13),
            atol: T::of(1e-13),
        }
    }
}

/// One recorded state with its three clocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample<T> {
    pub t: T,
    pub tau: T,
    pub s: T,
    pub point: SpherePhasePoint<T>,
}

/// Where and why a run stopped at the collision guard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionRecord<T> {
    /// Time and state of the last sample that respected the guard.
    pub last_valid: TrajectorySample<T>,
    /// `1 − q0²` at the first state that violated it, NaN if that state was
    /// not finite.
    pub margin: T,
    pub guard: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub samples: Vec<TrajectorySample<T>>,
    /// Present when the run ended early at the collision guard.
    pub collision: Option<CollisionRecord<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> Option<&TrajectorySample<T>> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&TrajectorySample<T>> {
        self.samples.last()
    }

    pub fn points(&self) -> impl Iterator<Item = &SpherePhasePoint<T>> {
        self.samples.iter().map(|s| &s.point)
    }

    /// Turns an early stop at the guard into an error.
    pub fn into_result(self) -> Result<Self> {
        match self.collision {
            Some(c) => Err(KeplerError::CollisionProximity {
                margin: c.margin.as_f64(),
                guard: c.guard.as_f64(),
            }),
            None => Ok(self),
        }
    }
}

fn to_state<T: Real>(p: &SpherePhasePoint<T>, tau: T, s: T) -> State<T> {
    let z = p.to_array();
    State::from_fn(|i, _| if i < 8 { z[i] } else if i == 8 { tau } else { s })
}

fn point_of<T: Real>(y: &State<T>) -> SpherePhasePoint<T> {
    SpherePhasePoint::new(Vec4::new(y[0], y[1], y[2], y[3]), Vec4::new(y[4], y[5], y[6], y[7]))
}

/// Clock integrands `(1/q0², 1/(q0|𝐪|))`, or
/// `None` outside the upper hemisphere.
pub(crate) fn clock_rates<T: Real>(p: &SpherePhasePoint<T>) -> Option<[T; 2]> {
    let q0 = p.q0();
    if q0 <= T::of(CLOCK_Q0_MIN) {
        return None;
    }
    let r = p.qs().norm();
    Some([T::one() / (q0 * q0), T::one() / (q0 * r)])
}

fn rates<T: Real>(y: &State<T>, gamma: T) -> State<T> {
    let p = point_of(y);
    let margin = p.qs().norm_squared().max(T::min_positive_value());
    let (qd, vd) = field_unchecked(&p, gamma, margin);
    let clocks = clock_rates(&p).unwrap_or([T::zero(); 2]);
    State::from_fn(|i, _| match i {
        0..=3 => qd[i],
        4..=7 => vd[i - 4],
        8 => clocks[0],
        _ => clocks[1],
    })
}

fn rk4_step<T: Real>(y: &State<T>, h: T, gamma: T) -> State<T> {
    let half = T::of(0.5);
    let k1 = rates(y, gamma);
    let k2 = rates(&(y + k1 * (h * half)), gamma);
    let k3 = rates(&(y + k2 * (h * half)), gamma);
    let k4 = rates(&(y + k3 * h), gamma);
    y + (k1 + k2 * T::of(2.0) + k3 * T::of(2.0) + k4) * (h / T::of(6.0))
}

fn reproject<T: Real>(y: &State<T>) -> Result<State<T>> {
    let p = point_of(y);
    let p = project_to_ts3(p.q, p.v)?;
    Ok(to_state(&p, y[8], y[9]))
}

/// Bookkeeping shared by both methods.
struct Recorder<T> {
    samples: Vec<TrajectorySample<T>>,
    clocks_valid: bool,
}

impl<T: Real> Recorder<T> {
    fn push(&mut self, t: T, y: &State<T>) {
        let p = point_of(y);
        self.clocks_valid &= clock_rates(&p).is_some();
        let (tau, s) = if self.clocks_valid { (y[8], y[9]) } else { (T::nan(), T::nan()) };
        self.samples.push(TrajectorySample { t, tau, s, point: p });
    }
}

/// Checks the guard; a non-finite state fails with a NaN margin.
fn margin_ok<T: Real>(y: &State<T>, guard: T) -> std::result::Result<(), T> {
    if !y.iter().take(8).all(|a| a.is_finite()) {
        return Err(T::nan());
    }
    let margin = y[1] * y[1] + y[2] * y[2] + y[3] * y[3];
    if margin > guard {
        Ok(())
    } else {
        Err(margin)
    }
}

/// Integrates the constrained field from `p0`.
///
/// A run that reaches the collision guard is not an error: it returns the
/// samples so far and a [`CollisionRecord`]. Adaptive step failures are
/// reported as [`KeplerError::StepFailure`].
pub fn integrate<T: Real>(
    p0: &SpherePhasePoint<T>,
    params: &KeplerParams<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>>
where
    f64: From<T>,
{
    cfg.validate()?;
    if !p0.is_finite() {
        return Err(KeplerError::NonFinite("initial state"));
    }
    guarded_margin(&p0.q, cfg.collision_guard)?;
    let y0 = to_state(p0, T::zero(), T::zero());
    match cfg.method {
        Method::Rk4Projected => integrate_rk4(y0, params.gamma, cfg),
        Method::Dop853Projected => integrate_dop853(y0, params.gamma, cfg),
    }
}

fn integrate_rk4<T: Real>(y0: State<T>, gamma: T, cfg: &IntegratorConfig<T>) -> Result<Trajectory<T>> {
    let mut rec = Recorder { samples: Vec::new(), clocks_valid: true };
    rec.push(T::zero(), &y0);
    let n_steps = (cfg.t_end / cfg.dt).ceil().to_usize().unwrap_or(0);
    let mut y = y0;
    let mut t = T::zero();
    for step in 1..=n_steps {
        let t_next = if step == n_steps { cfg.t_end } else { T::of(step as f64) * cfg.dt };
        let mut next = rk4_step(&y, t_next - t, gamma);
        // The field is finite away from the poles, so a non-finite step is a
        // pole approach and is reported like a guard trip.
        if let Err(margin) = margin_ok(&next, cfg.collision_guard) {
            return Ok(collided(rec, t, &y, margin, cfg.collision_guard));
        }
        if step % cfg.reproject_every == 0 {
            next = reproject(&next)?;
        }
        y = next;
        t = t_next;
        if step % cfg.sample_every == 0 || step == n_steps {
            rec.push(t, &y);
        }
    }
    Ok(Trajectory { samples: rec.samples, collision: None })
}

fn collided<T: Real>(
    mut rec: Recorder<T>,
    t: T,
    y: &State<T>,
    margin: T,
    guard: T,
) -> Trajectory<T> {
    if rec.samples.last().map(|s| s.t) != Some(t) {
        rec.push(t, y);
    }
    let last_valid = *rec.samples.last().expect("initial sample recorded");
    Trajectory {
        samples: rec.samples,
        collision: Some(CollisionRecord { last_valid, margin, guard }),
    }
}

struct SphereSystem<T> {
    gamma: T,
    guard: T,
}

impl<T: Real> System<T, State<T>> for SphereSystem<T> {
    fn system(&self, _t: T, y: &State<T>, dy: &mut State<T>) {
        *dy = rates(y, self.gamma);
    }

    fn solout(&mut self, _t: T, y: &State<T>, _dy: &State<T>) -> bool {
        margin_ok(y, self.guard).is_err() || !y.iter().all(|a| a.is_finite())
    }
}

fn integrate_dop853<T: Real>(
    y0: State<T>,
    gamma: T,
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>>
where
    f64: From<T>,
{
    let mut rec = Recorder { samples: Vec::new(), clocks_valid: true };
    rec.push(T::zero(), &y0);
    // Round-off in t_end/dt must not create a sliver chunk at the end.
    let n_chunks = (cfg.t_end / cfg.dt * T::of(1.0 - 1e-12)).ceil().to_usize().unwrap_or(0);
    let mut y = y0;
    let mut t = T::zero();
    for chunk in 1..=n_chunks {
        let t_next = if chunk == n_chunks { cfg.t_end } else { T::of(chunk as f64) * cfg.dt };
        let system = SphereSystem { gamma, guard: cfg.collision_guard };
        let mut solver = Dop853::new(system, t, t_next, cfg.dt, y, cfg.rtol, cfg.atol);
        solver.set_output(OutputType::Sparse);
        solver.integrate().map_err(|e| match e {
            IntegrationError::MaxNumStepReached { x, .. }
            | IntegrationError::StepSizeUnderflow { x }
            | IntegrationError::StiffnessDetected { x } => {
                KeplerError::StepFailure { t: x, reason: e.to_string() }
            }
        })?;
        let (xs, ys) = (solver.x_out(), solver.y_out());
        let y_last = ys.last().expect("solver output is never empty");
        if let Err(margin) = margin_ok(y_last, cfg.collision_guard) {
            // The last accepted state inside the guard precedes the tripping one.
            let k = ys.len().saturating_sub(2);
            return Ok(collided(rec, xs[k], &ys[k], margin, cfg.collision_guard));
        }
        y = *y_last;
        if chunk % cfg.reproject_every == 0 {
            y = reproject(&y)?;
        }
        t = t_next;
        if chunk % cfg.sample_every == 0 || chunk == n_chunks {
            rec.push(t, &y);
        }
    }
    Ok(Trajectory { samples: rec.samples, collision: None })
}
