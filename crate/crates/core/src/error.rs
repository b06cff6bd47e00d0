use thiserror::Error;

/// Failure modes shared across the crate.
///
/// Numeric payloads are stored as `f64` regardless of the scalar type the
/// failing computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KeplerError {
    #[error("collision proximity: 1 - q0^2 = {margin:.3e} is within the guard {guard:.3e}")]
    CollisionProximity { margin: f64, guard: f64 },

    #[error("degenerate orbit: angular momentum vanishes (rectilinear collision orbit)")]
    DegenerateOrbit,

    #[error("energy E = {energy} is not negative")]
    PositiveEnergy { energy: f64 },

    #[error("point lies outside the chart |pi|^2 > 2E")]
    OutsideChart,

    #[error("zero section: y = 0 has no Delaunay Hamiltonian")]
    ZeroSection,

    #[error("equator singularity: q0 = {q0:.3e} is not in the open upper hemisphere")]
    EquatorSingularity { q0: f64 },

    #[error("puncture hit: the image lies on the Euclidean collision point Q = 0")]
    PunctureHit,

    #[error("cannot project onto TS^3: q = 0")]
    ZeroPosition,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("sampling failed after {attempts} attempts: {reason}")]
    SamplingFailed { attempts: usize, reason: &'static str },

    #[error("integration step failure at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = KeplerError> = std::result::Result<T, E>;
