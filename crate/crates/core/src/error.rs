use thiserror::Error;

/// Everything that can go wrong while building modes, states and fields.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mode frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),
    #[error("helicity must be +1 or -1, got {0}")]
    BadHelicity(i32),
    #[error("transverse wavenumber {kt} exceeds paraxial limit {limit} * omega ({omega})")]
    ParaxialityViolated { kt: f64, omega: f64, limit: f64 },
    #[error("frequency shift {delta} exceeds nominal frequency {omega}")]
    ShiftExceedsFrequency { delta: f64, omega: f64 },
    #[error("orbital pair needs m != 0")]
    DegenerateOrbitalPair,
    #[error("pair has zero frequency shift; both components sit at the nominal frequency")]
    DegeneratePair,
    #[error("creating a photon would exceed the truncation N_max = {0}")]
    TruncationOverflow(u32),
    #[error("state is not normalized (norm^2 = {0})")]
    UnnormalizedState(f64),
    #[error("states or modes belong to different registries or truncations")]
    BasisMismatch,
    #[error("measurement branch has zero probability")]
    ZeroProbabilityBranch,
    #[error("Laguerre-Gauss profiles are only available in the reference plane (z = {z0}, asked {z})")]
    LgOffFocalPlane { z: f64, z0: f64 },
    #[error("field vanishes; polarization is undefined")]
    NullField,
    #[error("intensity has no azimuthal structure to track")]
    NoAzimuthalStructure,
    #[error("spectrum support reaches non-positive frequencies (center {center}, width {sigma})")]
    SupportCrossesZero { center: f64, sigma: f64 },
    #[error("atom absorbs neither component")]
    ZeroAbsorption,
    #[error("grid must contain at least one point")]
    EmptyGrid,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
