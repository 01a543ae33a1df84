use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported dimension {0}, expected 1, 2 or 3")]
    UnsupportedDimension(usize),
    #[error("points per axis must be even and at least 8, got {0}")]
    InvalidPointCount(usize),
    #[error("half width must be positive and finite, got {0}")]
    InvalidHalfWidth(f64),
    #[error("field length {got} does not match the grid point count {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("field contains a non-finite value")]
    NonFiniteValue,
    #[error("inverse transform left an imaginary residue of {0:e} (relative)")]
    SymmetryViolation(f64),
    #[error("multiplier is not finite at some grid wavenumber")]
    NonFiniteMultiplier,
    #[error("norm exponent must be at least 1, got {0}")]
    InvalidNormExponent(f64),
    #[error("a grid wavenumber lies on the singular sphere |xi|^2s = 1; raise delta or change the box")]
    SingularMode,
    #[error("field is nonzero outside its declared support")]
    SupportOverlap,
    #[error("only {0} usable shells in the fit window, need at least 5")]
    InsufficientData(usize),
    #[error("quadratic form is not positive ({0:e}); the field is not in U+")]
    NotInUPlus(f64),
    #[error("field is identically zero")]
    ZeroField,
    #[error("iterate left U+ at iteration {iteration}")]
    LeftUPlus { iteration: usize },
    #[error("coefficient Q is negative somewhere")]
    NegativeCoefficient,
    #[error("reference profile is identically zero")]
    ZeroReference,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
