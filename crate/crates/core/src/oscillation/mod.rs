//! The radial Cauchy problem `(v z')' + A v z = 0` with a possibly
//! singular start at the origin, zero finding, and the two integral
//! criteria that force oscillation.

mod criteria;
mod integrator;
mod profile;
mod solver;

pub use criteria::{
    criterion_integrable, criterion_nonintegrable, estimate_limsup, integral_divergence_probe, reciprocal_tail,
    CriterionVerdict, DivergenceProbe, IntegrableCriterion, IntegrableOptions, LimsupEstimate, NonintegrableCriterion,
    ProbeVerdict, RatioSample, TailBracket, TailKind, CONVERGENCE_RATIO, DIVERGENCE_RATIO, STABILITY_MARGIN,
};
pub(crate) use profile::{hermite_basis, hermite_basis_derivative};
pub use profile::{CoefficientProfile, PotentialProfile, RadialMap, SampledMap};
pub use solver::{
    find_zeros, solve_interior_cauchy, solve_singular_cauchy, CauchySolution, PicardLayer, SolverOptions, StartKind,
    ZERO_TOL,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OscillationError {
    #[error("coefficient v({t}) = {value} is negative")]
    NegativeCoefficient { t: f64, value: f64 },
    #[error("coefficient v vanishes at t = {t} inside the domain")]
    VanishingCoefficient { t: f64 },
    #[error("coefficient v does not increase from v(0+) = 0 near the origin")]
    ViolatesV2,
    #[error("potential A({t}) = {value} is negative")]
    NegativePotential { t: f64, value: f64 },
    #[error("potential A vanishes identically")]
    TrivialPotential,
    #[error("non-finite value at t = {t}")]
    NonFinite { t: f64 },
    #[error("abscissa {t} at row {row} does not increase strictly")]
    NonMonotoneGrid { row: usize, t: f64 },
    #[error("invalid initial value {0}")]
    InvalidInitialValue(f64),
    #[error("Picard layer failed to contract (width {width:e}, factor {factor})")]
    PicardNoContraction { width: f64, factor: f64 },
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("step limit reached at t = {t}")]
    StepLimit { t: f64 },
    #[error("domain ends at {available}, need {needed}")]
    DomainTooShort { needed: f64, available: f64 },
    #[error("integrand g({t}) = {value} is negative")]
    NegativeIntegrand { t: f64, value: f64 },
    #[error("criterion precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("{0}")]
    InvalidParameter(String),
}
