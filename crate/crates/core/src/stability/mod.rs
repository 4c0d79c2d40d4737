//! Radial profiles built from geometric data, the hypothesis checks of the
//! two instability theorems, and Rayleigh certificates between consecutive
//! zeros of the radial solution.

mod certificate;
mod hypotheses;
mod pipeline;
mod smoothing;

pub use certificate::{rayleigh_certificate, rayleigh_certificates, RayleighCertificate, CERTIFICATE_TOL};
pub use hypotheses::{
    check_theorem1, check_theorem2, run_criteria, Branch, CheckOptions, CriteriaOutcome, Evidence, HypothesisMode,
    HypothesisReport, Overall, Status, SubVerdict,
};
pub use pipeline::{
    analyze_theorem1, analyze_theorem2, instability_verdict, Conclusion, Decision, InstabilityRecord, PipelineOptions,
    Theorem, ENVELOPE_CONCLUSION, GAUSS_MAP_CONCLUSION,
};
pub use smoothing::{smoothing_kj, KjSmoothing};

use serde::Serialize;
use thiserror::Error;

use crate::curvature::{CurvatureError, PrincipalSpectrum};
use crate::oscillation::{CoefficientProfile, OscillationError, PotentialProfile, RadialMap};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Oscillation(#[from] OscillationError),
    #[error("invalid profile data: {0}")]
    InvalidData(String),
    #[error("missing data: {0}")]
    MissingData(String),
    #[error("H_{{j+1}} must be a nonzero constant, got {0}")]
    ZeroCurvatureConstant(f64),
    #[error("H_{{j+1}} must vanish identically, got {0}")]
    NonzeroCurvatureConstant(f64),
    #[error("S_j({t}) = {value} is not positive beyond R0/2")]
    NonPositiveSj { t: f64, value: f64 },
    #[error("need zero pair {index}, solution has {found} zeros")]
    TooFewZeros { index: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialMode {
    /// `A = (1/v_j) ∫_{∂B_t} (S_1 S_{j+1} - (j+2) S_{j+2})`.
    Exact,
    /// `A = C H_{j+1} v_1 / v_j`.
    LowerBound,
}

/// Where a set of radial data came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileSource {
    Synthetic,
    Geometric { name: String },
}

/// Radial data of a hypersurface, all as functions of the distance `t`
/// from a fixed point.
#[derive(Debug, Clone)]
pub struct GeometricProfileData {
    pub m: usize,
    pub j: usize,
    /// Value of `H_{j+1}` when it is constant.
    pub hj1: Option<f64>,
    /// `t ↦ ∫_{∂B_t} H_j`
    pub v_j: RadialMap,
    /// `t ↦ ∫_{∂B_t} H_1`
    pub v_1: RadialMap,
    /// `t ↦ ∫_{∂B_t} (S_1 S_{j+1} - (j+2) S_{j+2})`
    pub exact_potential: Option<RadialMap>,
    /// Radial `S_j`, needed only for the `K_j` smoothing.
    pub sj_radial: Option<RadialMap>,
    /// Smoothing radius of `K_j`.
    pub r0: Option<f64>,
    pub t_max: f64,
    pub source: ProfileSource,
    /// Principal curvatures at sample points, for the ellipticity check.
    pub samples: Option<Vec<PrincipalSpectrum>>,
}

impl GeometricProfileData {
    /// Synthetic data with constant `H_{j+1}` and no pointwise samples.
    pub fn synthetic(m: usize, j: usize, hj1: f64, v_j: RadialMap, v_1: RadialMap, t_max: f64) -> Self {
        Self {
            m,
            j,
            hj1: Some(hj1),
            v_j,
            v_1,
            exact_potential: None,
            sj_radial: None,
            r0: None,
            t_max,
            source: ProfileSource::Synthetic,
            samples: None,
        }
    }

    pub fn with_exact_potential(mut self, exact: RadialMap) -> Self {
        self.exact_potential = Some(exact);
        self
    }

    /// Checks dimensions and `v_j > 0`, `v_1 >= 0` on `(0, t_max]`.
    pub fn validate(&self) -> Result<(), StabilityError> {
        if self.m < 2 {
            return Err(CurvatureError::DimensionTooSmall(self.m).into());
        }
        if self.j + 2 > self.m {
            return Err(CurvatureError::IndexOutOfRange { j: self.j, lo: 0, hi: self.m - 2 }.into());
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(StabilityError::InvalidData(format!("t_max = {} must be positive", self.t_max)));
        }
        self.weight()?;
        for i in 1..=2000 {
            let t = self.t_max * i as f64 / 2000.0;
            let x = self.v_1.eval(t);
            if !(x >= 0.0) {
                return Err(StabilityError::InvalidData(format!("v_1({t}) = {x} must be nonnegative")));
            }
        }
        if let Some(r0) = self.r0 {
            if !(r0 > 0.0) {
                return Err(StabilityError::InvalidData(format!("R0 = {r0} must be positive")));
            }
        }
        Ok(())
    }

    /// `v_j` as the weight of the radial equation.
    pub fn weight(&self) -> Result<CoefficientProfile, StabilityError> {
        Ok(CoefficientProfile::new(self.v_j.clone(), self.t_max)?)
    }
}

/// The potential `A` of the radial equation in the requested mode.
pub fn potential_profile(
    data: &GeometricProfileData,
    mode: PotentialMode,
    constant_mode: crate::curvature::ConstantMode,
) -> Result<PotentialProfile, StabilityError> {
    data.validate()?;
    let map = match mode {
        PotentialMode::Exact => {
            let exact = data
                .exact_potential
                .as_ref()
                .ok_or_else(|| StabilityError::MissingData("exact potential integrand".into()))?;
            exact.ratio(&data.v_j)
        }
        PotentialMode::LowerBound => {
            let h = match data.hj1 {
                Some(h) if h > 0.0 => h,
                Some(h) => return Err(StabilityError::ZeroCurvatureConstant(h)),
                None => return Err(StabilityError::MissingData("constant H_{j+1}".into())),
            };
            data.v_1.ratio(&data.v_j).scaled(constant_mode.constant(data.m, data.j) * h)
        }
    };
    Ok(PotentialProfile::new(map, data.t_max)?)
}
