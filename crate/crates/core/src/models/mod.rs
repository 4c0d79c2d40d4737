//! Rotation hypersurfaces `f(s, Θ) = (ρ(s) Θ, h(s))` in `R^{m+1}` with an
//! arclength profile, their principal curvatures, Gauss map and support
//! function, and probes of the geometric conclusions.

mod jacobi;
mod probes;
mod profile;
mod radial;

pub use jacobi::{jacobi_identity_check, JacobiIdentity, JacobiResidual};
pub use probes::{
    equator_crossings, tangent_envelope_probe, Coverage, CrossingSample, EnvelopeProbe, EnvelopeWitness,
    EquatorCrossings,
};
pub use profile::{ProfileCurve, ProfileKind, SampledProfile, ARCLENGTH_TOL};
pub use radial::{radial_data, sphere_volume, RadialOptions};

use thiserror::Error;

use crate::curvature::{CurvatureError, PrincipalSpectrum};
use crate::stability::StabilityError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("arclength {s} outside the profile range [{lo}, {hi}]")]
    OutOfRange { s: f64, lo: f64, hi: f64 },
    #[error("vector has length {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("direction must be a unit vector, |Θ| = {norm}")]
    NotUnit { norm: f64 },
    #[error("the reference vector is zero")]
    ZeroVector,
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("arclength identity fails at s = {s}: |ρ'² + h'² - 1| = {residual:e}")]
    NotArclength { s: f64, residual: f64 },
    #[error("abscissa {s} at row {row} breaks the uniform increasing grid")]
    NonUniformGrid { row: usize, s: f64 },
    #[error("profile has no pole at s = {s} (ρ = {rho}) and no pole chart was asserted")]
    NoPole { s: f64, rho: f64 },
    #[error("asserted pole chart fails: ρ'({s}) = {drho} is not positive")]
    PoleChartRejected { s: f64, drho: f64 },
    #[error("finite-difference stencil [{lo}, {hi}] leaves the profile range")]
    StencilOutOfRange { lo: f64, hi: f64 },
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
}

/// A rotation hypersurface of dimension `m`; `flipped` reverses the normal.
#[derive(Debug, Clone)]
pub struct RotationHypersurface {
    pub m: usize,
    pub profile: ProfileCurve,
    pub flipped: bool,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl RotationHypersurface {
    pub fn new(m: usize, profile: ProfileCurve) -> Result<Self, ModelError> {
        if m < 2 {
            return Err(CurvatureError::DimensionTooSmall(m).into());
        }
        profile.check_arclength()?;
        Ok(Self { m, profile, flipped: false })
    }

    pub fn cylinder(m: usize, radius: f64, s_range: (f64, f64)) -> Result<Self, ModelError> {
        Self::new(m, ProfileCurve::cylinder(radius, s_range)?)
    }

    pub fn catenoid(m: usize, s_range: (f64, f64)) -> Result<Self, ModelError> {
        Self::new(m, ProfileCurve::catenoid(s_range)?)
    }

    pub fn sphere_profile(m: usize, s_range: (f64, f64)) -> Result<Self, ModelError> {
        Self::new(m, ProfileCurve::sphere(s_range)?)
    }

    pub fn with_flip(mut self, flipped: bool) -> Self {
        self.flipped = flipped;
        self
    }

    /// `+1` for the default normal, `-1` when flipped.
    pub fn sign(&self) -> f64 {
        if self.flipped {
            -1.0
        } else {
            1.0
        }
    }

    fn check_theta(&self, theta: &[f64]) -> Result<(), ModelError> {
        if theta.len() != self.m {
            return Err(ModelError::DimensionMismatch { expected: self.m, found: theta.len() });
        }
        let n = norm(theta);
        if (n - 1.0).abs() > 1e-10 {
            return Err(ModelError::NotUnit { norm: n });
        }
        Ok(())
    }

    pub(crate) fn check_ambient(&self, a: &[f64]) -> Result<(), ModelError> {
        if a.len() != self.m + 1 {
            return Err(ModelError::DimensionMismatch { expected: self.m + 1, found: a.len() });
        }
        Ok(())
    }

    /// Meridian curvature `ρ'h'' - h'ρ''`, then the parallel curvature
    /// `h'/ρ` with multiplicity `m - 1`.
    pub fn principal_curvatures(&self, s: f64) -> Result<PrincipalSpectrum, ModelError> {
        let p = self.profile.jet(s)?;
        if p.rho <= 0.0 {
            return Err(ModelError::InvalidProfile(format!("ρ({s}) = {} has no parallel curvature", p.rho)));
        }
        let sg = self.sign();
        let meridian = sg * (p.drho * p.d2h - p.dh * p.d2rho);
        let parallel = sg * p.dh / p.rho;
        let mut k = vec![parallel; self.m];
        k[0] = meridian;
        Ok(PrincipalSpectrum::new(k)?)
    }

    /// `f(s, Θ) = (ρ Θ, h)`.
    pub fn point(&self, s: f64, theta: &[f64]) -> Result<Vec<f64>, ModelError> {
        self.check_theta(theta)?;
        let p = self.profile.jet(s)?;
        let mut x: Vec<f64> = theta.iter().map(|t| p.rho * t).collect();
        x.push(p.h);
        Ok(x)
    }

    /// Unit tangent along the meridian, `(ρ' Θ, h')`.
    pub fn meridian_tangent(&self, s: f64, theta: &[f64]) -> Result<Vec<f64>, ModelError> {
        self.check_theta(theta)?;
        let p = self.profile.jet(s)?;
        let mut x: Vec<f64> = theta.iter().map(|t| p.drho * t).collect();
        x.push(p.dh);
        Ok(x)
    }

    /// `ν(s, Θ) = ±(-h' Θ, ρ')`.
    pub fn gauss_map(&self, s: f64, theta: &[f64]) -> Result<Vec<f64>, ModelError> {
        self.check_theta(theta)?;
        let p = self.profile.jet(s)?;
        let sg = self.sign();
        let mut nu: Vec<f64> = theta.iter().map(|t| -sg * p.dh * t).collect();
        nu.push(sg * p.drho);
        Ok(nu)
    }

    /// `⟨f, ν⟩`, which does not depend on `Θ`.
    pub fn support_function(&self, s: f64, theta: &[f64]) -> Result<f64, ModelError> {
        Ok(dot(&self.point(s, theta)?, &self.gauss_map(s, theta)?))
    }

    /// Closed form `±(-ρ h' + h ρ')` of the support function.
    pub fn support_radial(&self, s: f64) -> Result<f64, ModelError> {
        let p = self.profile.jet(s)?;
        Ok(self.sign() * (-p.rho * p.dh + p.h * p.drho))
    }
}

/// Some unit vector orthogonal to the unit vector `u` (`u.len() >= 2`).
pub(crate) fn orthogonal_unit(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let k = (0..n).min_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs())).unwrap_or(0);
    let mut e = vec![0.0; n];
    e[k] = 1.0;
    let c = dot(&e, u);
    for i in 0..n {
        e[i] -= c * u[i];
    }
    let ne = norm(&e);
    e.iter().map(|x| x / ne).collect()
}
