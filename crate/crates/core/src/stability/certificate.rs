use serde::Serialize;

use super::StabilityError;
use crate::oscillation::{CauchySolution, CoefficientProfile, PotentialProfile};
use crate::quadrature::integrate;

/// `|Q|` must stay below this multiple of the energy.
pub const CERTIFICATE_TOL: f64 = 1e-8;

/// Rayleigh numerator of the test function equal to `z` between two
/// consecutive zeros and zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RayleighCertificate {
    pub pair_index: usize,
    pub t1: f64,
    pub t2: f64,
    /// `(m-j) ∫ ((z')² - A z²) v`
    pub q: f64,
    /// `∫ z² v`
    pub psi_scale: f64,
    /// `(m-j) ∫ ((z')² + A z²) v`
    pub energy: f64,
    pub lambda_bound: f64,
    pub relative: f64,
    pub passes: bool,
}

/// Integrates over `[a, b]` one solver step at a time so that every
/// panel sees a smooth piece of the dense output.
fn stepwise<F: Fn(f64) -> f64>(sol: &CauchySolution, f: F, a: f64, b: f64) -> f64 {
    let grid = sol.grid();
    let mut cuts = vec![a];
    cuts.extend(grid.iter().copied().filter(|&t| t > a && t < b));
    cuts.push(b);
    cuts.windows(2).map(|w| integrate(&f, w[0], w[1], 1e-13, 0.0).value).sum()
}

/// Certificate for the zero pair `(zeros[i], zeros[i + 1])`.
pub fn rayleigh_certificate(
    v: &CoefficientProfile,
    a: &PotentialProfile,
    sol: &CauchySolution,
    factor: f64,
    pair_index: usize,
) -> Result<RayleighCertificate, StabilityError> {
    let zeros = sol.zeros();
    if pair_index + 1 >= zeros.len() {
        return Err(StabilityError::TooFewZeros { index: pair_index, found: zeros.len() });
    }
    let (t1, t2) = (zeros[pair_index], zeros[pair_index + 1]);
    // z' = w / v on the solution
    let kinetic = stepwise(sol, |t| sol.eval_w(t).powi(2) / v.eval(t), t1, t2);
    let potential = stepwise(sol, |t| a.eval(t) * v.eval(t) * sol.eval_z(t).powi(2), t1, t2);
    let psi_scale = stepwise(sol, |t| v.eval(t) * sol.eval_z(t).powi(2), t1, t2);
    let q = factor * (kinetic - potential);
    let energy = factor * (kinetic + potential);
    let relative = if energy > 0.0 { q.abs() / energy } else { q.abs() };
    Ok(RayleighCertificate {
        pair_index,
        t1,
        t2,
        q,
        psi_scale,
        energy,
        lambda_bound: q / psi_scale,
        relative,
        passes: q.abs() <= CERTIFICATE_TOL * energy,
    })
}

/// Certificates for every consecutive zero pair starting at or beyond `radius`.
pub fn rayleigh_certificates(
    v: &CoefficientProfile,
    a: &PotentialProfile,
    sol: &CauchySolution,
    factor: f64,
    radius: f64,
) -> Result<Vec<RayleighCertificate>, StabilityError> {
    let zeros = sol.zeros();
    (0..zeros.len().saturating_sub(1))
        .filter(|&i| zeros[i] >= radius)
        .map(|i| rayleigh_certificate(v, a, sol, factor, i))
        .collect()
}
