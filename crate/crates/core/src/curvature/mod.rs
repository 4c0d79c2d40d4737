//! Elementary symmetric functions of principal curvatures, normalized
//! mean curvatures, Newton tensors and the inequalities relating them.

mod ellipticity;
mod newton;
pub mod sampling;

pub use ellipticity::{ellipticity_certificate, EllipticityMode, EllipticityOptions, EllipticityVerdict};
pub use newton::{newton_sequence, trace_identities, NewtonSequence, TraceIdentityReport};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest pairwise curvature difference still treated as umbilical.
pub const UMBILIC_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurvatureError {
    #[error("dimension {0} is too small, need m >= 2")]
    DimensionTooSmall(usize),
    #[error("principal curvature k[{index}] = {value} is not finite")]
    NonFinite { index: usize, value: f64 },
    #[error("shape operator is {rows}x{cols}, expected a square form")]
    NotSquare { rows: usize, cols: usize },
    #[error("shape operator is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("index j = {j} outside the admissible range {lo}..={hi}")]
    IndexOutOfRange { j: usize, lo: usize, hi: usize },
    #[error("curvature k[{index}] = {value} is not positive")]
    NonPositiveCurvature { index: usize, value: f64 },
    #[error("no curvature samples supplied")]
    EmptySamples,
    #[error("sample {index} has dimension {found}, expected {expected}")]
    InconsistentDimensions { index: usize, expected: usize, found: usize },
}

/// Which constant to use in the lower bound for the Jacobi potential.
///
/// `Paper` is `(j+1) C(m+1, j+2)`; `Corrected` is `(j+1) C(m, j+1)`, the
/// constant obtained from `H_{j+2} <= H_1 H_{j+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstantMode {
    Paper,
    #[default]
    Corrected,
}

impl ConstantMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstantMode::Paper => "paper",
            ConstantMode::Corrected => "corrected",
        }
    }

    /// The constant `C` in `S_1 S_{j+1} - (j+2) S_{j+2} >= C H_1 H_{j+1}`.
    pub fn constant(self, m: usize, j: usize) -> f64 {
        match self {
            ConstantMode::Paper => (j + 1) as f64 * binomial(m + 1, j + 2),
            ConstantMode::Corrected => (j + 1) as f64 * binomial(m, j + 1),
        }
    }
}

/// Binomial coefficient as a float; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Coefficients of `prod_i (1 + k_i x)`, i.e. `e_0..e_n` of the values.
pub fn elementary_symmetric_values(values: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; values.len() + 1];
    e[0] = 1.0;
    for (i, &k) in values.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            e[j] += k * e[j - 1];
        }
    }
    e
}

/// The `m` principal curvatures at a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalSpectrum {
    k: Vec<f64>,
}

impl PrincipalSpectrum {
    pub fn new(k: Vec<f64>) -> Result<Self, CurvatureError> {
        if k.len() < 2 {
            return Err(CurvatureError::DimensionTooSmall(k.len()));
        }
        if let Some((index, &value)) = k.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(CurvatureError::NonFinite { index, value });
        }
        Ok(Self { k })
    }

    /// Umbilical spectrum `(c, ..., c)` of dimension `m`.
    pub fn umbilical(m: usize, c: f64) -> Result<Self, CurvatureError> {
        Self::new(vec![c; m])
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.k
    }

    /// Spectrum in the opposite orientation.
    pub fn flipped(&self) -> Self {
        Self { k: self.k.iter().map(|v| -v).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.k.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    pub fn spread(&self) -> f64 {
        let lo = self.k.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.k.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }

    pub fn is_umbilical(&self) -> bool {
        self.spread() <= UMBILIC_TOL
    }

    /// Number of curvatures with `|k_i| > rank_tol * max|k|`.
    pub fn rank(&self, rank_tol: f64) -> usize {
        let cutoff = rank_tol * self.max_abs();
        self.k.iter().filter(|v| v.abs() > cutoff && **v != 0.0).count()
    }

    /// `S_j(A_i)`: the symmetric function of the spectrum with `k_i` removed.
    pub fn symmetric_without(&self, i: usize) -> Vec<f64> {
        let rest: Vec<f64> = self.k.iter().enumerate().filter(|(l, _)| *l != i).map(|(_, v)| *v).collect();
        elementary_symmetric_values(&rest)
    }
}

/// `S_0..S_m` and `H_0..H_m` with `C(m, j) H_j = S_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureVector {
    s: Vec<f64>,
    h: Vec<f64>,
    /// Elementary symmetric functions of `|k_i|`, the magnitude of the
    /// largest term sum behind each `S_j`.
    #[serde(skip)]
    s_abs: Vec<f64>,
}

impl CurvatureVector {
    pub fn dim(&self) -> usize {
        self.s.len() - 1
    }

    /// `S_j`, zero for `j > m`.
    pub fn s(&self, j: usize) -> f64 {
        self.s.get(j).copied().unwrap_or(0.0)
    }

    /// `H_j`, zero for `j > m`.
    pub fn h(&self, j: usize) -> f64 {
        self.h.get(j).copied().unwrap_or(0.0)
    }

    pub fn s_all(&self) -> &[f64] {
        &self.s
    }

    pub fn h_all(&self) -> &[f64] {
        &self.h
    }

    pub(crate) fn s_abs(&self, j: usize) -> f64 {
        self.s_abs.get(j).copied().unwrap_or(0.0)
    }

    /// `|S_2 - scal/2|`, the Gauss-equation cross check.
    pub fn scalar_curvature_residual(&self, scal: f64) -> f64 {
        (self.s(2) - 0.5 * scal).abs()
    }
}

/// All `S_j` and `H_j` of a spectrum, by expanding `prod (1 + k_i x)`.
pub fn elementary_symmetric(spectrum: &PrincipalSpectrum) -> CurvatureVector {
    let m = spectrum.dim();
    let s = elementary_symmetric_values(spectrum.values());
    let abs: Vec<f64> = spectrum.values().iter().map(|v| v.abs()).collect();
    let s_abs = elementary_symmetric_values(&abs);
    let h = s.iter().enumerate().map(|(j, sj)| sj / binomial(m, j)).collect();
    CurvatureVector { s, h, s_abs }
}

fn check_index(j: usize, lo: usize, hi: usize) -> Result<(), CurvatureError> {
    if j < lo || j > hi {
        Err(CurvatureError::IndexOutOfRange { j, lo, hi })
    } else {
        Ok(())
    }
}

/// `H_j^2 - H_{j-1} H_{j+1}` for `1 <= j <= m-1`.
pub fn newton_inequality_gap(spectrum: &PrincipalSpectrum, j: usize) -> Result<f64, CurvatureError> {
    let m = spectrum.dim();
    check_index(j, 1, m - 1)?;
    let c = elementary_symmetric(spectrum);
    Ok(c.h(j) * c.h(j) - c.h(j - 1) * c.h(j + 1))
}

/// Potential of the Jacobi operator `T_j`: `S_1 S_{j+1} - (j+2) S_{j+2}`.
pub fn jacobi_potential(spectrum: &PrincipalSpectrum, j: usize) -> Result<f64, CurvatureError> {
    let m = spectrum.dim();
    check_index(j, 0, m - 2)?;
    Ok(jacobi_potential_of(&elementary_symmetric(spectrum), j))
}

/// Same as [`jacobi_potential`] on precomputed curvatures; `S_{m+1}` is zero.
pub fn jacobi_potential_of(c: &CurvatureVector, j: usize) -> f64 {
    c.s(1) * c.s(j + 1) - (j + 2) as f64 * c.s(j + 2)
}

/// Lower bound `C H_1 H_{j+1}` for the Jacobi potential at a point with
/// positive curvatures.
pub fn potential_lower_bound(
    spectrum: &PrincipalSpectrum,
    j: usize,
    mode: ConstantMode,
) -> Result<f64, CurvatureError> {
    let m = spectrum.dim();
    check_index(j, 0, m - 2)?;
    if let Some((index, &value)) = spectrum.values().iter().enumerate().find(|(_, v)| **v <= 0.0) {
        return Err(CurvatureError::NonPositiveCurvature { index, value });
    }
    let c = elementary_symmetric(spectrum);
    Ok(mode.constant(m, j) * c.h(1) * c.h(j + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kappa(k: &[f64]) -> PrincipalSpectrum {
        PrincipalSpectrum::new(k.to_vec()).unwrap()
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 3), 4.0);
        assert_eq!(binomial(10, 5), 252.0);
        assert_eq!(binomial(3, 4), 0.0);
        assert_eq!(binomial(0, 0), 1.0);
    }

    #[test]
    fn unit_sphere_symmetric_functions() {
        let c = elementary_symmetric(&kappa(&[1.0, 1.0, 1.0]));
        assert_eq!(c.s_all(), &[1.0, 3.0, 3.0, 1.0]);
        assert_eq!(c.h_all(), &[1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn one_two_three() {
        let c = elementary_symmetric(&kappa(&[1.0, 2.0, 3.0]));
        assert_eq!(c.s_all(), &[1.0, 6.0, 11.0, 6.0]);
        assert_eq!(c.h(0), 1.0);
        assert_eq!(c.h(1), 2.0);
        assert!((c.h(2) - 11.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.h(3), 6.0);
        // integer inputs are reproduced exactly
        assert_eq!(c.s(4), 0.0);
    }

    #[test]
    fn umbilical_mean_curvatures_are_powers() {
        for m in 2..8 {
            let c = elementary_symmetric(&PrincipalSpectrum::umbilical(m, 0.7).unwrap());
            for j in 0..=m {
                assert!((c.h(j) - 0.7f64.powi(j as i32)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn scalar_curvature_relation() {
        // scal = 2 S_2 for a hypersurface of Euclidean space
        let c = elementary_symmetric(&kappa(&[1.0, 2.0, 3.0]));
        assert_eq!(c.scalar_curvature_residual(22.0), 0.0);
    }

    #[test]
    fn spectrum_validation() {
        assert_eq!(PrincipalSpectrum::new(vec![1.0]), Err(CurvatureError::DimensionTooSmall(1)));
        assert!(matches!(PrincipalSpectrum::new(vec![1.0, f64::NAN]), Err(CurvatureError::NonFinite { index: 1, .. })));
    }

    #[test]
    fn newton_gaps() {
        let k = kappa(&[1.0, 2.0, 3.0]);
        assert!((newton_inequality_gap(&k, 1).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!((newton_inequality_gap(&k, 2).unwrap() - 13.0 / 9.0).abs() < 1e-13);
        let u = kappa(&[0.4, 0.4, 0.4]);
        for j in 1..3 {
            assert!(newton_inequality_gap(&u, j).unwrap().abs() < 1e-15);
        }
        assert!(matches!(newton_inequality_gap(&k, 3), Err(CurvatureError::IndexOutOfRange { .. })));
        assert!(matches!(newton_inequality_gap(&k, 0), Err(CurvatureError::IndexOutOfRange { .. })));
    }

    #[test]
    fn jacobi_potential_examples() {
        assert_eq!(jacobi_potential(&kappa(&[1.0, 2.0, 3.0]), 1).unwrap(), 48.0);
        assert_eq!(jacobi_potential(&kappa(&[1.0, 1.0, 1.0]), 1).unwrap(), 6.0);
        // minimal point: potential is |A|^2
        assert_eq!(jacobi_potential(&kappa(&[1.0, -1.0]), 0).unwrap(), 2.0);
        assert!(jacobi_potential(&kappa(&[1.0, 2.0, 3.0]), 2).is_err());
    }

    #[test]
    fn lower_bound_constants() {
        let k = kappa(&[1.0, 2.0, 3.0]);
        let corrected = potential_lower_bound(&k, 1, ConstantMode::Corrected).unwrap();
        assert!((corrected - 44.0).abs() < 1e-12);
        let paper = potential_lower_bound(&k, 1, ConstantMode::Paper).unwrap();
        assert!((paper - 176.0 / 3.0).abs() < 1e-12);
        assert!(paper > jacobi_potential(&k, 1).unwrap());

        let u = kappa(&[1.0, 1.0, 1.0]);
        assert_eq!(potential_lower_bound(&u, 1, ConstantMode::Corrected).unwrap(), 6.0);
        assert_eq!(potential_lower_bound(&u, 1, ConstantMode::Paper).unwrap(), 8.0);

        assert!(matches!(
            potential_lower_bound(&kappa(&[1.0, 0.0, 2.0]), 0, ConstantMode::Corrected),
            Err(CurvatureError::NonPositiveCurvature { index: 1, .. })
        ));
    }

    #[test]
    fn orientation_flip_parity() {
        let k = kappa(&[0.3, -1.2, 2.5, 0.9]);
        let a = elementary_symmetric(&k);
        let b = elementary_symmetric(&k.flipped());
        for j in 0..=4 {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            assert!((b.h(j) - sign * a.h(j)).abs() < 1e-14);
        }
    }

    #[test]
    fn rank_counts_nonzero_curvatures() {
        assert_eq!(kappa(&[1.0, 0.0, 0.0]).rank(1e-8), 1);
        assert_eq!(kappa(&[1.0, -1.0]).rank(1e-8), 2);
        assert_eq!(kappa(&[1.0, 1e-12, 3.0]).rank(1e-8), 2);
        assert_eq!(kappa(&[0.0, 0.0]).rank(1e-8), 0);
    }
}
