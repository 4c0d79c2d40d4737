use serde::{Deserialize, Serialize};

use super::{elementary_symmetric, CurvatureError, PrincipalSpectrum};

/// Which sufficient condition for ellipticity of `L_1..L_j` is checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EllipticityMode {
    /// Some point has a definite second fundamental form and `S_{j+1}`
    /// never vanishes.
    EllipticPoint,
    /// `S_{j+1}` vanishes identically and `rank(A) > j` everywhere.
    NullSj1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticityOptions {
    /// `|S_{j+1}|` below this multiple of its term magnitude counts as zero.
    pub zero_tol: f64,
    /// Relative eigenvalue cutoff for the rank count.
    pub rank_tol: f64,
}

impl Default for EllipticityOptions {
    fn default() -> Self {
        Self { zero_tol: 1e-10, rank_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllipticityVerdict {
    pub mode: EllipticityMode,
    pub j: usize,
    pub positive: bool,
    /// The mode's own hypotheses (definite point / vanishing `S_{j+1}` and rank).
    pub hypotheses_hold: bool,
    /// `P_1..P_j` positive definite on every sample.
    pub tensors_definite: bool,
    /// `H_1..H_j > 0` on every sample.
    pub mean_curvatures_positive: bool,
    /// Samples were evaluated in the opposite orientation.
    pub orientation_flipped: bool,
    pub failures: Vec<String>,
}

fn s_is_zero(spectrum: &PrincipalSpectrum, idx: usize, tol: f64) -> bool {
    let c = elementary_symmetric(spectrum);
    c.s(idx).abs() <= tol * c.s_abs(idx)
}

/// Checks the hypotheses under which `L_i` is elliptic for `1 <= i <= j`,
/// together with the consequences (positive Newton tensors, positive
/// `H_1..H_j`) on every sample.
pub fn ellipticity_certificate(
    samples: &[PrincipalSpectrum],
    j: usize,
    mode: EllipticityMode,
    opts: EllipticityOptions,
) -> Result<EllipticityVerdict, CurvatureError> {
    let first = samples.first().ok_or(CurvatureError::EmptySamples)?;
    let m = first.dim();
    for (index, s) in samples.iter().enumerate() {
        if s.dim() != m {
            return Err(CurvatureError::InconsistentDimensions { index, expected: m, found: s.dim() });
        }
    }
    if j > m - 1 {
        return Err(CurvatureError::IndexOutOfRange { j, lo: 0, hi: m - 1 });
    }

    let mut failures = Vec::new();
    let (hypotheses_hold, flip) = match mode {
        EllipticityMode::EllipticPoint => {
            let definite =
                samples.iter().find(|s| s.values().iter().all(|&k| k > 0.0) || s.values().iter().all(|&k| k < 0.0));
            let zero_at = samples.iter().position(|s| s_is_zero(s, j + 1, opts.zero_tol));
            if definite.is_none() {
                failures.push("no sample has a definite second fundamental form".to_string());
            }
            if let Some(i) = zero_at {
                failures.push(format!("S_{} vanishes at sample {i}", j + 1));
            }
            let flip = definite.map(|s| s.values()[0] < 0.0).unwrap_or(false);
            (definite.is_some() && zero_at.is_none(), flip)
        }
        EllipticityMode::NullSj1 => {
            let mut ok = true;
            for (i, s) in samples.iter().enumerate() {
                if !s_is_zero(s, j + 1, opts.zero_tol) {
                    failures.push(format!("S_{} is nonzero at sample {i}", j + 1));
                    ok = false;
                    break;
                }
                let rank = s.rank(opts.rank_tol);
                if rank <= j {
                    failures.push(format!("rank(A) = {rank} <= j = {j} at sample {i}"));
                    ok = false;
                    break;
                }
            }
            let flip = j >= 1 && elementary_symmetric(first).s(1) < 0.0;
            (ok, flip)
        }
    };

    let mut tensors_definite = true;
    let mut mean_curvatures_positive = true;
    for (idx, raw) in samples.iter().enumerate() {
        let s = if flip { raw.flipped() } else { raw.clone() };
        let c = elementary_symmetric(&s);
        for i in 1..=j {
            if c.h(i) <= 0.0 && mean_curvatures_positive {
                failures.push(format!("H_{i} = {} is not positive at sample {idx}", c.h(i)));
                mean_curvatures_positive = false;
            }
        }
        let without: Vec<Vec<f64>> = (0..m).map(|l| s.symmetric_without(l)).collect();
        for i in 1..=j {
            if let Some(w) = without.iter().find(|w| w[i] <= 0.0) {
                if tensors_definite {
                    failures.push(format!("P_{i} has eigenvalue {} <= 0 at sample {idx}", w[i]));
                }
                tensors_definite = false;
            }
        }
    }

    Ok(EllipticityVerdict {
        mode,
        j,
        positive: hypotheses_hold && tensors_definite && mean_curvatures_positive,
        hypotheses_hold,
        tensors_definite,
        mean_curvatures_positive,
        orientation_flipped: flip,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kappa(k: &[f64]) -> PrincipalSpectrum {
        PrincipalSpectrum::new(k.to_vec()).unwrap()
    }

    #[test]
    fn elliptic_point_positive() {
        let v =
            ellipticity_certificate(&[kappa(&[1.0, 2.0, 3.0])], 1, EllipticityMode::EllipticPoint, Default::default())
                .unwrap();
        assert!(v.positive, "{v:?}");
        assert!(v.tensors_definite);
    }

    #[test]
    fn negative_definite_point_is_reoriented() {
        let v = ellipticity_certificate(
            &[kappa(&[-1.0, -2.0, -3.0]), kappa(&[-0.5, -0.1, -2.0])],
            1,
            EllipticityMode::EllipticPoint,
            Default::default(),
        )
        .unwrap();
        assert!(v.positive);
        assert!(v.orientation_flipped);
    }

    #[test]
    fn minimal_point_null_mode() {
        let v =
            ellipticity_certificate(&[kappa(&[1.0, -1.0])], 0, EllipticityMode::NullSj1, Default::default()).unwrap();
        assert!(v.positive);
    }

    #[test]
    fn rank_failure() {
        let v = ellipticity_certificate(&[kappa(&[1.0, 0.0, 0.0])], 1, EllipticityMode::NullSj1, Default::default())
            .unwrap();
        assert!(!v.positive);
        assert!(!v.hypotheses_hold);
    }

    #[test]
    fn vanishing_s_blocks_elliptic_mode() {
        let v = ellipticity_certificate(
            &[kappa(&[1.0, 2.0, 3.0]), kappa(&[1.0, -1.0, 0.5])],
            0,
            EllipticityMode::EllipticPoint,
            Default::default(),
        )
        .unwrap();
        // S_1 = 0.5 at the second sample, fine; now force S_1 = 0
        assert!(v.hypotheses_hold);
        let v = ellipticity_certificate(
            &[kappa(&[1.0, 2.0, 3.0]), kappa(&[1.0, -1.0, 0.0])],
            0,
            EllipticityMode::EllipticPoint,
            Default::default(),
        )
        .unwrap();
        assert!(!v.hypotheses_hold);
    }

    #[test]
    fn errors() {
        assert_eq!(
            ellipticity_certificate(&[], 0, EllipticityMode::NullSj1, Default::default()),
            Err(CurvatureError::EmptySamples)
        );
        assert!(matches!(
            ellipticity_certificate(
                &[kappa(&[1.0, 1.0]), kappa(&[1.0, 1.0, 1.0])],
                0,
                EllipticityMode::NullSj1,
                Default::default()
            ),
            Err(CurvatureError::InconsistentDimensions { index: 1, expected: 2, found: 3 })
        ));
    }
}
