use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::{elementary_symmetric, CurvatureError, CurvatureVector, PrincipalSpectrum};

/// Newton tensors `P_0..P_m` of a shape operator, stored as full matrices.
#[derive(Debug, Clone)]
pub struct NewtonSequence {
    forms: Vec<DMatrix<f64>>,
    curvatures: CurvatureVector,
}

impl NewtonSequence {
    /// Newton tensors in the principal frame: `P_j = diag(S_j(A_i))`.
    pub fn from_spectrum(spectrum: &PrincipalSpectrum) -> Self {
        let m = spectrum.dim();
        let without: Vec<Vec<f64>> = (0..m).map(|i| spectrum.symmetric_without(i)).collect();
        let forms = (0..=m)
            .map(|j| {
                DMatrix::from_fn(m, m, |r, c| if r == c { without[r].get(j).copied().unwrap_or(0.0) } else { 0.0 })
            })
            .collect();
        Self { forms, curvatures: elementary_symmetric(spectrum) }
    }

    pub fn dim(&self) -> usize {
        self.forms.len() - 1
    }

    pub fn get(&self, j: usize) -> &DMatrix<f64> {
        &self.forms[j]
    }

    pub fn forms(&self) -> &[DMatrix<f64>] {
        &self.forms
    }

    pub fn curvatures(&self) -> &CurvatureVector {
        &self.curvatures
    }
}

fn validate_form(a: &DMatrix<f64>) -> Result<(), CurvatureError> {
    if a.nrows() != a.ncols() {
        return Err(CurvatureError::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    if a.nrows() < 2 {
        return Err(CurvatureError::DimensionTooSmall(a.nrows()));
    }
    let scale = a.amax().max(1.0);
    let asymmetry = (a - a.transpose()).amax();
    if asymmetry > 1e-12 * scale {
        return Err(CurvatureError::NotSymmetric { asymmetry });
    }
    Ok(())
}

/// Eigenpairs of a symmetric form. The QR-based solver can leave
/// residuals near 1e-9 on close eigenvalues, so its output is polished by
/// cyclic Jacobi sweeps on the nearly diagonal `Qᵀ A Q`.
fn eigen(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, PrincipalSpectrum), CurvatureError> {
    validate_form(a)?;
    let sym = 0.5 * (a + a.transpose());
    let m = sym.nrows();
    let mut q = SymmetricEigen::new(sym.clone()).eigenvectors;
    let mut b = q.transpose() * &sym * &q;
    let scale = sym.norm().max(f64::MIN_POSITIVE);
    for _ in 0..10 {
        let mut off = 0.0f64;
        for r in 0..m {
            for c in r + 1..m {
                off = off.max(b[(r, c)].abs());
            }
        }
        if off <= 1e-17 * scale {
            break;
        }
        for p_ in 0..m {
            for q_ in p_ + 1..m {
                let apq = b[(p_, q_)];
                if apq == 0.0 {
                    continue;
                }
                let tau = (b[(q_, q_)] - b[(p_, p_)]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                for k in 0..m {
                    let (x, y) = (b[(k, p_)], b[(k, q_)]);
                    b[(k, p_)] = cs * x - sn * y;
                    b[(k, q_)] = sn * x + cs * y;
                }
                for k in 0..m {
                    let (x, y) = (b[(p_, k)], b[(q_, k)]);
                    b[(p_, k)] = cs * x - sn * y;
                    b[(q_, k)] = sn * x + cs * y;
                }
                for k in 0..m {
                    let (x, y) = (q[(k, p_)], q[(k, q_)]);
                    q[(k, p_)] = cs * x - sn * y;
                    q[(k, q_)] = sn * x + cs * y;
                }
            }
        }
    }
    let spectrum = PrincipalSpectrum::new(b.diagonal().iter().copied().collect())?;
    Ok((q, spectrum))
}

/// Newton tensors by the matrix recursion `P_0 = I`, `P_j = S_j I - A P_{j-1}`,
/// with `S_j` taken from the eigenvalues of `A`.
pub fn newton_sequence(a: &DMatrix<f64>) -> Result<NewtonSequence, CurvatureError> {
    let (_, spectrum) = eigen(a)?;
    let m = a.nrows();
    let curvatures = elementary_symmetric(&spectrum);
    let identity = DMatrix::<f64>::identity(m, m);
    let mut forms = Vec::with_capacity(m + 1);
    forms.push(identity.clone());
    for j in 1..=m {
        let next = &identity * curvatures.s(j) - a * &forms[j - 1];
        forms.push(next);
    }
    Ok(NewtonSequence { forms, curvatures })
}

/// Residuals of the five algebraic identities satisfied by `P_j`, each
/// paired with the magnitude of the largest term it involves.
#[derive(Debug, Clone, Serialize)]
pub struct TraceIdentityReport {
    pub m: usize,
    pub j: usize,
    /// `||A P_j - P_j A||`
    pub commutator: f64,
    /// `max_i ||P_j e_i - S_j(A_i) e_i||`
    pub eigen_residual: f64,
    /// `|Tr P_j - (m-j) S_j|`
    pub trace: f64,
    /// `|Tr A P_j - (j+1) S_{j+1}|`
    pub trace_a: f64,
    /// `|Tr A^2 P_j - (S_1 S_{j+1} - (j+2) S_{j+2})|`
    pub trace_a2: f64,
    pub scales: [f64; 5],
    pub tr_p: f64,
    pub tr_ap: f64,
    pub tr_a2p: f64,
}

impl TraceIdentityReport {
    pub fn residuals(&self) -> [f64; 5] {
        [self.commutator, self.eigen_residual, self.trace, self.trace_a, self.trace_a2]
    }

    pub fn relative(&self) -> [f64; 5] {
        let r = self.residuals();
        std::array::from_fn(|i| if self.scales[i] > 0.0 { r[i] / self.scales[i] } else { r[i] })
    }

    pub fn max_relative(&self) -> f64 {
        self.relative().into_iter().fold(0.0, f64::max)
    }
}

/// Evaluates the commutation, eigenvector and three trace identities of
/// `P_j` for `1 <= j <= m-1`.
pub fn trace_identities(a: &DMatrix<f64>, j: usize) -> Result<TraceIdentityReport, CurvatureError> {
    let (eig, spectrum) = eigen(a)?;
    let m = a.nrows();
    if j < 1 || j > m - 1 {
        return Err(CurvatureError::IndexOutOfRange { j, lo: 1, hi: m - 1 });
    }
    let seq = newton_sequence(a)?;
    let c = seq.curvatures();
    let p = seq.get(j);
    let ap = a * p;
    let a2p = a * &ap;
    let norm_a = spectrum.max_abs();

    let commutator = (&ap - p * a).norm();
    let mut eigen_residual: f64 = 0.0;
    let mut eigen_scale: f64 = c.s_abs(j);
    for i in 0..m {
        let e = eig.column(i);
        let target = spectrum.symmetric_without(i)[j];
        eigen_residual = eigen_residual.max((p * e - e * target).norm());
        eigen_scale = eigen_scale.max(target.abs());
    }

    let tr_p = p.trace();
    let tr_ap = ap.trace();
    let tr_a2p = a2p.trace();
    let jf = j as f64;
    let scales = [
        (a.norm() * p.norm()).max(norm_a * c.s_abs(j)),
        eigen_scale,
        // a computed trace Σ X_ik Y_ki is only as exact as |X|·|Y| allows
        ((m - j) as f64 * c.s_abs(j)).max((m as f64).sqrt() * p.norm()),
        ((jf + 1.0) * c.s_abs(j + 1)).max(a.norm() * p.norm()),
        (c.s_abs(1) * c.s_abs(j + 1) + (jf + 2.0) * c.s_abs(j + 2)).max((a * a).norm() * p.norm()),
    ];
    Ok(TraceIdentityReport {
        m,
        j,
        commutator,
        eigen_residual,
        trace: (tr_p - (m - j) as f64 * c.s(j)).abs(),
        trace_a: (tr_ap - (jf + 1.0) * c.s(j + 1)).abs(),
        trace_a2: (tr_a2p - (c.s(1) * c.s(j + 1) - (jf + 2.0) * c.s(j + 2))).abs(),
        scales,
        tr_p,
        tr_ap,
        tr_a2p,
    })
}
