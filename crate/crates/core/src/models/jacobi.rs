use serde::Serialize;

use super::{dot, ModelError, RotationHypersurface};
use crate::curvature::{binomial, elementary_symmetric, jacobi_potential_of};

/// Which of the two identities for `L_j` is evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JacobiIdentity {
    /// `L_j ⟨a,ν⟩ = -(S_1 S_{j+1} - (j+2) S_{j+2}) ⟨a,ν⟩ - ⟨∇S_{j+1}, a⟩`
    GaussMap { a: Vec<f64> },
    /// `L_j ⟨f,ν⟩ = -(j+1) S_{j+1} - (S_1 S_{j+1} - (j+2) S_{j+2}) ⟨f,ν⟩ - ⟨∇S_{j+1}, f⟩`
    Support,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobiResidual {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Sum of the magnitudes of the terms on both sides.
    pub scale: f64,
}

/// Default finite-difference step in arclength and angle.
const STEP: f64 = 1e-3;

fn d1(f: &dyn Fn(f64) -> Result<f64, ModelError>, x: f64, h: f64) -> Result<f64, ModelError> {
    Ok((f(x - 2.0 * h)? - 8.0 * f(x - h)? + 8.0 * f(x + h)? - f(x + 2.0 * h)?) / (12.0 * h))
}

fn d2(f: &dyn Fn(f64) -> Result<f64, ModelError>, x: f64, h: f64) -> Result<f64, ModelError> {
    Ok((-f(x - 2.0 * h)? + 16.0 * f(x - h)? - 30.0 * f(x)? + 16.0 * f(x + h)? - f(x + 2.0 * h)?) / (12.0 * h * h))
}

/// Evaluates both sides of an identity for `L_j = div(P_j ∇·)` at
/// `(s, Θ)`. In rotational coordinates
/// `L_j u = ρ^{1-m} ∂_s(ρ^{m-1} λ_s ∂_s u) + λ_p ρ^{-2} Δ_{S^{m-1}} u`,
/// where `λ_s`, `λ_p` are the eigenvalues of `P_j` on the meridian and the
/// parallels; the derivatives are fourth-order differences.
pub fn jacobi_identity_check(
    surface: &RotationHypersurface,
    identity: &JacobiIdentity,
    s: f64,
    theta: &[f64],
    j: usize,
) -> Result<JacobiResidual, ModelError> {
    let m = surface.m;
    if j + 2 > m {
        return Err(crate::curvature::CurvatureError::IndexOutOfRange { j, lo: 0, hi: m - 2 }.into());
    }
    if let JacobiIdentity::GaussMap { a } = identity {
        surface.check_ambient(a)?;
        if a.iter().all(|x| *x == 0.0) {
            return Err(ModelError::ZeroVector);
        }
    }
    let h = STEP;
    let (lo, hi) = (s - 4.0 * h, s + 4.0 * h);
    if !surface.profile.contains(lo) || !surface.profile.contains(hi) {
        return Err(ModelError::StencilOutOfRange { lo, hi });
    }
    surface.gauss_map(s, theta)?;

    let field = |s: f64, th: &[f64]| -> Result<f64, ModelError> {
        let nu = surface.gauss_map(s, th)?;
        Ok(match identity {
            JacobiIdentity::GaussMap { a } => dot(a, &nu),
            JacobiIdentity::Support => dot(&surface.point(s, th)?, &nu),
        })
    };
    // eigenvalues of P_j: meridian direction sees the m-1 parallel curvatures
    let lambdas = |s: f64| -> Result<(f64, f64), ModelError> {
        let k = surface.principal_curvatures(s)?;
        let v = k.values();
        let lambda_s = binomial(m - 1, j) * v[1].powi(j as i32);
        let lambda_p = k.symmetric_without(1)[j];
        Ok((lambda_s, lambda_p))
    };
    let rho_pow = |s: f64| -> Result<f64, ModelError> { Ok(surface.profile.jet(s)?.rho.powi(m as i32 - 1)) };

    let radial_flux = |x: f64| -> Result<f64, ModelError> {
        let du = d1(&|y| field(y, theta), x, h)?;
        Ok(rho_pow(x)? * lambdas(x)?.0 * du)
    };
    let radial = d1(&radial_flux, s, h)? / rho_pow(s)?;

    // orthonormal tangent frame of S^{m-1} at Θ by Gram-Schmidt
    let mut frame: Vec<Vec<f64>> = vec![theta.to_vec()];
    for k in 0..m {
        let mut c = vec![0.0; m];
        c[k] = 1.0;
        for b in &frame {
            let p = dot(&c, b);
            c.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
        }
        let n = dot(&c, &c).sqrt();
        if n > 1e-6 && frame.len() < m {
            frame.push(c.iter().map(|x| x / n).collect());
        }
    }
    let mut sphere_laplacian = 0.0;
    for e in &frame[1..] {
        let along = |phi: f64| -> Result<f64, ModelError> {
            let (sn, cs) = phi.sin_cos();
            let th: Vec<f64> = theta.iter().zip(e).map(|(t, x)| cs * t + sn * x).collect();
            let nrm = dot(&th, &th).sqrt();
            let th: Vec<f64> = th.iter().map(|x| x / nrm).collect();
            field(s, &th)
        };
        sphere_laplacian += d2(&along, 0.0, h)?;
    }
    let jet = surface.profile.jet(s)?;
    let lambda_p = lambdas(s)?.1;
    let angular = lambda_p * sphere_laplacian / (jet.rho * jet.rho);
    let lhs = radial + angular;

    let c = elementary_symmetric(&surface.principal_curvatures(s)?);
    let potential = jacobi_potential_of(&c, j);
    let sj1 =
        |x: f64| -> Result<f64, ModelError> { Ok(elementary_symmetric(&surface.principal_curvatures(x)?).s(j + 1)) };
    let dsj1 = d1(&sj1, s, h)?;
    let es = surface.meridian_tangent(s, theta)?;
    let u = field(s, theta)?;
    let (rhs, scale) = match identity {
        JacobiIdentity::GaussMap { a } => {
            let g = dsj1 * dot(&es, a);
            (-potential * u - g, (potential * u).abs() + g.abs())
        }
        JacobiIdentity::Support => {
            let f = surface.point(s, theta)?;
            let g = dsj1 * dot(&es, &f);
            let k = (j + 1) as f64 * c.s(j + 1);
            (-k - potential * u - g, k.abs() + (potential * u).abs() + g.abs())
        }
    };
    Ok(JacobiResidual { lhs, rhs, residual: (lhs - rhs).abs(), scale: scale + radial.abs() + angular.abs() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(v: &[f64]) -> Vec<f64> {
        let n = dot(v, v).sqrt();
        v.iter().map(|x| x / n).collect()
    }

    #[test]
    fn sphere_gauss_identity() {
        let sph = RotationHypersurface::sphere_profile(2, (0.0, std::f64::consts::PI)).unwrap();
        let a = unit(&[0.3, -0.4, 0.8]);
        let r = jacobi_identity_check(&sph, &JacobiIdentity::GaussMap { a }, 1.1, &unit(&[0.6, 0.8]), 0).unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
    }

    #[test]
    fn catenoid_support_identity() {
        let cat = RotationHypersurface::catenoid(2, (-5.0, 5.0)).unwrap();
        let r = jacobi_identity_check(&cat, &JacobiIdentity::Support, 0.8, &unit(&[1.0, 2.0]), 0).unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
    }

    #[test]
    fn gradient_term_sign() {
        // S_{j+1} varies along the profile here, so the gradient term is active
        let cat = RotationHypersurface::catenoid(3, (-5.0, 5.0)).unwrap();
        let th = unit(&[0.2, -0.7, 0.4]);
        let a = unit(&[0.5, 0.1, -0.3, 0.7]);
        for j in 0..2 {
            for id in [JacobiIdentity::GaussMap { a: a.clone() }, JacobiIdentity::Support] {
                let r = jacobi_identity_check(&cat, &id, 0.9, &th, j).unwrap();
                assert!(r.residual < 1e-6, "j={j} {id:?} {r:?}");
            }
        }
    }

    #[test]
    fn cylinder_axis_is_trivial() {
        let cyl = RotationHypersurface::cylinder(2, 1.0, (-5.0, 5.0)).unwrap();
        let r = jacobi_identity_check(&cyl, &JacobiIdentity::GaussMap { a: vec![0.0, 0.0, 1.0] }, 0.0, &[1.0, 0.0], 0)
            .unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
    }

    #[test]
    fn stencil_must_fit() {
        let cat = RotationHypersurface::catenoid(2, (0.0, 5.0)).unwrap();
        assert!(matches!(
            jacobi_identity_check(&cat, &JacobiIdentity::Support, 0.001, &[1.0, 0.0], 0),
            Err(ModelError::StencilOutOfRange { .. })
        ));
    }
}
