use serde::Serialize;

use super::{dot, norm, orthogonal_unit, ModelError, RotationHypersurface};

/// Splits `a ∈ R^{m+1}` into its component in `R^m` and along the axis.
fn split(a: &[f64]) -> (Vec<f64>, f64) {
    let m = a.len() - 1;
    (a[..m].to_vec(), a[m])
}

/// A unit `Θ` with `⟨b, Θ⟩ = c |b|`, `|c| <= 1`; any unit vector when `b = 0`.
fn direction_with_projection(b: &[f64], c: f64) -> Vec<f64> {
    let nb = norm(b);
    if nb == 0.0 {
        let mut e = vec![0.0; b.len()];
        e[0] = 1.0;
        return e;
    }
    let bh: Vec<f64> = b.iter().map(|x| x / nb).collect();
    let e = orthogonal_unit(&bh);
    let c = c.clamp(-1.0, 1.0);
    let sn = (1.0 - c * c).sqrt();
    bh.iter().zip(&e).map(|(x, y)| c * x + sn * y).collect()
}

fn samples(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn check_window(surface: &RotationHypersurface, (lo, hi): (f64, f64)) -> Result<(), ModelError> {
    for s in [lo, hi] {
        if !surface.profile.contains(s) {
            return Err(ModelError::OutOfRange { s, lo: surface.profile.s_min, hi: surface.profile.s_max });
        }
    }
    if hi < lo {
        return Err(ModelError::InvalidProfile(format!("window [{lo}, {hi}] is reversed")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingSample {
    pub s: f64,
    /// Some `Θ` has `⟨a, ν(s, Θ)⟩ = 0`.
    pub crossing: bool,
    /// `⟨a, ν(s, ·)⟩` vanishes for every `Θ`.
    pub identically_zero: bool,
    pub witness: Option<Vec<f64>>,
    /// `|⟨a, ν⟩|` at the witness.
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquatorCrossings {
    pub samples: Vec<CrossingSample>,
    pub crossing_count: usize,
    pub identically_zero: bool,
}

/// For each sample `s` of the window, whether the Gauss map meets the
/// equator orthogonal to `a` on the parallel at `s`.
pub fn equator_crossings(
    surface: &RotationHypersurface,
    a: &[f64],
    window: (f64, f64),
    n: usize,
) -> Result<EquatorCrossings, ModelError> {
    surface.check_ambient(a)?;
    if norm(a) == 0.0 {
        return Err(ModelError::ZeroVector);
    }
    check_window(surface, window)?;
    let (a_perp, a_axis) = split(a);
    let np = norm(&a_perp);
    let scale = norm(a);
    let mut out = Vec::new();
    for s in samples(window.0, window.1, n) {
        let p = surface.profile.jet(s)?;
        // ⟨a, ν⟩ = ±(-h' ⟨a_⊥, Θ⟩ + a_axis ρ')
        let offset = a_axis * p.drho;
        let reach = p.dh.abs() * np;
        let tol = 1e-14 * scale;
        let identically_zero = offset.abs() <= tol && reach <= tol;
        let crossing = offset.abs() <= reach + tol;
        let (witness, residual) = if crossing {
            let c = if reach > 0.0 { offset / (p.dh * np) } else { 0.0 };
            let theta = direction_with_projection(&a_perp, c);
            let r = dot(a, &surface.gauss_map(s, &theta)?).abs();
            (Some(theta), Some(r))
        } else {
            (None, None)
        };
        out.push(CrossingSample { s, crossing, identically_zero, witness, residual });
    }
    let crossing_count = out.iter().filter(|c| c.crossing).count();
    let identically_zero = out.iter().all(|c| c.identically_zero);
    Ok(EquatorCrossings { samples: out, crossing_count, identically_zero })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Coverage {
    Covered,
    NotCovered,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeWitness {
    pub s: f64,
    pub theta: Vec<f64>,
    /// `|⟨f(s, Θ) - q, ν(s, Θ)⟩|` recomputed from the ambient vectors.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeProbe {
    pub verdict: Coverage,
    pub witness: Option<EnvelopeWitness>,
    pub window: (f64, f64),
    pub samples: usize,
}

/// Searches the window for a tangent hyperplane through `q`: a root of
/// `⟨f(s, Θ) - q, ν(s, Θ)⟩ = φ0(s) ± h'(s) ⟨q_⊥, Θ⟩`.
pub fn tangent_envelope_probe(
    surface: &RotationHypersurface,
    q: &[f64],
    window: (f64, f64),
    n: usize,
) -> Result<EnvelopeProbe, ModelError> {
    surface.check_ambient(q)?;
    check_window(surface, window)?;
    let (q_perp, q_axis) = split(q);
    let nq = norm(&q_perp);
    let sg = surface.sign();
    // range of the shifted support function over Θ at s
    let bounds = |s: f64| -> Result<(f64, f64, f64, f64), ModelError> {
        let p = surface.profile.jet(s)?;
        let phi0 = sg * (-p.rho * p.dh + p.h * p.drho - q_axis * p.drho);
        let spread = p.dh.abs() * nq;
        Ok((phi0 - spread, phi0 + spread, phi0, p.dh))
    };
    let witness_at = |s: f64| -> Result<EnvelopeWitness, ModelError> {
        let (_, _, phi0, dh) = bounds(s)?;
        // need sg * h' ⟨q_⊥, Θ⟩ = -φ0
        let c = if dh != 0.0 && nq > 0.0 { -phi0 / (sg * dh * nq) } else { 0.0 };
        let theta = direction_with_projection(&q_perp, c);
        let f = surface.point(s, &theta)?;
        let nu = surface.gauss_map(s, &theta)?;
        let diff: Vec<f64> = f.iter().zip(q).map(|(x, y)| x - y).collect();
        Ok(EnvelopeWitness { s, residual: dot(&diff, &nu).abs(), theta })
    };

    let grid = samples(window.0, window.1, n);
    let mut prev: Option<(f64, f64, f64)> = None;
    for &s in &grid {
        let (lo, hi, _, _) = bounds(s)?;
        if lo <= 0.0 && hi >= 0.0 {
            return Ok(EnvelopeProbe {
                verdict: Coverage::Covered,
                witness: Some(witness_at(s)?),
                window,
                samples: grid.len(),
            });
        }
        if let Some((s0, lo0, hi0)) = prev {
            // both bounds share a sign at each sample; a flip means one bound crossed zero
            if lo0.signum() != lo.signum() || hi0.signum() != hi.signum() {
                let pick_low = lo0.signum() != lo.signum();
                let g = |t: f64| bounds(t).map(|b| if pick_low { b.0 } else { b.1 });
                let (mut a, mut b) = (s0, s);
                let ga = g(a)?;
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if mid <= a || mid >= b || b - a <= 1e-14 * (1.0 + mid.abs()) {
                        break;
                    }
                    if (g(mid)? > 0.0) == (ga > 0.0) {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                let root = 0.5 * (a + b);
                return Ok(EnvelopeProbe {
                    verdict: Coverage::Covered,
                    witness: Some(witness_at(root)?),
                    window,
                    samples: grid.len(),
                });
            }
        }
        prev = Some((s, lo, hi));
    }
    Ok(EnvelopeProbe { verdict: Coverage::NotCovered, witness: None, window, samples: grid.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cylinder_crossings() {
        let cyl = RotationHypersurface::cylinder(2, 1.0, (0.0, 100.0)).unwrap();
        let axis = equator_crossings(&cyl, &[0.0, 0.0, 1.0], (0.0, 100.0), 11).unwrap();
        assert!(axis.identically_zero);
        assert_eq!(axis.crossing_count, 11);
        let side = equator_crossings(&cyl, &[1.0, 0.0, 0.0], (50.0, 100.0), 11).unwrap();
        assert_eq!(side.crossing_count, 11);
        assert!(!side.identically_zero);
        for c in &side.samples {
            let w = c.witness.as_ref().unwrap();
            assert!(w[0].abs() < 1e-15);
            assert!(c.residual.unwrap() < 1e-15);
        }
        assert!(matches!(equator_crossings(&cyl, &[0.0; 3], (0.0, 1.0), 3), Err(ModelError::ZeroVector)));
    }

    #[test]
    fn sphere_crossings_generic_axis() {
        let sph = RotationHypersurface::sphere_profile(3, (0.0, std::f64::consts::PI)).unwrap();
        let a = [0.3, -0.5, 0.2, 0.78];
        let c = equator_crossings(&sph, &a, (0.2, 2.9), 50).unwrap();
        for x in c.samples.iter().filter(|x| x.crossing) {
            assert!(x.residual.unwrap() < 1e-14);
        }
        assert!(c.crossing_count > 0 && c.crossing_count < 50);
    }

    #[test]
    fn catenoid_envelope_through_origin() {
        let cat = RotationHypersurface::catenoid(2, (0.0, 60.0)).unwrap();
        let far = tangent_envelope_probe(&cat, &[0.0; 3], (2.0, 60.0), 400).unwrap();
        assert_eq!(far.verdict, Coverage::NotCovered);
        let near = tangent_envelope_probe(&cat, &[0.0; 3], (1.0, 2.0), 64).unwrap();
        assert_eq!(near.verdict, Coverage::Covered);
        let w = near.witness.unwrap();
        assert!((w.s - 1.199679f64.sinh()).abs() < 1e-5, "{}", w.s);
        assert!(w.residual < 1e-12);
    }

    #[test]
    fn any_point_lies_on_its_own_tangent_plane() {
        let cat = RotationHypersurface::catenoid(3, (-4.0, 4.0)).unwrap();
        let th = [0.48, 0.6, 0.64];
        let q = cat.point(1.7, &th).unwrap();
        let p = tangent_envelope_probe(&cat, &q, (1.7, 3.0), 20).unwrap();
        assert_eq!(p.verdict, Coverage::Covered);
        assert!(p.witness.unwrap().residual < 1e-12);
    }
}
