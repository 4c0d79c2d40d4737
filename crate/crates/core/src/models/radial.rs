use std::sync::Arc;

use super::{ModelError, RotationHypersurface};
use crate::curvature::{elementary_symmetric, jacobi_potential_of, PrincipalSpectrum};
use crate::oscillation::RadialMap;
use crate::stability::{smoothing_kj, GeometricProfileData, ProfileSource};

/// Volume of the unit `n`-sphere in `R^{n+1}`.
pub fn sphere_volume(n: usize) -> f64 {
    use std::f64::consts::PI;
    match n {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (n - 1) as f64 * sphere_volume(n - 2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialOptions {
    /// Treat `s_min` as a pole although `ρ(s_min) > 0`; accepted only
    /// when `ρ' > 0` on `(s_min, s_max]`.
    pub assert_pole_chart: bool,
    /// Radial extent; defaults to the whole profile.
    pub t_max: Option<f64>,
    pub r0: Option<f64>,
    pub exact_potential: bool,
    /// Number of pointwise spectra kept for the ellipticity check.
    pub spectrum_samples: usize,
}

impl Default for RadialOptions {
    fn default() -> Self {
        Self { assert_pole_chart: false, t_max: None, r0: None, exact_potential: true, spectrum_samples: 200 }
    }
}

const POLE_TOL: f64 = 1e-12;

/// Spectrum at distance `t` from the pole; at the pole itself the limit
/// from the first admissible point is used.
fn spectrum_at(surface: &RotationHypersurface, s: f64) -> PrincipalSpectrum {
    let s_eff = if surface.profile.jet(s).map(|j| j.rho <= POLE_TOL).unwrap_or(false) {
        s + 1e-9 * (surface.profile.s_max - surface.profile.s_min)
    } else {
        s
    };
    surface.principal_curvatures(s_eff).expect("point inside the admitted profile")
}

/// `H_i`, with cancellation noise below the size of its terms set to zero
/// so that minimal profiles give an exactly vanishing `v_1`.
fn mean_curvature(k: &PrincipalSpectrum, i: usize) -> f64 {
    let c = elementary_symmetric(k);
    if c.s(i).abs() <= 64.0 * f64::EPSILON * c.s_abs(i) {
        0.0
    } else {
        c.h(i)
    }
}

/// Radial data seen from the pole `s_min`: `v_i(t) = ω_{m-1} ρ^{m-1} H_i`
/// at `s = s_min + t`, with the exact potential integrand and pointwise
/// spectra.
pub fn radial_data(
    surface: &RotationHypersurface,
    j: usize,
    opts: &RadialOptions,
) -> Result<GeometricProfileData, ModelError> {
    let m = surface.m;
    let (s0, s1) = (surface.profile.s_min, surface.profile.s_max);
    let rho0 = surface.profile.jet(s0)?.rho;
    if rho0.abs() > POLE_TOL {
        if !opts.assert_pole_chart {
            return Err(ModelError::NoPole { s: s0, rho: rho0 });
        }
        for i in 1..=2000 {
            let s = s0 + (s1 - s0) * i as f64 / 2000.0;
            let drho = surface.profile.jet(s)?.drho;
            if !(drho > 0.0) {
                return Err(ModelError::PoleChartRejected { s, drho });
            }
        }
    }
    let t_max = opts.t_max.unwrap_or(s1 - s0);
    if !(t_max > 0.0 && t_max <= s1 - s0) {
        return Err(ModelError::InvalidProfile(format!("t_max = {t_max} must lie in (0, {}]", s1 - s0)));
    }

    let omega = sphere_volume(m - 1);
    let surf = Arc::new(surface.clone());
    let weight = move |surf: &RotationHypersurface, t: f64| {
        let s = (s0 + t).min(s1);
        let rho = surf.profile.jet(s).map(|p| p.rho).unwrap_or(0.0);
        (s, omega * rho.powi(m as i32 - 1))
    };
    let mean_map = |i: usize, label: String| {
        let surf = surf.clone();
        RadialMap::from_fn(label, move |t| {
            let (s, w) = weight(&surf, t);
            if w == 0.0 {
                return 0.0;
            }
            w * mean_curvature(&spectrum_at(&surf, s), i)
        })
    };
    let name = surface.profile.name();
    let v_j = mean_map(j, format!("v_{j}[{name}]"));
    let v_1 = mean_map(1, format!("v_1[{name}]"));
    let exact = opts.exact_potential.then(|| {
        let surf = surf.clone();
        RadialMap::from_fn(format!("potential[{name}]"), move |t| {
            let (s, w) = weight(&surf, t);
            if w == 0.0 {
                return 0.0;
            }
            w * jacobi_potential_of(&elementary_symmetric(&spectrum_at(&surf, s)), j)
        })
    });
    let sj_radial = {
        let surf = surf.clone();
        RadialMap::from_fn(format!("S_{j}[{name}]"), move |t| {
            elementary_symmetric(&spectrum_at(&surf, (s0 + t).min(s1))).s(j)
        })
    };

    let n = opts.spectrum_samples.max(2);
    let samples: Vec<PrincipalSpectrum> =
        (0..n).map(|i| spectrum_at(surface, s0 + t_max * i as f64 / (n - 1) as f64)).collect();
    let hj1: Vec<f64> = samples.iter().map(|k| elementary_symmetric(k).h(j + 1)).collect();
    let mean = hj1.iter().sum::<f64>() / hj1.len() as f64;
    let spread = hj1.iter().fold(0.0f64, |acc, x| acc.max((x - mean).abs()));
    let hj1 = if spread <= 1e-10 * mean.abs().max(1.0) {
        // roundoff-level constants are snapped to an exact zero
        Some(if mean.abs() <= 1e-12 { 0.0 } else { mean })
    } else {
        None
    };

    if let Some(r0) = opts.r0 {
        smoothing_kj(&sj_radial, m, j, r0, t_max)?;
    }
    Ok(GeometricProfileData {
        m,
        j,
        hj1,
        v_j,
        v_1,
        exact_potential: exact,
        sj_radial: Some(sj_radial),
        r0: opts.r0,
        t_max,
        source: ProfileSource::Geometric { name },
        samples: Some(samples),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_volumes() {
        assert!((sphere_volume(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_volume(3) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn catenoid_weight() {
        let cat = RotationHypersurface::catenoid(2, (0.0, 50.0)).unwrap();
        let opts = RadialOptions { assert_pole_chart: true, ..Default::default() };
        let d = radial_data(&cat, 0, &opts).unwrap();
        for t in [0.0f64, 1.0, 7.5, 49.0] {
            assert!((d.v_j.eval(t) - 2.0 * PI * (1.0 + t * t).sqrt()).abs() < 1e-12 * (1.0 + t));
            let a = d.exact_potential.as_ref().unwrap().eval(t) / d.v_j.eval(t);
            assert!((a - 2.0 / (1.0 + t * t).powi(2)).abs() < 1e-14);
        }
        assert_eq!(d.hj1, Some(0.0));
        assert!(matches!(radial_data(&cat, 0, &RadialOptions::default()), Err(ModelError::NoPole { .. })));
    }

    #[test]
    fn sphere_mean_curvature_weight() {
        let sph = RotationHypersurface::sphere_profile(2, (0.0, 3.0)).unwrap();
        let d = radial_data(&sph, 0, &RadialOptions::default()).unwrap();
        for t in [0.3f64, 1.0, 2.9] {
            assert!((d.v_1.eval(t) - 2.0 * PI * t.sin()).abs() < 1e-13);
        }
        assert_eq!(d.hj1, Some(1.0));
    }

    #[test]
    fn cylinder_chart_rejected() {
        let cyl = RotationHypersurface::cylinder(2, 1.0, (0.0, 10.0)).unwrap();
        let opts = RadialOptions { assert_pole_chart: true, ..Default::default() };
        assert!(matches!(radial_data(&cyl, 0, &opts), Err(ModelError::PoleChartRejected { .. })));
    }
}
