use serde::Serialize;

use super::integrator::{self, dense_derivative, dense_eval, Dense, StepperOptions};
use super::profile::{hermite_basis, hermite_basis_derivative, CoefficientProfile, PotentialProfile};
use super::OscillationError;
use crate::quadrature::{cumulative_uniform, gauss_legendre_5};

/// Bisection tolerance for zeros, in `t`.
pub const ZERO_TOL: f64 = 1e-12;

const LAYER_NODES: usize = 257;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative tolerance of the embedded pair.
    pub tol: f64,
    /// Absolute error floor.
    pub abs_floor: f64,
    /// Largest step; `None` picks `(t_max - t0) / 50`.
    pub max_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, abs_floor: 1e-14, max_step: None, max_steps: 2_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StartKind {
    SingularOrigin,
    Interior,
}

/// Diagnostics of the Picard initial layer of a singular start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PicardLayer {
    pub width: f64,
    pub contraction: f64,
    pub iterations: usize,
    pub halvings: usize,
}

/// Samples of `z` and the flux `w = v z'` with dense output, and the zeros
/// of `z`. Steps of the integrator carry its continuous extension; steps
/// of the initial layer use cubic Hermite interpolation.
#[derive(Debug, Clone)]
pub struct CauchySolution {
    t: Vec<f64>,
    z: Vec<f64>,
    w: Vec<f64>,
    dz: Vec<f64>,
    dw: Vec<f64>,
    dense: Vec<Option<Dense>>,
    zeros: Vec<f64>,
    start_kind: StartKind,
    layer: Option<PicardLayer>,
}

impl CauchySolution {
    pub fn grid(&self) -> &[f64] {
        &self.t
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    /// Flux `v z'` at the grid points.
    pub fn flux(&self) -> &[f64] {
        &self.w
    }

    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }

    pub fn start_kind(&self) -> StartKind {
        self.start_kind
    }

    pub fn layer(&self) -> Option<&PicardLayer> {
        self.layer.as_ref()
    }

    pub fn t_start(&self) -> f64 {
        self.t[0]
    }

    pub fn t_end(&self) -> f64 {
        self.t[self.t.len() - 1]
    }

    /// Index `i` of the step `[t_i, t_{i+1}]` containing `t`.
    pub fn step_index(&self, t: f64) -> usize {
        let n = self.t.len();
        match self.t.binary_search_by(|p| p.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    fn dense_at(&self, t: f64, comp: usize) -> f64 {
        let i = self.step_index(t);
        let h = self.t[i + 1] - self.t[i];
        let s = (t - self.t[i]) / h;
        if let Some(r) = &self.dense[i] {
            return dense_eval(r, s)[comp];
        }
        let (vals, ders) = if comp == 0 { (&self.z, &self.dz) } else { (&self.w, &self.dw) };
        let (h00, h10, h01, h11) = hermite_basis(s);
        h00 * vals[i] + h10 * h * ders[i] + h01 * vals[i + 1] + h11 * h * ders[i + 1]
    }

    /// Dense output of `z`.
    pub fn eval_z(&self, t: f64) -> f64 {
        self.dense_at(t, 0)
    }

    /// Derivative of the dense output of `z`.
    pub fn eval_dz(&self, t: f64) -> f64 {
        let i = self.step_index(t);
        let h = self.t[i + 1] - self.t[i];
        let s = (t - self.t[i]) / h;
        if let Some(r) = &self.dense[i] {
            return dense_derivative(r, s)[0] / h;
        }
        let (d00, d10, d01, d11) = hermite_basis_derivative(s);
        (d00 * self.z[i] + d01 * self.z[i + 1]) / h + d10 * self.dz[i] + d11 * self.dz[i + 1]
    }

    /// Dense output of the flux `w = v z'`.
    pub fn eval_w(&self, t: f64) -> f64 {
        self.dense_at(t, 1)
    }

    /// Per-step residual of `w(t2) - w(t1) + ∫ A v z`, relative to
    /// `|w(t1)| + |w(t2)| + ∫ |A v z|`.
    pub fn flux_residuals(&self, v: &CoefficientProfile, a: &PotentialProfile) -> Vec<f64> {
        (0..self.t.len() - 1)
            .map(|i| {
                let (t1, t2) = (self.t[i], self.t[i + 1]);
                let src = |t: f64| a.eval(t) * v.eval(t) * self.eval_z(t);
                let integral = gauss_legendre_5(src, t1, t2);
                let mag = gauss_legendre_5(|t| src(t).abs(), t1, t2);
                let scale = self.w[i].abs() + self.w[i + 1].abs() + mag;
                let res = (self.w[i + 1] - self.w[i] + integral).abs();
                if scale > 0.0 {
                    res / scale
                } else {
                    res
                }
            })
            .collect()
    }

    /// Rows `(t, z, w)` for export.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.t.iter().zip(&self.z).zip(&self.w).map(|((t, z), w)| (*t, *z, *w))
    }
}

fn rhs<'p>(
    v: &'p CoefficientProfile,
    a: &'p PotentialProfile,
) -> impl Fn(f64, &[f64; 2]) -> Result<[f64; 2], OscillationError> + 'p {
    move |t, y| {
        let vt = v.eval(t);
        if !(vt > 0.0) || !vt.is_finite() {
            return Err(OscillationError::VanishingCoefficient { t });
        }
        Ok([y[1] / vt, -a.eval(t) * vt * y[0]])
    }
}

fn check_tmax(v: &CoefficientProfile, a: &PotentialProfile, t_max: f64) -> Result<(), OscillationError> {
    if !(t_max > 0.0) {
        return Err(OscillationError::InvalidParameter(format!("t_max = {t_max} must be positive")));
    }
    let available = v.t_max().min(a.t_max());
    if t_max > available * (1.0 + 1e-12) {
        return Err(OscillationError::DomainTooShort { needed: t_max, available });
    }
    Ok(())
}

fn stepper_options(opts: &SolverOptions, t0: f64, t_max: f64) -> StepperOptions {
    StepperOptions {
        rtol: opts.tol,
        atol: opts.abs_floor,
        max_step: opts.max_step.unwrap_or((t_max - t0) / 50.0),
        max_steps: opts.max_steps,
    }
}

/// Solves `(v z')' + A v z = 0` on `(0, t_max]` with `z(0+) = z0` and
/// bounded `z'` near the origin.
///
/// The first `ε` of the domain is covered by Picard iteration on
/// `z(t) = z0 - ∫_0^t v(s)^{-1} ∫_0^s A v z dτ ds`; the layer is halved
/// until the iteration map contracts by at least one half.
pub fn solve_singular_cauchy(
    v: &CoefficientProfile,
    a: &PotentialProfile,
    z0: f64,
    t_max: f64,
    opts: &SolverOptions,
) -> Result<CauchySolution, OscillationError> {
    if !(z0 > 0.0) {
        return Err(OscillationError::InvalidInitialValue(z0));
    }
    check_tmax(v, a, t_max)?;
    let radius = match (v.vanishes_at_zero(), v.monotone_radius()) {
        (true, Some(r)) => r,
        _ => return Err(OscillationError::ViolatesV2),
    };

    let mut width = (radius / 10.0).min(1e-3 * t_max);
    let mut halvings = 0;
    let (grid, vv, av, contraction) = loop {
        let h = width / (LAYER_NODES - 1) as f64;
        let grid: Vec<f64> = (0..LAYER_NODES).map(|i| i as f64 * h).collect();
        let vv: Vec<f64> = grid.iter().map(|&t| v.eval(t)).collect();
        let av: Vec<f64> = grid.iter().zip(&vv).map(|(&t, vt)| a.eval(t) * vt).collect();
        if let Some(i) = vv.iter().skip(1).position(|x| !(*x > 0.0)) {
            return Err(OscillationError::VanishingCoefficient { t: grid[i + 1] });
        }
        // sup norm of the (positive) Picard kernel is its action on 1
        let ones = vec![1.0; LAYER_NODES];
        let kappa = picard_kernel(&ones, &vv, &av, h).0.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if kappa <= 0.5 {
            break (grid, vv, av, kappa);
        }
        if halvings == MAX_HALVINGS {
            return Err(OscillationError::PicardNoContraction { width, factor: kappa });
        }
        width *= 0.5;
        halvings += 1;
    };
    let h = width / (LAYER_NODES - 1) as f64;

    let mut z = vec![z0; LAYER_NODES];
    let mut flux = vec![0.0; LAYER_NODES];
    let mut iterations = 0;
    for it in 1..=200 {
        let (kz, w) = picard_kernel(&z, &vv, &av, h);
        let next: Vec<f64> = kz.iter().map(|k| z0 - k).collect();
        let diff = next.iter().zip(&z).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        z = next;
        flux = w.iter().map(|x| -x).collect();
        iterations = it;
        if diff <= 1e-16 * z0 {
            break;
        }
    }

    let mut t = grid.clone();
    let mut dz: Vec<f64> = (0..LAYER_NODES).map(|i| if i == 0 { 0.0 } else { flux[i] / vv[i] }).collect();
    let mut dw: Vec<f64> = (0..LAYER_NODES).map(|i| -av[i] * z[i]).collect();
    let mut zs = z;
    let mut ws = flux;
    let mut dense: Vec<Option<Dense>> = vec![None; LAYER_NODES - 1];

    let y0 = [zs[LAYER_NODES - 1], ws[LAYER_NODES - 1]];
    let nodes = integrator::integrate(rhs(v, a), width, y0, t_max, stepper_options(opts, 0.0, t_max))?;
    // the first node repeats the end of the layer
    dz[LAYER_NODES - 1] = nodes[0].f[0];
    dw[LAYER_NODES - 1] = nodes[0].f[1];
    for node in nodes.iter().skip(1) {
        t.push(node.t);
        zs.push(node.y[0]);
        ws.push(node.y[1]);
        dz.push(node.f[0]);
        dw.push(node.f[1]);
        dense.push(node.dense);
    }

    let mut sol = CauchySolution {
        t,
        z: zs,
        w: ws,
        dz,
        dw,
        dense,
        zeros: Vec::new(),
        start_kind: StartKind::SingularOrigin,
        layer: Some(PicardLayer { width, contraction, iterations, halvings }),
    };
    sol.zeros = find_zeros(&sol);
    Ok(sol)
}

/// `(K z)(t) = ∫_0^t W(s)/v(s) ds` with `W(s) = ∫_0^s A v z`, returned with `W`.
fn picard_kernel(z: &[f64], v: &[f64], av: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let src: Vec<f64> = z.iter().zip(av).map(|(z, av)| z * av).collect();
    let w = cumulative_uniform(&src, h);
    let ratio: Vec<f64> = w.iter().zip(v).enumerate().map(|(i, (w, v))| if i == 0 { 0.0 } else { w / v }).collect();
    (cumulative_uniform(&ratio, h), w)
}

/// Solves `(v z')' + A v z = 0` from an interior point `t0` where
/// `z(t0) = z0`, `z'(t0) = zp0`.
pub fn solve_interior_cauchy(
    v: &CoefficientProfile,
    a: &PotentialProfile,
    t0: f64,
    z0: f64,
    zp0: f64,
    t_max: f64,
    opts: &SolverOptions,
) -> Result<CauchySolution, OscillationError> {
    if !(t0 >= 0.0) || t0 >= t_max {
        return Err(OscillationError::InvalidParameter(format!("start t0 = {t0} must lie in [0, t_max)")));
    }
    if z0 == 0.0 && zp0 == 0.0 {
        return Err(OscillationError::InvalidInitialValue(z0));
    }
    check_tmax(v, a, t_max)?;
    let v0 = v.eval(t0);
    if !(v0 > 0.0) {
        return Err(OscillationError::VanishingCoefficient { t: t0 });
    }
    let nodes = integrator::integrate(rhs(v, a), t0, [z0, v0 * zp0], t_max, stepper_options(opts, t0, t_max))?;
    let mut sol = CauchySolution {
        t: nodes.iter().map(|n| n.t).collect(),
        z: nodes.iter().map(|n| n.y[0]).collect(),
        w: nodes.iter().map(|n| n.y[1]).collect(),
        dz: nodes.iter().map(|n| n.f[0]).collect(),
        dw: nodes.iter().map(|n| n.f[1]).collect(),
        dense: nodes.iter().skip(1).map(|n| n.dense).collect(),
        zeros: Vec::new(),
        start_kind: StartKind::Interior,
        layer: None,
    };
    sol.zeros = find_zeros(&sol);
    Ok(sol)
}

/// Zeros of `z`: sign changes between stored samples refined by bisection
/// on the dense output to [`ZERO_TOL`]. An exact zero at the start
/// point is kept; an exact zero at an interior node only with a strict
/// sign change across it.
pub fn find_zeros(sol: &CauchySolution) -> Vec<f64> {
    let (t, z) = (&sol.t, &sol.z);
    let n = t.len();
    let mut zeros: Vec<f64> = Vec::new();
    if z[0] == 0.0 {
        zeros.push(t[0]);
    }
    for i in 0..n - 1 {
        let (za, zb) = (z[i], z[i + 1]);
        if za == 0.0 && i > 0 && z[i - 1] * zb < 0.0 {
            zeros.push(t[i]);
        } else if za * zb < 0.0 {
            let (mut lo, mut hi) = (t[i], t[i + 1]);
            let mut flo = za;
            while hi - lo > ZERO_TOL {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = sol.eval_z(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (fm > 0.0) == (flo > 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            let root = 0.5 * (lo + hi);
            if zeros.last().is_none_or(|&prev| root - prev > ZERO_TOL) {
                zeros.push(root);
            }
        }
    }
    zeros
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillation::RadialMap;
    use std::f64::consts::PI;

    fn profiles(v: RadialMap, a: RadialMap, t_max: f64) -> (CoefficientProfile, PotentialProfile) {
        (CoefficientProfile::new(v, t_max).unwrap(), PotentialProfile::new(a, t_max).unwrap())
    }

    #[test]
    fn sinc_from_singular_origin() {
        let (v, a) = profiles(RadialMap::power(1.0, 2.0), RadialMap::constant(1.0), 10.0);
        let sol = solve_singular_cauchy(&v, &a, 1.0, 10.0, &SolverOptions::default()).unwrap();
        assert!((sol.eval_z(PI / 2.0) - 2.0 / PI).abs() < 1e-9);
        let zs = sol.zeros();
        assert_eq!(zs.len(), 3);
        for (n, z) in zs.iter().enumerate() {
            assert!((z - (n + 1) as f64 * PI).abs() < 1e-6);
        }
        let layer = sol.layer().unwrap();
        assert!(layer.contraction <= 0.5);
    }

    #[test]
    fn zero_potential_gives_constant() {
        let (v, a) = profiles(RadialMap::power(1.0, 1.0), RadialMap::constant(0.0), 5.0);
        let sol = solve_singular_cauchy(&v, &a, 2.5, 5.0, &SolverOptions::default()).unwrap();
        assert!(sol.z().iter().all(|&z| z == 2.5));
        assert!(sol.flux().iter().all(|&w| w == 0.0));
        assert!(sol.zeros().is_empty());
    }

    #[test]
    fn singular_start_needs_vanishing_weight() {
        let (v, a) = profiles(RadialMap::exponential(1.0, 2.0), RadialMap::constant(1.0), 5.0);
        assert!(matches!(
            solve_singular_cauchy(&v, &a, 1.0, 5.0, &SolverOptions::default()),
            Err(OscillationError::ViolatesV2)
        ));
        let (v, a) = profiles(RadialMap::power(1.0, 2.0), RadialMap::constant(1.0), 5.0);
        assert!(matches!(
            solve_singular_cauchy(&v, &a, 0.0, 5.0, &SolverOptions::default()),
            Err(OscillationError::InvalidInitialValue(_))
        ));
        assert!(matches!(
            solve_singular_cauchy(&v, &a, 1.0, 6.0, &SolverOptions::default()),
            Err(OscillationError::DomainTooShort { .. })
        ));
    }

    #[test]
    fn strong_potential_forces_layer_halving() {
        let (v, a) = profiles(RadialMap::power(1.0, 1.0), RadialMap::constant(1e10), 100.0);
        let sol = solve_singular_cauchy(&v, &a, 1.0, 0.05, &SolverOptions::default()).unwrap();
        let layer = sol.layer().unwrap();
        assert!(layer.halvings > 0);
        assert!(layer.contraction <= 0.5);
    }

    #[test]
    fn damped_exponential_weight() {
        let (v, a) = profiles(RadialMap::exponential(1.0, 2.0), RadialMap::constant(2.0), 30.0);
        let sol = solve_interior_cauchy(&v, &a, 0.0, 0.0, 1.0, 30.0, &SolverOptions::default()).unwrap();
        assert_eq!(sol.zeros()[0], 0.0);
        for (n, z) in sol.zeros().iter().enumerate() {
            assert!((z - n as f64 * PI).abs() < 1e-6, "zero {n}: {z}");
        }
        let t = 2.0;
        let err = (sol.eval_z(t) - (-t).exp() * t.sin()).abs();
        assert!(err < 1e-10, "{err:e}");
    }

    #[test]
    fn double_root_has_no_zeros() {
        let (v, a) = profiles(RadialMap::exponential(1.0, 2.0), RadialMap::constant(1.0), 100.0);
        let sol = solve_interior_cauchy(&v, &a, 0.0, 1.0, 0.0, 100.0, &SolverOptions::default()).unwrap();
        assert!(sol.zeros().is_empty());
        let t = 5.0;
        assert!((sol.eval_z(t) - (1.0 + t) * (-t).exp()).abs() < 1e-10);
    }

    #[test]
    fn flux_identity_holds_per_step() {
        let (v, a) = profiles(RadialMap::power(1.0, 1.0), RadialMap::constant(1.0), 20.0);
        let opts = SolverOptions::default();
        let sol = solve_singular_cauchy(&v, &a, 1.0, 20.0, &opts).unwrap();
        let worst = sol.flux_residuals(&v, &a).into_iter().fold(0.0, f64::max);
        assert!(worst <= 10.0 * opts.tol, "{worst}");
    }
}
