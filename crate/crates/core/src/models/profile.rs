use super::ModelError;
use crate::oscillation::hermite_basis;

/// Largest admissible `|ρ'² + h'² - 1|`.
pub const ARCLENGTH_TOL: f64 = 1e-8;

/// Values and first two derivatives of `ρ` and `h` at one arclength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub rho: f64,
    pub drho: f64,
    pub d2rho: f64,
    pub h: f64,
    pub dh: f64,
    pub d2h: f64,
}

/// Profile samples on a uniform arclength grid, with derivatives from the
/// file or from fourth-order finite differences.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledProfile {
    s: Vec<f64>,
    rho: [Vec<f64>; 3],
    h: [Vec<f64>; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    /// `ρ = r`, `h = s`.
    Cylinder {
        radius: f64,
    },
    /// `ρ = √(1+s²)`, `h = asinh s`.
    Catenoid,
    /// `ρ = sin s`, `h = -cos s`.
    Sphere,
    Sampled(SampledProfile),
}

/// Arclength-parametrized meridian `s ↦ (ρ(s), h(s))` on `[s_min, s_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub kind: ProfileKind,
    pub s_min: f64,
    pub s_max: f64,
}

fn check_range(lo: f64, hi: f64) -> Result<(), ModelError> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(ModelError::InvalidProfile(format!("arclength range [{lo}, {hi}] is empty")));
    }
    Ok(())
}

/// Fourth-order first and second differences on a uniform grid, with
/// one-sided stencils at the two ends.
fn differences(y: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = y.len();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    let fwd1 = |f: &dyn Fn(usize) -> f64, i0: bool| {
        if i0 {
            -25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4)
        } else {
            -3.0 * f(0) - 10.0 * f(1) + 18.0 * f(2) - 6.0 * f(3) + f(4)
        }
    };
    let fwd2 = |f: &dyn Fn(usize) -> f64, i0: bool| {
        if i0 {
            45.0 * f(0) - 154.0 * f(1) + 214.0 * f(2) - 156.0 * f(3) + 61.0 * f(4) - 10.0 * f(5)
        } else {
            10.0 * f(0) - 15.0 * f(1) - 4.0 * f(2) + 14.0 * f(3) - 6.0 * f(4) + f(5)
        }
    };
    let left = |k: usize| y[k];
    let right = |k: usize| y[n - 1 - k];
    for (i, first) in [(0usize, true), (1, false)] {
        d1[i] = fwd1(&left, first) / (12.0 * h);
        d2[i] = fwd2(&left, first) / (12.0 * h * h);
        d1[n - 1 - i] = -fwd1(&right, first) / (12.0 * h);
        d2[n - 1 - i] = fwd2(&right, first) / (12.0 * h * h);
    }
    for i in 2..n - 2 {
        d1[i] = (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / (12.0 * h);
        d2[i] = (-y[i - 2] + 16.0 * y[i - 1] - 30.0 * y[i] + 16.0 * y[i + 1] - y[i + 2]) / (12.0 * h * h);
    }
    (d1, d2)
}

impl SampledProfile {
    /// Builds a profile from rows `(s, ρ, h)` with optional `(ρ', h')`.
    pub fn new(
        s: Vec<f64>,
        rho: Vec<f64>,
        h: Vec<f64>,
        slopes: Option<(Vec<f64>, Vec<f64>)>,
    ) -> Result<Self, ModelError> {
        let n = s.len();
        if n < 6 || rho.len() != n || h.len() != n {
            return Err(ModelError::InvalidProfile(format!(
                "need at least 6 rows of equal length, got s {n}, rho {}, h {}",
                rho.len(),
                h.len()
            )));
        }
        let step = (s[n - 1] - s[0]) / (n - 1) as f64;
        if !(step > 0.0) {
            return Err(ModelError::NonUniformGrid { row: 1, s: s[1] });
        }
        for i in 0..n {
            if !(s[i].is_finite() && rho[i].is_finite() && h[i].is_finite()) {
                return Err(ModelError::InvalidProfile(format!("row {i} has a non-finite entry")));
            }
            if (s[i] - (s[0] + step * i as f64)).abs() > 1e-9 * step.max(s[i].abs()) {
                return Err(ModelError::NonUniformGrid { row: i, s: s[i] });
            }
            if rho[i] < 0.0 {
                return Err(ModelError::InvalidProfile(format!("row {i}: ρ = {} is negative", rho[i])));
            }
        }
        let (rho1, h1) = match slopes {
            Some((r1, h1)) if r1.len() == n && h1.len() == n => (r1, h1),
            Some(_) => return Err(ModelError::InvalidProfile("slope columns differ in length".into())),
            None => (differences(&rho, step).0, differences(&h, step).0),
        };
        let rho2 = differences(&rho1, step).0;
        let h2 = differences(&h1, step).0;
        Ok(Self { s, rho: [rho, rho1, rho2], h: [h, h1, h2] })
    }

    pub fn arclengths(&self) -> &[f64] {
        &self.s
    }

    fn jet(&self, s: f64) -> Jet {
        let n = self.s.len();
        let step = self.s[1] - self.s[0];
        let i = (((s - self.s[0]) / step).floor().max(0.0) as usize).min(n - 2);
        let hh = self.s[i + 1] - self.s[i];
        let x = ((s - self.s[i]) / hh).clamp(0.0, 1.0);
        let (h00, h10, h01, h11) = hermite_basis(x);
        let herm = |v: &Vec<f64>, d: &Vec<f64>| h00 * v[i] + h10 * hh * d[i] + h01 * v[i + 1] + h11 * hh * d[i + 1];
        let lin = |v: &Vec<f64>| (1.0 - x) * v[i] + x * v[i + 1];
        Jet {
            rho: herm(&self.rho[0], &self.rho[1]),
            drho: herm(&self.rho[1], &self.rho[2]),
            d2rho: lin(&self.rho[2]),
            h: herm(&self.h[0], &self.h[1]),
            dh: herm(&self.h[1], &self.h[2]),
            d2h: lin(&self.h[2]),
        }
    }
}

impl ProfileCurve {
    pub fn cylinder(radius: f64, (lo, hi): (f64, f64)) -> Result<Self, ModelError> {
        check_range(lo, hi)?;
        if !(radius > 0.0) {
            return Err(ModelError::InvalidProfile(format!("cylinder radius {radius} must be positive")));
        }
        Ok(Self { kind: ProfileKind::Cylinder { radius }, s_min: lo, s_max: hi })
    }

    pub fn catenoid((lo, hi): (f64, f64)) -> Result<Self, ModelError> {
        check_range(lo, hi)?;
        Ok(Self { kind: ProfileKind::Catenoid, s_min: lo, s_max: hi })
    }

    pub fn sphere((lo, hi): (f64, f64)) -> Result<Self, ModelError> {
        check_range(lo, hi)?;
        if lo < 0.0 || hi > std::f64::consts::PI {
            return Err(ModelError::InvalidProfile(format!("sphere profile needs [{lo}, {hi}] inside [0, π]")));
        }
        Ok(Self { kind: ProfileKind::Sphere, s_min: lo, s_max: hi })
    }

    pub fn sampled(p: SampledProfile) -> Self {
        let (lo, hi) = (p.s[0], p.s[p.s.len() - 1]);
        Self { kind: ProfileKind::Sampled(p), s_min: lo, s_max: hi }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            ProfileKind::Cylinder { radius } => format!("cylinder(r={radius})"),
            ProfileKind::Catenoid => "catenoid".into(),
            ProfileKind::Sphere => "sphere-profile".into(),
            ProfileKind::Sampled(p) => format!("sampled[{} rows]", p.s.len()),
        }
    }

    pub fn contains(&self, s: f64) -> bool {
        s >= self.s_min && s <= self.s_max
    }

    pub fn jet(&self, s: f64) -> Result<Jet, ModelError> {
        if !self.contains(s) {
            return Err(ModelError::OutOfRange { s, lo: self.s_min, hi: self.s_max });
        }
        Ok(match &self.kind {
            ProfileKind::Cylinder { radius } => Jet { rho: *radius, drho: 0.0, d2rho: 0.0, h: s, dh: 1.0, d2h: 0.0 },
            ProfileKind::Catenoid => {
                let q = 1.0 + s * s;
                let r = q.sqrt();
                Jet { rho: r, drho: s / r, d2rho: 1.0 / (q * r), h: s.asinh(), dh: 1.0 / r, d2h: -s / (q * r) }
            }
            ProfileKind::Sphere => {
                let (sn, cs) = s.sin_cos();
                Jet { rho: sn, drho: cs, d2rho: -sn, h: -cs, dh: sn, d2h: cs }
            }
            ProfileKind::Sampled(p) => p.jet(s),
        })
    }

    /// Largest `|ρ'² + h'² - 1|` over sample nodes (or 2001 points for
    /// closed forms), failing above [`ARCLENGTH_TOL`].
    pub fn check_arclength(&self) -> Result<f64, ModelError> {
        let points: Vec<f64> = match &self.kind {
            ProfileKind::Sampled(p) => p.s.clone(),
            _ => (0..=2000).map(|i| self.s_min + (self.s_max - self.s_min) * i as f64 / 2000.0).collect(),
        };
        let mut worst: f64 = 0.0;
        for s in points {
            let j = self.jet(s)?;
            let residual = (j.drho * j.drho + j.dh * j.dh - 1.0).abs();
            if residual > ARCLENGTH_TOL {
                return Err(ModelError::NotArclength { s, residual });
            }
            worst = worst.max(residual);
        }
        Ok(worst)
    }
}
