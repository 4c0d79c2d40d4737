use std::fmt;
use std::sync::Arc;

use super::OscillationError;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real function of the radial variable `t`.
///
/// Closed forms keep their class so that ratios simplify and reciprocal
/// tails can be integrated analytically; sampled maps use monotone cubic
/// (PCHIP) interpolation.
#[derive(Clone)]
pub struct RadialMap {
    kind: MapKind,
}

#[derive(Clone)]
enum MapKind {
    Const(f64),
    /// `coef * t^exponent`
    Power {
        coef: f64,
        exponent: f64,
    },
    /// `coef * exp(rate * t)`
    Exp {
        coef: f64,
        rate: f64,
    },
    Custom {
        f: ScalarFn,
        df: Option<ScalarFn>,
        label: String,
    },
    Sampled(SampledMap),
}

impl fmt::Debug for RadialMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RadialMap({})", self.label())
    }
}

impl RadialMap {
    pub fn constant(value: f64) -> Self {
        Self { kind: MapKind::Const(value) }
    }

    pub fn power(coef: f64, exponent: f64) -> Self {
        if exponent == 0.0 {
            return Self::constant(coef);
        }
        Self { kind: MapKind::Power { coef, exponent } }
    }

    pub fn exponential(coef: f64, rate: f64) -> Self {
        if rate == 0.0 {
            return Self::constant(coef);
        }
        Self { kind: MapKind::Exp { coef, rate } }
    }

    pub fn from_fn<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self { kind: MapKind::Custom { f: Arc::new(f), df: None, label: label.into() } }
    }

    pub fn from_fn_with_derivative<F, D>(label: impl Into<String>, f: F, df: D) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self { kind: MapKind::Custom { f: Arc::new(f), df: Some(Arc::new(df)), label: label.into() } }
    }

    pub fn sampled(map: SampledMap) -> Self {
        Self { kind: MapKind::Sampled(map) }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            MapKind::Const(c) => *c,
            MapKind::Power { coef, exponent } => coef * t.powf(*exponent),
            MapKind::Exp { coef, rate } => coef * (rate * t).exp(),
            MapKind::Custom { f, .. } => f(t),
            MapKind::Sampled(s) => s.eval(t),
        }
    }

    /// First derivative; closures without an explicit derivative use a
    /// fourth-order central difference.
    pub fn derivative(&self, t: f64) -> f64 {
        match &self.kind {
            MapKind::Const(_) => 0.0,
            MapKind::Power { coef, exponent } => coef * exponent * t.powf(exponent - 1.0),
            MapKind::Exp { coef, rate } => coef * rate * (rate * t).exp(),
            MapKind::Custom { df: Some(df), .. } => df(t),
            MapKind::Custom { f, .. } => {
                let h = 1e-3 * t.abs().max(1e-2);
                (f(t - 2.0 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2.0 * h)) / (12.0 * h)
            }
            MapKind::Sampled(s) => s.derivative(t),
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            MapKind::Const(c) => format!("{c}"),
            MapKind::Power { coef, exponent } => format!("{coef}*t^{exponent}"),
            MapKind::Exp { coef, rate } => format!("{coef}*exp({rate}*t)"),
            MapKind::Custom { label, .. } => label.clone(),
            MapKind::Sampled(s) => format!("sampled[{} points on {}..{}]", s.len(), s.t[0], s.t[s.len() - 1]),
        }
    }

    /// Domain of a sampled map; closed forms are unrestricted.
    pub fn domain(&self) -> Option<(f64, f64)> {
        match &self.kind {
            MapKind::Sampled(s) => Some((s.t[0], s.t[s.len() - 1])),
            _ => None,
        }
    }

    pub fn as_sampled(&self) -> Option<&SampledMap> {
        match &self.kind {
            MapKind::Sampled(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.kind, MapKind::Const(_) | MapKind::Power { .. } | MapKind::Exp { .. })
    }

    /// `∫_t^∞ ds / map(s)` when the map belongs to a class with a known
    /// finite tail.
    pub fn reciprocal_tail(&self, t: f64) -> Option<f64> {
        match self.kind {
            MapKind::Power { coef, exponent } if exponent > 1.0 && coef > 0.0 && t > 0.0 => {
                Some(t.powf(1.0 - exponent) / (coef * (exponent - 1.0)))
            }
            MapKind::Exp { coef, rate } if rate > 0.0 && coef > 0.0 => Some((-rate * t).exp() / (coef * rate)),
            _ => None,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        match &self.kind {
            MapKind::Const(v) => Self::constant(c * v),
            MapKind::Power { coef, exponent } => Self::power(c * coef, *exponent),
            MapKind::Exp { coef, rate } => Self::exponential(c * coef, *rate),
            _ => {
                let inner = self.clone();
                let dinner = self.clone();
                Self::from_fn_with_derivative(
                    format!("{c}*({})", self.label()),
                    move |t| c * inner.eval(t),
                    move |t| c * dinner.derivative(t),
                )
            }
        }
    }

    /// Pointwise product, simplified when both factors are closed forms of
    /// the same class.
    pub fn product(&self, other: &Self) -> Self {
        use MapKind::*;
        match (&self.kind, &other.kind) {
            (Const(a), _) => other.scaled(*a),
            (_, Const(b)) => self.scaled(*b),
            (Power { coef: a, exponent: p }, Power { coef: b, exponent: q }) => Self::power(a * b, p + q),
            (Exp { coef: a, rate: p }, Exp { coef: b, rate: q }) => Self::exponential(a * b, p + q),
            _ => {
                let (x, y) = (self.clone(), other.clone());
                Self::from_fn(format!("({})*({})", self.label(), other.label()), move |t| x.eval(t) * y.eval(t))
            }
        }
    }

    /// Pointwise quotient `self / other`, simplified for closed forms.
    pub fn ratio(&self, other: &Self) -> Self {
        use MapKind::*;
        match (&self.kind, &other.kind) {
            (_, Const(b)) => self.scaled(1.0 / b),
            (Const(a), Power { coef, exponent }) => Self::power(a / coef, -exponent),
            (Const(a), Exp { coef, rate }) => Self::exponential(a / coef, -rate),
            (Power { coef: a, exponent: p }, Power { coef: b, exponent: q }) => Self::power(a / b, p - q),
            (Exp { coef: a, rate: p }, Exp { coef: b, rate: q }) => Self::exponential(a / b, p - q),
            _ => {
                let (x, y) = (self.clone(), other.clone());
                Self::from_fn(format!("({})/({})", self.label(), other.label()), move |t| x.eval(t) / y.eval(t))
            }
        }
    }

    /// Reciprocal `1 / self`.
    pub fn reciprocal(&self) -> Self {
        Self::constant(1.0).ratio(self)
    }
}

/// Samples `(t_i, y_i)` with strictly increasing abscissae and PCHIP slopes.
/// Values outside the sampled range are held at the end values.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledMap {
    t: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

fn pchip_end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

impl SampledMap {
    pub fn new(t: Vec<f64>, y: Vec<f64>) -> Result<Self, OscillationError> {
        if t.len() != y.len() {
            return Err(OscillationError::InvalidParameter(format!(
                "abscissae ({}) and values ({}) differ in length",
                t.len(),
                y.len()
            )));
        }
        if t.len() < 2 {
            return Err(OscillationError::InvalidParameter("a sampled map needs at least two points".into()));
        }
        for i in 0..t.len() {
            if !t[i].is_finite() || !y[i].is_finite() {
                return Err(OscillationError::NonFinite { t: t[i] });
            }
            if i > 0 && t[i] <= t[i - 1] {
                return Err(OscillationError::NonMonotoneGrid { row: i, t: t[i] });
            }
        }
        let n = t.len();
        let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                if delta[k - 1] * delta[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
                }
            }
            d[0] = pchip_end_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = pchip_end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self { t, y, d })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    fn locate(&self, t: f64) -> usize {
        match self.t.binary_search_by(|probe| probe.total_cmp(&t)) {
            Ok(i) => i.min(self.t.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.t.len() - 2),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.t.len();
        if t <= self.t[0] {
            return self.y[0];
        }
        if t >= self.t[n - 1] {
            return self.y[n - 1];
        }
        let i = self.locate(t);
        let h = self.t[i + 1] - self.t[i];
        let s = (t - self.t[i]) / h;
        let (h00, h10, h01, h11) = hermite_basis(s);
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let n = self.t.len();
        if t < self.t[0] || t > self.t[n - 1] {
            return 0.0;
        }
        let i = self.locate(t);
        let h = self.t[i + 1] - self.t[i];
        let s = (t - self.t[i]) / h;
        let (d00, d10, d01, d11) = hermite_basis_derivative(s);
        (d00 * self.y[i] + d01 * self.y[i + 1]) / h + d10 * self.d[i] + d11 * self.d[i + 1]
    }
}

pub(crate) fn hermite_basis(s: f64) -> (f64, f64, f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0, s3 - 2.0 * s2 + s, -2.0 * s3 + 3.0 * s2, s3 - s2)
}

pub(crate) fn hermite_basis_derivative(s: f64) -> (f64, f64, f64, f64) {
    let s2 = s * s;
    (6.0 * s2 - 6.0 * s, 3.0 * s2 - 4.0 * s + 1.0, -6.0 * s2 + 6.0 * s, 3.0 * s2 - 2.0 * s)
}

/// Evaluation grid used to validate profiles: a logarithmic run towards
/// zero followed by a uniform grid, plus the sample nodes of sampled maps.
fn validation_grid(map: &RadialMap, t_max: f64) -> Vec<f64> {
    let mut grid: Vec<f64> = Vec::new();
    match map.domain() {
        Some((lo, _)) => {
            let start = if lo > 0.0 { lo } else { t_max * 1e-9 };
            if let Some(s) = map.as_sampled() {
                grid.extend(s.abscissae().iter().copied().filter(|&t| t > 0.0 && t <= t_max));
            }
            grid.push(start);
        }
        None => {
            for i in 0..=40 {
                grid.push(t_max * 10f64.powf(-9.0 + 6.0 * i as f64 / 40.0));
            }
        }
    }
    let lo = map.domain().map(|d| d.0.max(0.0)).unwrap_or(0.0);
    for i in 1..=2000 {
        let t = lo + (t_max - lo) * i as f64 / 2000.0;
        grid.push(t);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Radial weight `v` of the equation `(v z')' + A v z = 0`.
#[derive(Debug, Clone)]
pub struct CoefficientProfile {
    map: RadialMap,
    t_max: f64,
    vanishes_at_zero: bool,
    locally_bounded_inverse: bool,
    monotone_radius: Option<f64>,
}

impl CoefficientProfile {
    /// Validates `v >= 0`, `v > 0` on `(0, t_max]` and infers whether `v`
    /// increases from `v(0+) = 0` near the origin.
    pub fn new(map: RadialMap, t_max: f64) -> Result<Self, OscillationError> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(OscillationError::InvalidParameter(format!("t_max = {t_max} must be positive")));
        }
        if let Some((_, hi)) = map.domain() {
            if hi < t_max * (1.0 - 1e-12) {
                return Err(OscillationError::DomainTooShort { needed: t_max, available: hi });
            }
        }
        let grid = validation_grid(&map, t_max);
        let values: Vec<f64> = grid.iter().map(|&t| map.eval(t)).collect();
        let mut vmax: f64 = 0.0;
        for (&t, &v) in grid.iter().zip(&values) {
            if !v.is_finite() {
                return Err(OscillationError::NonFinite { t });
            }
            if v < 0.0 {
                return Err(OscillationError::NegativeCoefficient { t, value: v });
            }
            if v == 0.0 {
                return Err(OscillationError::VanishingCoefficient { t });
            }
            vmax = vmax.max(v);
        }

        let at_origin = match map.domain() {
            Some((lo, _)) if lo > 0.0 => map.eval(lo),
            _ => map.eval(0.0),
        };
        let mut monotone_end = grid[0];
        for w in grid.windows(2).zip(values.windows(2)) {
            let ((_, t1), (v0, v1)) = ((w.0[0], w.0[1]), (w.1[0], w.1[1]));
            if v1 < v0 {
                break;
            }
            monotone_end = t1;
        }
        // compare v(0) with v at a thousandth of the domain, inside the monotone run
        let reference = map.eval((1e-3 * t_max).min(monotone_end));
        let vanishes = at_origin.is_finite() && at_origin <= 1e-6 * reference && monotone_end > grid[0];
        Ok(Self {
            map,
            t_max,
            vanishes_at_zero: vanishes,
            locally_bounded_inverse: true,
            monotone_radius: vanishes.then_some(monotone_end),
        })
    }

    pub fn map(&self) -> &RadialMap {
        &self.map
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.map.eval(t)
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// `v(t) -> 0` as `t -> 0+` with `v` nondecreasing near the origin.
    pub fn vanishes_at_zero(&self) -> bool {
        self.vanishes_at_zero
    }

    /// `1/v` is bounded on compact subsets of `(0, t_max]`.
    pub fn locally_bounded_inverse(&self) -> bool {
        self.locally_bounded_inverse
    }

    /// Largest validated `a` with `v` nondecreasing on `(0, a)`.
    pub fn monotone_radius(&self) -> Option<f64> {
        self.monotone_radius
    }

    /// Same weight multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self, OscillationError> {
        Self::new(self.map.scaled(c), self.t_max)
    }
}

/// Potential `A >= 0` of the radial equation.
#[derive(Debug, Clone)]
pub struct PotentialProfile {
    map: RadialMap,
    t_max: f64,
    nontrivial: bool,
}

impl PotentialProfile {
    pub fn new(map: RadialMap, t_max: f64) -> Result<Self, OscillationError> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(OscillationError::InvalidParameter(format!("t_max = {t_max} must be positive")));
        }
        if let Some((_, hi)) = map.domain() {
            if hi < t_max * (1.0 - 1e-12) {
                return Err(OscillationError::DomainTooShort { needed: t_max, available: hi });
            }
        }
        let grid = validation_grid(&map, t_max);
        let values: Vec<f64> = grid.iter().map(|&t| map.eval(t)).collect();
        let scale = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        for (&t, &a) in grid.iter().zip(&values) {
            if !a.is_finite() {
                return Err(OscillationError::NonFinite { t });
            }
            if a < -1e-12 * scale {
                return Err(OscillationError::NegativePotential { t, value: a });
            }
        }
        Ok(Self { map, t_max, nontrivial: scale > 0.0 })
    }

    pub fn map(&self) -> &RadialMap {
        &self.map
    }

    /// Potential value, with roundoff-level negatives clipped to zero.
    pub fn eval(&self, t: f64) -> f64 {
        self.map.eval(t).max(0.0)
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// `A` is not identically zero on the validation grid.
    pub fn is_nontrivial(&self) -> bool {
        self.nontrivial
    }

    pub(crate) fn require_nontrivial(&self) -> Result<(), OscillationError> {
        if self.nontrivial {
            Ok(())
        } else {
            Err(OscillationError::TrivialPotential)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_algebra_simplifies() {
        let v = RadialMap::exponential(1.0, 2.0);
        let a = RadialMap::constant(8.0).product(&v).ratio(&v);
        assert_eq!(a.eval(13.7), 8.0);
        assert!(a.is_closed_form());
        let q = RadialMap::power(2.0, 3.0).ratio(&RadialMap::power(4.0, 1.0));
        assert!((q.eval(3.0) - 4.5).abs() < 1e-14);
        assert_eq!(RadialMap::power(1.0, 2.0).reciprocal().eval(2.0), 0.25);
    }

    #[test]
    fn analytic_tails() {
        assert!((RadialMap::power(1.0, 2.0).reciprocal_tail(4.0).unwrap() - 0.25).abs() < 1e-15);
        let e = RadialMap::exponential(1.0, 2.0).reciprocal_tail(3.0).unwrap();
        assert!((e - (-6f64).exp() / 2.0).abs() < 1e-18);
        assert!(RadialMap::power(1.0, 1.0).reciprocal_tail(4.0).is_none());
        assert!(RadialMap::constant(1.0).reciprocal_tail(4.0).is_none());
    }

    #[test]
    fn derivatives() {
        let p = RadialMap::power(3.0, 2.0);
        assert_eq!(p.derivative(2.0), 12.0);
        let f = RadialMap::from_fn("sin", f64::sin);
        assert!((f.derivative(1.0) - 1f64.cos()).abs() < 1e-10);
    }

    #[test]
    fn pchip_reproduces_nodes_and_monotonicity() {
        let t: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = t.iter().map(|t| t * t).collect();
        let s = SampledMap::new(t.clone(), y.clone()).unwrap();
        for (ti, yi) in t.iter().zip(&y) {
            assert_eq!(s.eval(*ti), *yi);
        }
        let mut prev = s.eval(0.0);
        for i in 1..1000 {
            let v = s.eval(i as f64 * 0.0095);
            assert!(v >= prev);
            prev = v;
        }
        assert!((s.eval(3.3) - 3.3 * 3.3).abs() < 0.05);
    }

    #[test]
    fn sampled_map_rejects_bad_grids() {
        assert!(matches!(
            SampledMap::new(vec![0.0, 1.0, 1.0], vec![0.0, 1.0, 2.0]),
            Err(OscillationError::NonMonotoneGrid { row: 2, .. })
        ));
        assert!(SampledMap::new(vec![0.0], vec![0.0]).is_err());
    }

    #[test]
    fn coefficient_flags() {
        let v = CoefficientProfile::new(RadialMap::power(1.0, 2.0), 10.0).unwrap();
        assert!(v.vanishes_at_zero());
        assert_eq!(v.monotone_radius(), Some(10.0));
        let e = CoefficientProfile::new(RadialMap::exponential(1.0, 2.0), 10.0).unwrap();
        assert!(!e.vanishes_at_zero());
        assert!(e.monotone_radius().is_none());
        let bump =
            CoefficientProfile::new(RadialMap::from_fn("t(2-t)^2+t", |t| t * (2.0 - t).powi(2) + t), 4.0).unwrap();
        assert!(bump.vanishes_at_zero());
        let a = bump.monotone_radius().unwrap();
        assert!(a > 0.5 && a < 2.0, "{a}");
    }

    #[test]
    fn coefficient_errors() {
        assert!(matches!(
            CoefficientProfile::new(RadialMap::from_fn("t-1", |t| t - 1.0), 3.0),
            Err(OscillationError::NegativeCoefficient { .. })
        ));
        assert!(matches!(
            CoefficientProfile::new(RadialMap::from_fn("t(t-1)^2", |t: f64| t * (t - 1.0).powi(2)), 2.0),
            Err(OscillationError::VanishingCoefficient { .. })
        ));
    }

    #[test]
    fn potential_validation() {
        assert!(PotentialProfile::new(RadialMap::constant(0.0), 1.0).map(|p| !p.is_nontrivial()).unwrap());
        assert!(matches!(
            PotentialProfile::new(RadialMap::constant(-1.0), 1.0),
            Err(OscillationError::NegativePotential { .. })
        ));
    }
}
