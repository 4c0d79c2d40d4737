use std::cell::Cell;

use serde::Serialize;

use super::profile::{CoefficientProfile, PotentialProfile};
use super::OscillationError;
use crate::quadrature::integrate;

/// Window ratio below which window masses count as geometrically decaying.
pub const CONVERGENCE_RATIO: f64 = 0.75;
/// Window ratio at or above which window masses count as bounded below.
pub const DIVERGENCE_RATIO: f64 = 0.98;
/// Margin by which a limsup estimate must clear its threshold.
pub const STABILITY_MARGIN: f64 = 0.02;

const WINDOWS: usize = 5;
const QUAD_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProbeVerdict {
    Divergent,
    Convergent,
    Inconclusive,
}

/// Masses of `g` over the doubling windows `[t_max/2^{n+1}, t_max/2^n]`,
/// latest window first, and the ratios of consecutive masses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceProbe {
    pub verdict: ProbeVerdict,
    pub windows: Vec<(f64, f64)>,
    pub masses: Vec<f64>,
    /// `masses[n] / masses[n + 1]`: later window over the one before it.
    pub ratios: Vec<f64>,
}

/// Decides whether `∫^∞ g` diverges from the window masses of `g >= 0`
/// on `(0, t_max]`.
pub fn integral_divergence_probe<G>(g: G, t_max: f64) -> Result<DivergenceProbe, OscillationError>
where
    G: Fn(f64) -> f64,
{
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(OscillationError::InvalidParameter(format!("t_max = {t_max} must be positive")));
    }
    let bad: Cell<Option<(f64, f64)>> = Cell::new(None);
    let checked = |t: f64| {
        let y = g(t);
        if !(y >= 0.0) && bad.get().is_none() {
            bad.set(Some((t, y)));
        }
        y
    };
    let mut windows = Vec::with_capacity(WINDOWS);
    let mut masses = Vec::with_capacity(WINDOWS);
    for n in 0..WINDOWS {
        let b = t_max / 2f64.powi(n as i32);
        let a = 0.5 * b;
        let q = integrate(checked, a, b, QUAD_REL, 0.0);
        if let Some((t, value)) = bad.get() {
            return Err(if value.is_finite() {
                OscillationError::NegativeIntegrand { t, value }
            } else {
                OscillationError::NonFinite { t }
            });
        }
        if !q.value.is_finite() {
            return Err(OscillationError::NonFinite { t: b });
        }
        windows.push((a, b));
        masses.push(q.value);
    }
    let ratios: Vec<f64> = masses.windows(2).map(|m| m[0] / m[1]).collect();
    let verdict = if masses[0] == 0.0 || ratios.iter().all(|r| *r < CONVERGENCE_RATIO) {
        ProbeVerdict::Convergent
    } else if ratios.iter().all(|r| *r >= DIVERGENCE_RATIO) {
        ProbeVerdict::Divergent
    } else {
        ProbeVerdict::Inconclusive
    };
    Ok(DivergenceProbe { verdict, windows, masses, ratios })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CriterionVerdict {
    Oscillatory,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonintegrableCriterion {
    pub verdict: CriterionVerdict,
    pub inverse_weight: DivergenceProbe,
    pub weighted_potential: DivergenceProbe,
}

/// Oscillation when both `∫ dt/v` and `∫ A v dt` diverge.
pub fn criterion_nonintegrable(
    v: &CoefficientProfile,
    a: &PotentialProfile,
    t_max: f64,
) -> Result<NonintegrableCriterion, OscillationError> {
    a.require_nontrivial()?;
    let inverse_weight = integral_divergence_probe(|t| 1.0 / v.eval(t), t_max)?;
    let weighted_potential = integral_divergence_probe(|t| a.eval(t) * v.eval(t), t_max)?;
    let both =
        inverse_weight.verdict == ProbeVerdict::Divergent && weighted_potential.verdict == ProbeVerdict::Divergent;
    let verdict = if both { CriterionVerdict::Oscillatory } else { CriterionVerdict::Inconclusive };
    Ok(NonintegrableCriterion { verdict, inverse_weight, weighted_potential })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailKind {
    Analytic,
    Extrapolated,
}

/// `∫_t^∞ ds/v`: exact for closed forms, otherwise the quadrature up to
/// `t_max` (`lower`) and that plus a geometric remainder (`upper`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBracket {
    pub kind: TailKind,
    pub lower: f64,
    pub upper: f64,
}

impl TailBracket {
    pub fn estimate(&self) -> f64 {
        self.upper
    }
}

/// Tails of `1/v` on an increasing grid ending at or before `t_max`.
/// `remainder_ratio` is the last window ratio of a convergent probe.
pub fn reciprocal_tail(
    v: &CoefficientProfile,
    grid: &[f64],
    t_max: f64,
    probe: &DivergenceProbe,
) -> Result<Vec<TailBracket>, OscillationError> {
    if grid.iter().all(|&t| v.map().reciprocal_tail(t).is_some()) {
        return Ok(grid
            .iter()
            .map(|&t| {
                let x = v.map().reciprocal_tail(t).unwrap_or(0.0);
                TailBracket { kind: TailKind::Analytic, lower: x, upper: x }
            })
            .collect());
    }
    if probe.verdict != ProbeVerdict::Convergent {
        return Err(OscillationError::PreconditionFailed("∫ dt/v is not seen to converge".into()));
    }
    let rho = probe.ratios[0];
    let remainder = if probe.masses[0] == 0.0 { 0.0 } else { probe.masses[0] * rho / (1.0 - rho) };
    let f = |t: f64| 1.0 / v.eval(t);
    let mut out = vec![TailBracket { kind: TailKind::Extrapolated, lower: 0.0, upper: 0.0 }; grid.len()];
    let mut acc = 0.0;
    let mut right = t_max;
    for i in (0..grid.len()).rev() {
        acc += integrate(f, grid[i], right, QUAD_REL, 0.0).value;
        right = grid[i];
        out[i] = TailBracket { kind: TailKind::Extrapolated, lower: acc, upper: acc + remainder };
    }
    Ok(out)
}

/// Largest sample over a trailing window, with the maxima of four
/// logarithmic sub-windows to detect decay.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimsupEstimate {
    pub window: (f64, f64),
    pub max: f64,
    pub argmax: f64,
    pub subwindow_maxima: Vec<f64>,
    /// Every sub-window maximum is more than the margin below the previous one.
    pub decaying: bool,
}

/// Estimates `limsup` of a sampled function by its maximum over
/// `[window_start, last sample]`; samples with `None` are skipped.
pub fn estimate_limsup(samples: &[(f64, Option<f64>)], window_start: f64) -> Option<LimsupEstimate> {
    let tail: Vec<(f64, f64)> =
        samples.iter().filter(|(t, _)| *t >= window_start).filter_map(|(t, y)| y.map(|y| (*t, y))).collect();
    let (&(t_first, _), &(t_last, _)) = (tail.first()?, tail.last()?);
    let (argmax, max) =
        tail.iter().copied().fold((t_first, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc });
    let mut subwindow_maxima = Vec::with_capacity(4);
    if t_first > 0.0 && t_last > t_first {
        let ratio = t_last / t_first;
        for k in 0..4 {
            let lo = t_first * ratio.powf(k as f64 / 4.0);
            let hi = t_first * ratio.powf((k + 1) as f64 / 4.0);
            let m = tail
                .iter()
                .filter(|(t, _)| *t >= lo && (*t < hi || (k == 3 && *t <= hi)))
                .fold(f64::NEG_INFINITY, |m, p| m.max(p.1));
            subwindow_maxima.push(m);
        }
    }
    let decaying = subwindow_maxima.len() == 4
        && subwindow_maxima.iter().all(|m| m.is_finite())
        && subwindow_maxima.windows(2).all(|w| w[1] < (1.0 - STABILITY_MARGIN) * w[0]);
    Some(LimsupEstimate { window: (window_start, t_last), max, argmax, subwindow_maxima, decaying })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrableOptions {
    /// Lower limit `T` of `∫_T^t √A`.
    pub t_lower: f64,
    pub samples: usize,
    /// Fraction of the domain left out of the ratio trace when the tail is extrapolated.
    pub horizon_margin: f64,
}

impl Default for IntegrableOptions {
    fn default() -> Self {
        Self { t_lower: 1.0, samples: 1000, horizon_margin: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioSample {
    pub t: f64,
    pub root_potential: f64,
    pub tail: TailBracket,
    /// `R(t)` from the tail estimate; `None` where `-½ log tail <= 0`.
    pub ratio: Option<f64>,
    /// `R(t)` from the tail lower and upper values (equal for analytic tails).
    pub ratio_bracket: (Option<f64>, Option<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrableCriterion {
    pub verdict: CriterionVerdict,
    pub inverse_weight: DivergenceProbe,
    pub estimate: Option<LimsupEstimate>,
    pub trace: Vec<RatioSample>,
}

fn ratio_of(num: f64, tail: f64) -> Option<f64> {
    let den = -0.5 * tail.ln();
    (den > 0.0 && tail > 0.0).then(|| num / den)
}

/// Oscillation when `∫^∞ dt/v < ∞` and
/// `limsup ∫_T^t √A / (-½ log ∫_t^∞ dt/v) > 1`.
pub fn criterion_integrable(
    v: &CoefficientProfile,
    a: &PotentialProfile,
    t_max: f64,
    opts: &IntegrableOptions,
) -> Result<IntegrableCriterion, OscillationError> {
    a.require_nontrivial()?;
    let t_lower = opts.t_lower;
    if !(t_lower > 0.0) || t_lower >= t_max / 10.0 {
        return Err(OscillationError::InvalidParameter(format!("lower limit T = {t_lower} must lie in (0, t_max/10)")));
    }
    if opts.samples < 16 {
        return Err(OscillationError::InvalidParameter("the ratio trace needs at least 16 samples".into()));
    }
    let inverse_weight = integral_divergence_probe(|t| 1.0 / v.eval(t), t_max)?;
    if inverse_weight.verdict != ProbeVerdict::Convergent {
        return Err(OscillationError::PreconditionFailed(format!(
            "∫ dt/v must converge, probe reports {:?}",
            inverse_weight.verdict
        )));
    }
    let analytic = v.map().reciprocal_tail(t_max).is_some();
    let t_end = if analytic { t_max } else { t_max * (1.0 - opts.horizon_margin) };
    let n = opts.samples;
    let grid: Vec<f64> = (0..n).map(|i| t_lower + (t_end - t_lower) * i as f64 / (n - 1) as f64).collect();
    let tails = reciprocal_tail(v, &grid, t_max, &inverse_weight)?;

    let root = |t: f64| a.eval(t).sqrt();
    let mut acc = 0.0;
    let mut trace = Vec::with_capacity(n);
    for (i, (&t, tail)) in grid.iter().zip(&tails).enumerate() {
        if i > 0 {
            acc += integrate(root, grid[i - 1], t, QUAD_REL, 0.0).value;
        }
        trace.push(RatioSample {
            t,
            root_potential: acc,
            tail: *tail,
            ratio: ratio_of(acc, tail.estimate()),
            ratio_bracket: (ratio_of(acc, tail.upper), ratio_of(acc, tail.lower)),
        });
    }
    let samples: Vec<(f64, Option<f64>)> = trace.iter().map(|s| (s.t, s.ratio)).collect();
    let estimate = estimate_limsup(&samples, t_max / 10.0);
    let verdict = match &estimate {
        Some(e) if !e.decaying && e.max > 1.0 + STABILITY_MARGIN => CriterionVerdict::Oscillatory,
        _ => CriterionVerdict::Inconclusive,
    };
    Ok(IntegrableCriterion { verdict, inverse_weight, estimate, trace })
}
