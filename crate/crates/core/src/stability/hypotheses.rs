use serde::Serialize;

use super::{potential_profile, GeometricProfileData, PotentialMode, StabilityError};
use crate::curvature::{
    ellipticity_certificate, ConstantMode, EllipticityMode, EllipticityOptions, EllipticityVerdict,
};
use crate::oscillation::{
    criterion_integrable, criterion_nonintegrable, estimate_limsup, integral_divergence_probe, reciprocal_tail,
    CoefficientProfile, CriterionVerdict, DivergenceProbe, IntegrableCriterion, IntegrableOptions, LimsupEstimate,
    NonintegrableCriterion, PotentialProfile, ProbeVerdict, STABILITY_MARGIN,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `∫ dr/v_j = ∞` and `H_1 ∉ L¹`.
    I,
    /// `∫ dr/v_j < ∞` and the limsup bound.
    Ii,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HypothesisMode {
    #[serde(rename = "thm1_i")]
    Thm1I,
    #[serde(rename = "thm1_ii")]
    Thm1Ii,
    #[serde(rename = "thm2")]
    Thm2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Affirmative,
    Negative,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Overall {
    Satisfied,
    NotSatisfied,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    Probe { integrand: String, probe: DivergenceProbe },
    Limsup { estimate: Option<LimsupEstimate>, threshold: f64, trace: Vec<(f64, Option<f64>)> },
    Nonintegrable(NonintegrableCriterion),
    Integrable(IntegrableCriterion),
    Ellipticity(EllipticityVerdict),
    Value { label: String, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubVerdict {
    pub name: String,
    pub status: Status,
    pub detail: String,
    pub evidence: Vec<Evidence>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub mode: HypothesisMode,
    pub constant_mode: ConstantMode,
    pub sub_verdicts: Vec<SubVerdict>,
    pub notes: Vec<String>,
    pub overall: Overall,
}

impl HypothesisReport {
    fn new(
        mode: HypothesisMode,
        constant_mode: ConstantMode,
        sub_verdicts: Vec<SubVerdict>,
        notes: Vec<String>,
    ) -> Self {
        let overall = if sub_verdicts.iter().all(|s| s.status == Status::Affirmative) {
            Overall::Satisfied
        } else if sub_verdicts.iter().any(|s| s.status == Status::Negative) {
            Overall::NotSatisfied
        } else {
            Overall::Inconclusive
        };
        Self { mode, constant_mode, sub_verdicts, notes, overall }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CheckOptions {
    pub integrable: IntegrableOptions,
    pub ellipticity: EllipticityOptions,
}

/// Both oscillation criteria on `(v, A)`; the integrable one only runs
/// when `∫ dt/v` is seen to converge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriteriaOutcome {
    pub verdict: CriterionVerdict,
    pub nonintegrable: NonintegrableCriterion,
    pub integrable: Option<IntegrableCriterion>,
}

pub fn run_criteria(
    v: &CoefficientProfile,
    a: &PotentialProfile,
    t_max: f64,
    opts: &IntegrableOptions,
) -> Result<CriteriaOutcome, StabilityError> {
    let nonintegrable = criterion_nonintegrable(v, a, t_max)?;
    let integrable = if nonintegrable.inverse_weight.verdict == ProbeVerdict::Convergent {
        Some(criterion_integrable(v, a, t_max, opts)?)
    } else {
        None
    };
    let oscillatory = nonintegrable.verdict == CriterionVerdict::Oscillatory
        || integrable.as_ref().is_some_and(|c| c.verdict == CriterionVerdict::Oscillatory);
    let verdict = if oscillatory { CriterionVerdict::Oscillatory } else { CriterionVerdict::Inconclusive };
    Ok(CriteriaOutcome { verdict, nonintegrable, integrable })
}

fn probe_status(p: &DivergenceProbe, want: ProbeVerdict) -> Status {
    match p.verdict {
        v if v == want => Status::Affirmative,
        ProbeVerdict::Inconclusive => Status::Inconclusive,
        _ => Status::Negative,
    }
}

fn probe_verdict(name: &str, integrand: &str, probe: DivergenceProbe, want: ProbeVerdict) -> SubVerdict {
    let status = probe_status(&probe, want);
    SubVerdict {
        name: name.into(),
        status,
        detail: format!("window probe on {integrand} reports {:?}, need {want:?}", probe.verdict),
        evidence: vec![Evidence::Probe { integrand: integrand.into(), probe }],
    }
}

fn ellipticity_verdict(
    data: &GeometricProfileData,
    mode: EllipticityMode,
    opts: EllipticityOptions,
) -> Result<Option<SubVerdict>, StabilityError> {
    let Some(samples) = &data.samples else { return Ok(None) };
    let v = ellipticity_certificate(samples, data.j, mode, opts)?;
    let status = if v.positive { Status::Affirmative } else { Status::Negative };
    let detail = if v.positive {
        format!("L_1..L_{} elliptic on {} samples", data.j, samples.len())
    } else {
        v.failures.join("; ")
    };
    Ok(Some(SubVerdict { name: "ellipticity".into(), status, detail, evidence: vec![Evidence::Ellipticity(v)] }))
}

fn nonzero_constant(data: &GeometricProfileData) -> Result<f64, StabilityError> {
    match data.hj1 {
        None => Err(StabilityError::MissingData("constant H_{j+1}".into())),
        Some(h) if h == 0.0 => Err(StabilityError::ZeroCurvatureConstant(h)),
        Some(h) if h < 0.0 => {
            Err(StabilityError::InvalidData(format!("H_{{j+1}} = {h}: orient the hypersurface so that it is positive")))
        }
        Some(h) => Ok(h),
    }
}

/// Checks condition (i) or (ii) of the first instability theorem.
pub fn check_theorem1(
    data: &GeometricProfileData,
    branch: Branch,
    constant_mode: ConstantMode,
    opts: &CheckOptions,
) -> Result<HypothesisReport, StabilityError> {
    data.validate()?;
    let h = nonzero_constant(data)?;
    let t_max = data.t_max;
    let v = data.weight()?;
    let mut subs = vec![SubVerdict {
        name: "H_{j+1} nonzero constant".into(),
        status: Status::Affirmative,
        detail: format!("H_{} = {h}", data.j + 1),
        evidence: vec![Evidence::Value { label: format!("H_{}", data.j + 1), value: h }],
    }];
    let inverse = integral_divergence_probe(|t| 1.0 / v.eval(t), t_max)?;
    let mode = match branch {
        Branch::I => {
            subs.push(probe_verdict("∫ dr/v_j diverges", "1/v_j", inverse, ProbeVerdict::Divergent));
            let mass = integral_divergence_probe(|t| data.v_1.eval(t), t_max)?;
            subs.push(probe_verdict("H_1 not integrable", "v_1", mass, ProbeVerdict::Divergent));
            HypothesisMode::Thm1I
        }
        Branch::Ii => {
            let converges = inverse.verdict == ProbeVerdict::Convergent;
            let tail_probe = inverse.clone();
            subs.push(probe_verdict("∫ dr/v_j converges", "1/v_j", inverse, ProbeVerdict::Convergent));
            if converges {
                subs.push(limsup_condition(data, &v, &tail_probe, constant_mode.constant(data.m, data.j) * h, opts)?);
            }
            HypothesisMode::Thm1Ii
        }
    };
    if let Some(e) = ellipticity_verdict(data, EllipticityMode::EllipticPoint, opts.ellipticity)? {
        subs.push(e);
    }
    let notes =
        vec![format!("constant C = {} ({} mode)", constant_mode.constant(data.m, data.j), constant_mode.as_str())];
    Ok(HypothesisReport::new(mode, constant_mode, subs, notes))
}

fn limsup_condition(
    data: &GeometricProfileData,
    v: &CoefficientProfile,
    probe: &DivergenceProbe,
    ch: f64,
    opts: &CheckOptions,
) -> Result<SubVerdict, StabilityError> {
    let t_max = data.t_max;
    let analytic = data.v_j.reciprocal_tail(t_max).is_some();
    let t_end = if analytic { t_max } else { t_max * (1.0 - opts.integrable.horizon_margin) };
    let start = t_max / 10.0;
    let n = opts.integrable.samples.max(16);
    let grid: Vec<f64> = (0..n).map(|i| start + (t_end - start) * i as f64 / (n - 1) as f64).collect();
    let tails = reciprocal_tail(v, &grid, t_max, probe)?;
    let trace: Vec<(f64, Option<f64>)> = grid
        .iter()
        .zip(&tails)
        .map(|(&t, tail)| {
            let y = (data.v_1.eval(t) * data.v_j.eval(t)).sqrt() * tail.estimate();
            (t, y.is_finite().then_some(y))
        })
        .collect();
    let threshold = 0.5 / ch.sqrt();
    let estimate = estimate_limsup(&trace, start);
    let (status, detail) = match &estimate {
        None => (Status::Inconclusive, "no finite samples in the last decade".to_string()),
        Some(e) if e.decaying => {
            let last = *e.subwindow_maxima.last().unwrap_or(&e.max);
            if last < (1.0 - STABILITY_MARGIN) * threshold {
                (Status::Negative, format!("decaying, last window max {last} below threshold {threshold}"))
            } else {
                (Status::Inconclusive, format!("decaying, last window max {last} not below threshold {threshold}"))
            }
        }
        Some(e) if e.max > (1.0 + STABILITY_MARGIN) * threshold => {
            (Status::Affirmative, format!("limsup estimate {} exceeds threshold {threshold}", e.max))
        }
        Some(e) if e.max < (1.0 - STABILITY_MARGIN) * threshold => {
            (Status::Negative, format!("limsup estimate {} below threshold {threshold}", e.max))
        }
        Some(e) => (Status::Inconclusive, format!("limsup estimate {} within the margin of {threshold}", e.max)),
    };
    Ok(SubVerdict {
        name: "limsup √(v_1 v_j) ∫_t^∞ dr/v_j above threshold".into(),
        status,
        detail,
        evidence: vec![Evidence::Limsup { estimate, threshold, trace }],
    })
}

/// Checks the second instability theorem (`H_{j+1} ≡ 0`) by running both
/// oscillation criteria on the exact potential.
pub fn check_theorem2(data: &GeometricProfileData, opts: &CheckOptions) -> Result<HypothesisReport, StabilityError> {
    data.validate()?;
    match data.hj1 {
        Some(0.0) => {}
        Some(h) => return Err(StabilityError::NonzeroCurvatureConstant(h)),
        None => return Err(StabilityError::MissingData("constant H_{j+1}".into())),
    }
    let v = data.weight()?;
    let a = potential_profile(data, PotentialMode::Exact, ConstantMode::default())?;
    let outcome = run_criteria(&v, &a, data.t_max, &opts.integrable)?;
    let status = match outcome.verdict {
        CriterionVerdict::Oscillatory => Status::Affirmative,
        CriterionVerdict::Inconclusive => Status::Inconclusive,
    };
    let mut evidence = vec![Evidence::Nonintegrable(outcome.nonintegrable.clone())];
    if let Some(c) = &outcome.integrable {
        evidence.push(Evidence::Integrable(c.clone()));
    }
    let mut subs = vec![
        SubVerdict {
            name: "H_{j+1} vanishes".into(),
            status: Status::Affirmative,
            detail: format!("H_{} = 0", data.j + 1),
            evidence: vec![],
        },
        SubVerdict {
            name: "exact potential oscillatory".into(),
            status,
            detail: format!("oscillation criteria on A = {} report {:?}", a.map().label(), outcome.verdict),
            evidence,
        },
    ];
    if let Some(e) = ellipticity_verdict(data, EllipticityMode::NullSj1, opts.ellipticity)? {
        subs.push(e);
    }

    let mut notes = Vec::new();
    if data.j == 0 {
        notes.push("j = 0: v_1 = ∫H_1 vanishes identically, the literal branch conditions are vacuous".into());
    } else {
        let inverse = integral_divergence_probe(|t| 1.0 / v.eval(t), data.t_max)?;
        let mass = integral_divergence_probe(|t| data.v_1.eval(t), data.t_max)?;
        notes.push(format!("literal branch probes: 1/v_j {:?}, v_1 {:?}", inverse.verdict, mass.verdict));
    }
    Ok(HypothesisReport::new(HypothesisMode::Thm2, ConstantMode::default(), subs, notes))
}
