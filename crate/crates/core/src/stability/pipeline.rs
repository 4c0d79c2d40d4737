use serde::Serialize;

use super::{
    check_theorem1, check_theorem2, potential_profile, rayleigh_certificates, run_criteria, Branch, CheckOptions,
    CriteriaOutcome, GeometricProfileData, HypothesisReport, Overall, PotentialMode, RayleighCertificate,
    StabilityError,
};
use crate::curvature::ConstantMode;
use crate::oscillation::{
    solve_interior_cauchy, solve_singular_cauchy, CauchySolution, CoefficientProfile, CriterionVerdict,
    PotentialProfile, SolverOptions, StartKind,
};

pub const GAUSS_MAP_CONCLUSION: &str = "Gauss map meets every equator outside every compact";
pub const ENVELOPE_CONCLUSION: &str = "tangent envelope of the complement of every compact fills R^{m+1}";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    GaussMap,
    TangentEnvelope,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Conclusion {
    Conclusion,
    NoConclusion,
}

/// Outcome of the gate: the geometric statement only when every link of
/// the evidence chain is affirmative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decision {
    pub verdict: Conclusion,
    pub statement: Option<String>,
    pub reasons: Vec<String>,
}

pub fn instability_verdict(
    theorem: Theorem,
    report: &HypothesisReport,
    oscillation: CriterionVerdict,
    certificates: &[RayleighCertificate],
) -> Decision {
    let mut reasons = Vec::new();
    if report.overall != Overall::Satisfied {
        reasons.push(format!("hypotheses {:?}", report.overall));
    }
    if oscillation != CriterionVerdict::Oscillatory {
        reasons.push(format!("oscillation criteria {oscillation:?}"));
    }
    if certificates.is_empty() {
        reasons.push("no zero pair to certify".into());
    }
    let failed: Vec<usize> = certificates.iter().filter(|c| !c.passes).map(|c| c.pair_index).collect();
    if !failed.is_empty() {
        reasons.push(format!("certificates failed for pairs {failed:?}"));
    }
    if reasons.is_empty() {
        let statement = match theorem {
            Theorem::GaussMap => GAUSS_MAP_CONCLUSION,
            Theorem::TangentEnvelope => ENVELOPE_CONCLUSION,
        };
        Decision { verdict: Conclusion::Conclusion, statement: Some(statement.into()), reasons }
    } else {
        Decision { verdict: Conclusion::NoConclusion, statement: None, reasons }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    pub check: CheckOptions,
    pub solver: SolverOptions,
    /// `z(0+)` for a singular start, `z(t0)` for an interior one.
    pub z0: f64,
    /// Start point when the weight does not vanish at the origin.
    pub interior_start: f64,
    /// Certificates are computed for zero pairs at or beyond this radius.
    pub radius: f64,
    /// End of the solve; defaults to the data's `t_max`.
    pub solve_t_max: Option<f64>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            check: CheckOptions::default(),
            solver: SolverOptions::default(),
            z0: 1.0,
            interior_start: 0.0,
            radius: 0.0,
            solve_t_max: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InstabilityRecord {
    pub theorem: Theorem,
    pub report: HypothesisReport,
    pub potential: String,
    pub criteria: CriteriaOutcome,
    pub start_kind: StartKind,
    pub zeros: Vec<f64>,
    pub certificates: Vec<RayleighCertificate>,
    pub decision: Decision,
    #[serde(skip)]
    pub solution: CauchySolution,
}

fn solve(
    v: &CoefficientProfile,
    a: &PotentialProfile,
    t_max: f64,
    opts: &PipelineOptions,
) -> Result<CauchySolution, StabilityError> {
    let end = opts.solve_t_max.unwrap_or(t_max).min(t_max);
    let sol = if v.vanishes_at_zero() {
        solve_singular_cauchy(v, a, opts.z0, end, &opts.solver)?
    } else {
        solve_interior_cauchy(v, a, opts.interior_start, opts.z0, 0.0, end, &opts.solver)?
    };
    Ok(sol)
}

fn assemble(
    theorem: Theorem,
    data: &GeometricProfileData,
    report: HypothesisReport,
    a: PotentialProfile,
    opts: &PipelineOptions,
) -> Result<InstabilityRecord, StabilityError> {
    let v = data.weight()?;
    let criteria = run_criteria(&v, &a, data.t_max, &opts.check.integrable)?;
    let solution = solve(&v, &a, data.t_max, opts)?;
    let certificates = rayleigh_certificates(&v, &a, &solution, (data.m - data.j) as f64, opts.radius)?;
    let decision = instability_verdict(theorem, &report, criteria.verdict, &certificates);
    Ok(InstabilityRecord {
        theorem,
        report,
        potential: a.map().label(),
        criteria,
        start_kind: solution.start_kind(),
        zeros: solution.zeros().to_vec(),
        certificates,
        decision,
        solution,
    })
}

/// Hypotheses, lower-bound potential, criteria, solve, certificates, gate.
pub fn analyze_theorem1(
    data: &GeometricProfileData,
    branch: Branch,
    constant_mode: ConstantMode,
    opts: &PipelineOptions,
) -> Result<InstabilityRecord, StabilityError> {
    let report = check_theorem1(data, branch, constant_mode, &opts.check)?;
    let a = potential_profile(data, PotentialMode::LowerBound, constant_mode)?;
    assemble(Theorem::GaussMap, data, report, a, opts)
}

/// Same chain as [`analyze_theorem1`] on the exact potential.
pub fn analyze_theorem2(
    data: &GeometricProfileData,
    opts: &PipelineOptions,
) -> Result<InstabilityRecord, StabilityError> {
    let report = check_theorem2(data, &opts.check)?;
    let a = potential_profile(data, PotentialMode::Exact, ConstantMode::default())?;
    assemble(Theorem::TangentEnvelope, data, report, a, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillation::RadialMap;

    #[test]
    fn exponential_battery_concludes() {
        let e = RadialMap::exponential(1.0, 2.0);
        let data = GeometricProfileData::synthetic(3, 1, 1.0, e.clone(), e, 100.0);
        for mode in [ConstantMode::Paper, ConstantMode::Corrected] {
            let r = analyze_theorem1(&data, Branch::Ii, mode, &PipelineOptions::default()).unwrap();
            assert_eq!(r.decision.verdict, Conclusion::Conclusion, "{:?}", r.decision.reasons);
            assert_eq!(r.decision.statement.as_deref(), Some(GAUSS_MAP_CONCLUSION));
            assert!(r.certificates.len() >= 5);
        }
    }

    #[test]
    fn gate_blocks_unsatisfied_reports() {
        let e = RadialMap::exponential(1.0, 2.0);
        let data = GeometricProfileData::synthetic(3, 1, 1.0, e.clone(), e, 100.0);
        let r = analyze_theorem1(&data, Branch::I, ConstantMode::Corrected, &PipelineOptions::default()).unwrap();
        assert_eq!(r.report.overall, Overall::NotSatisfied);
        assert!(r.certificates.iter().all(|c| c.passes));
        assert_eq!(r.decision.verdict, Conclusion::NoConclusion);
        assert!(r.decision.statement.is_none());
    }
}
