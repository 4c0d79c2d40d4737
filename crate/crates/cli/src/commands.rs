//! One function per subcommand. Each returns its stages, an optional
//! gate conclusion and provenance notes; files go through the sink.

use anyhow::{anyhow, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use rmean_core::curvature::sampling::{random_positive_spectrum, random_symmetric_form};
use rmean_core::curvature::{
    jacobi_potential, newton_inequality_gap, newton_sequence, potential_lower_bound, trace_identities, ConstantMode,
};
use rmean_core::io::{load_coefficient, load_potential, load_profile_curve, load_series};
use rmean_core::models::{
    equator_crossings, radial_data, tangent_envelope_probe, ProfileCurve, RadialOptions, RotationHypersurface,
};
use rmean_core::oscillation::{
    solve_interior_cauchy, solve_singular_cauchy, CoefficientProfile, IntegrableOptions, PotentialProfile, RadialMap,
    SolverOptions,
};
use rmean_core::stability::{
    analyze_theorem1, analyze_theorem2, rayleigh_certificates, run_criteria, CheckOptions, GeometricProfileData,
    InstabilityRecord, PipelineOptions, ProfileSource, RayleighCertificate,
};

use crate::config::{
    Command, DataConfig, MapConfig, Oscillate, Probe, ProfileConfig, RunConfig, StartConfig, SurfaceConfig, Theorem,
    VerifyAlgebra,
};
use crate::report::{ConclusionRecord, DataKind, Stage};
use crate::sink::Sink;

pub struct Outcome {
    pub stages: Vec<Stage>,
    pub conclusion: Option<ConclusionRecord>,
    pub data: DataKind,
    pub notes: Vec<String>,
}

/// Serialized name of an enum value, e.g. `OSCILLATORY`.
fn label<T: Serialize>(x: &T) -> String {
    match serde_json::to_value(x) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(v) => v.to_string(),
        Err(_) => "?".into(),
    }
}

pub fn dispatch(cfg: &RunConfig, sink: &mut Sink) -> Result<Outcome> {
    let section = || anyhow!("missing [{}] table", cfg.command.section());
    match cfg.command {
        Command::VerifyAlgebra => verify_algebra(cfg, cfg.verify_algebra.as_ref().ok_or_else(section)?, sink),
        Command::Oscillate => oscillate(cfg, cfg.oscillate.as_ref().ok_or_else(section)?, sink),
        Command::CheckTheorem1 => theorem(cfg, cfg.theorem1.as_ref().ok_or_else(section)?, sink),
        Command::CheckTheorem2 => theorem(cfg, cfg.theorem2.as_ref().ok_or_else(section)?, sink),
        Command::ProbeGauss => probe(cfg, cfg.probe_gauss.as_ref().ok_or_else(section)?, sink),
        Command::ProbeEnvelope => probe(cfg, cfg.probe_envelope.as_ref().ok_or_else(section)?, sink),
    }
}

fn radial_map(cfg: &RunConfig, def: &MapConfig) -> Result<RadialMap> {
    Ok(match def {
        MapConfig::Constant { value } => RadialMap::constant(*value),
        MapConfig::Power { coef, exponent } => RadialMap::power(*coef, *exponent),
        MapConfig::Exponential { coef, rate } => RadialMap::exponential(*coef, *rate),
        MapConfig::Csv { path } => {
            let full = cfg.resolve(path);
            RadialMap::sampled(load_series(&full, 1).with_context(|| format!("loading {}", full.display()))?)
        }
    })
}

fn surface(cfg: &RunConfig, def: &SurfaceConfig) -> Result<RotationHypersurface> {
    let range = |r: &[f64; 2]| (r[0], r[1]);
    let profile = match &def.profile {
        ProfileConfig::Cylinder { radius, range: r } => ProfileCurve::cylinder(*radius, range(r))?,
        ProfileConfig::Catenoid { range: r } => ProfileCurve::catenoid(range(r))?,
        ProfileConfig::Sphere { range: r } => ProfileCurve::sphere(range(r))?,
        ProfileConfig::Csv { path } => {
            let full = cfg.resolve(path);
            load_profile_curve(&full).with_context(|| format!("loading {}", full.display()))?
        }
    };
    Ok(RotationHypersurface::new(def.m, profile)?.with_flip(def.flip))
}

fn t_lower(explicit: Option<f64>, t_max: f64) -> f64 {
    explicit.unwrap_or((t_max / 20.0).min(1.0))
}

#[derive(Serialize)]
struct WeightFlags {
    label: String,
    vanishes_at_zero: bool,
    locally_bounded_inverse: bool,
    monotone_radius: Option<f64>,
}

fn weight_flags(v: &CoefficientProfile) -> WeightFlags {
    WeightFlags {
        label: v.map().label(),
        vanishes_at_zero: v.vanishes_at_zero(),
        locally_bounded_inverse: v.locally_bounded_inverse(),
        monotone_radius: v.monotone_radius(),
    }
}

fn certificate_stage(certs: &[RayleighCertificate]) -> Stage {
    let worst = certs.iter().map(|c| c.relative).fold(0.0, f64::max);
    let verdict = if certs.is_empty() {
        "NONE"
    } else if certs.iter().all(|c| c.passes) {
        "CERTIFIED"
    } else {
        "FAILED"
    };
    Stage::new("certificates", verdict, format!("{} zero pairs, max |Q|/energy {worst:.3e}", certs.len()), certs)
}

fn write_certificates(sink: &mut Sink, certs: &[RayleighCertificate]) -> Result<()> {
    sink.csv(
        "certificates.csv",
        &["t1", "t2", "q", "psi_scale", "energy", "lambda_bound", "relative"],
        certs.iter().map(|c| vec![c.t1, c.t2, c.q, c.psi_scale, c.energy, c.lambda_bound, c.relative]),
    )
}

fn write_zeros(sink: &mut Sink, zeros: &[f64]) -> Result<()> {
    sink.csv("zeros.csv", &["t"], zeros.iter().map(|&t| vec![t]))
}

#[derive(Debug, Clone, Serialize)]
struct AlgebraSample {
    index: usize,
    m: usize,
    trace_relative: f64,
    pm_relative: f64,
    min_newton_gap: f64,
    min_slack: f64,
    paper_violations: usize,
    corrected_violations: usize,
}

/// Violations below this are roundoff on spectra in `(0, 1]`.
const SLACK_TOL: f64 = 1e-10;

fn algebra_sample(index: usize, m: usize, seed: u64, mode: ConstantMode) -> Result<AlgebraSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_symmetric_form(&mut rng, m);
    let mut trace_relative = 0.0f64;
    for j in 1..m {
        trace_relative = trace_relative.max(trace_identities(&a, j)?.max_relative());
    }
    let seq = newton_sequence(&a)?;
    let c = seq.curvatures();
    let na = a.norm();
    let scale: f64 = (0..=m).map(|k| c.s(m - k).abs() * na.powi(k as i32)).sum();
    let pm_relative = if scale > 0.0 { seq.get(m).norm() / scale } else { seq.get(m).norm() };

    let k = random_positive_spectrum(&mut rng, m);
    let min_newton_gap =
        (1..m).map(|j| newton_inequality_gap(&k, j)).try_fold(f64::INFINITY, |acc, g| g.map(|g| acc.min(g)))?;
    let (mut min_slack, mut paper_violations, mut corrected_violations) = (f64::INFINITY, 0, 0);
    for j in 0..=m - 2 {
        let p = jacobi_potential(&k, j)?;
        min_slack = min_slack.min(p - potential_lower_bound(&k, j, mode)?);
        if p - potential_lower_bound(&k, j, ConstantMode::Paper)? < -SLACK_TOL {
            paper_violations += 1;
        }
        if p - potential_lower_bound(&k, j, ConstantMode::Corrected)? < -SLACK_TOL {
            corrected_violations += 1;
        }
    }
    Ok(AlgebraSample {
        index,
        m,
        trace_relative,
        pm_relative,
        min_newton_gap,
        min_slack,
        paper_violations,
        corrected_violations,
    })
}

fn verify_algebra(cfg: &RunConfig, va: &VerifyAlgebra, sink: &mut Sink) -> Result<Outcome> {
    let seed = cfg.seed.ok_or_else(|| anyhow!("seed is required"))?;
    let (lo, hi) = (va.m, va.m_max.unwrap_or(va.m));
    // draw every sample's dimension and seed up front so the batch is
    // independent of how rayon schedules it
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(usize, u64)> = (0..va.samples).map(|_| (master.gen_range(lo..=hi), master.gen())).collect();
    let mode = cfg.constant_mode;
    let samples: Vec<AlgebraSample> =
        draws.par_iter().enumerate().map(|(i, &(m, s))| algebra_sample(i, m, s, mode)).collect::<Result<_>>()?;

    sink.csv(
        "algebra_samples.csv",
        &["m", "trace_relative", "pm_relative", "min_newton_gap", "min_slack"],
        samples.iter().map(|s| vec![s.m as f64, s.trace_relative, s.pm_relative, s.min_newton_gap, s.min_slack]),
    )?;

    let max_trace = samples.iter().map(|s| s.trace_relative).fold(0.0, f64::max);
    let max_pm = samples.iter().map(|s| s.pm_relative).fold(0.0, f64::max);
    let min_gap = samples.iter().map(|s| s.min_newton_gap).fold(f64::INFINITY, f64::min);
    let min_slack = samples.iter().map(|s| s.min_slack).fold(f64::INFINITY, f64::min);
    let paper: usize = samples.iter().map(|s| s.paper_violations).sum();
    let corrected: usize = samples.iter().map(|s| s.corrected_violations).sum();
    let violations = match mode {
        ConstantMode::Paper => paper,
        ConstantMode::Corrected => corrected,
    };
    let worst = max_trace.max(max_pm);

    let stages = vec![
        Stage::new(
            "trace_identities",
            if worst <= cfg.tol { "PASS" } else { "FAIL" },
            format!("max relative residual {max_trace:.3e}, |P_m| relative {max_pm:.3e}, bound {:.1e}", cfg.tol),
            json!({ "samples": samples.len(), "max_relative": max_trace, "pm_relative": max_pm, "tol": cfg.tol }),
        ),
        Stage::new(
            "newton_inequalities",
            if min_gap >= -SLACK_TOL { "PASS" } else { "FAIL" },
            format!("min H_j^2 - H_(j-1) H_(j+1) over positive spectra {min_gap:.3e}"),
            json!({ "min_gap": min_gap }),
        ),
        Stage::new(
            "potential_bound",
            if violations == 0 { "HOLDS" } else { "VIOLATED" },
            format!("{} constant: {violations} violations, min slack {min_slack:.3e}", mode.as_str()),
            json!({
                "constant_mode": mode,
                "min_slack": min_slack,
                "paper_violations": paper,
                "corrected_violations": corrected,
            }),
        ),
    ];
    let notes = vec![
        format!(
            "{} samples, m drawn uniformly from [{lo}, {hi}], per-sample seeds drawn from the master seed",
            va.samples
        ),
        "potential bound checked on spectra uniform in (0, 1]; both constants are counted".into(),
    ];
    Ok(Outcome { stages, conclusion: None, data: DataKind::Random, notes })
}

fn oscillate(cfg: &RunConfig, o: &Oscillate, sink: &mut Sink) -> Result<Outcome> {
    let t_max = cfg.t_max.ok_or_else(|| anyhow!("t_max is required"))?;
    let v = match &o.v {
        MapConfig::Csv { path } => load_coefficient(&cfg.resolve(path), Some(t_max))
            .with_context(|| format!("loading oscillate.v from {}", path.display()))?,
        def => CoefficientProfile::new(radial_map(cfg, def)?, t_max).context("oscillate.v")?,
    };
    let a = match &o.a {
        MapConfig::Csv { path } => load_potential(&cfg.resolve(path), Some(t_max))
            .with_context(|| format!("loading oscillate.a from {}", path.display()))?,
        def => PotentialProfile::new(radial_map(cfg, def)?, t_max).context("oscillate.a")?,
    };
    let sampled = matches!(o.v, MapConfig::Csv { .. }) || matches!(o.a, MapConfig::Csv { .. });

    let mut stages = vec![Stage::new(
        "profiles",
        "VALID",
        format!("v vanishes at 0: {}, A nontrivial: {}", v.vanishes_at_zero(), a.is_nontrivial()),
        json!({ "v": weight_flags(&v), "a": { "label": a.map().label(), "nontrivial": a.is_nontrivial() } }),
    )];

    let solver = SolverOptions { tol: cfg.tol, ..Default::default() };
    let start = o.start.clone().unwrap_or(if v.vanishes_at_zero() {
        StartConfig::Singular { z0: 1.0 }
    } else {
        StartConfig::Interior { t0: 0.0, z0: 1.0, zp0: 0.0 }
    });
    let sol = match start {
        StartConfig::Singular { z0 } => solve_singular_cauchy(&v, &a, z0, t_max, &solver)?,
        StartConfig::Interior { t0, z0, zp0 } => solve_interior_cauchy(&v, &a, t0, z0, zp0, t_max, &solver)?,
    };
    let flux = sol.flux_residuals(&v, &a).into_iter().fold(0.0, f64::max);
    sink.csv("solution.csv", &["t", "z", "w"], sol.rows().map(|(t, z, w)| vec![t, z, w]))?;
    write_zeros(sink, sol.zeros())?;
    stages.push(Stage::new(
        "solve",
        format!("{} ZEROS", sol.zeros().len()),
        format!("{} nodes on [{}, {}], max flux residual {flux:.3e}", sol.grid().len(), sol.t_start(), sol.t_end()),
        json!({
            "start": start,
            "start_kind": sol.start_kind(),
            "layer": sol.layer(),
            "zeros": sol.zeros(),
            "max_flux_residual": flux,
        }),
    ));

    let mut notes = Vec::new();
    if a.is_nontrivial() {
        let opts = IntegrableOptions { t_lower: t_lower(o.t_lower, t_max), ..Default::default() };
        let criteria = run_criteria(&v, &a, t_max, &opts)?;
        if let Some(int) = &criteria.integrable {
            sink.csv(
                "ratio_trace.csv",
                &["t", "root_potential", "ratio", "ratio_lower", "ratio_upper"],
                int.trace.iter().map(|r| {
                    let f = |x: Option<f64>| x.unwrap_or(f64::NAN);
                    vec![r.t, r.root_potential, f(r.ratio), f(r.ratio_bracket.0), f(r.ratio_bracket.1)]
                }),
            )?;
        }
        stages.push(Stage::new(
            "criteria",
            label(&criteria.verdict),
            format!(
                "1/v probe {}, A v probe {}",
                label(&criteria.nonintegrable.inverse_weight.verdict),
                label(&criteria.nonintegrable.weighted_potential.verdict)
            ),
            &criteria,
        ));
    } else {
        notes.push("A vanishes identically: solved as the constant-solution case, criteria not applicable".into());
    }

    let certs = rayleigh_certificates(&v, &a, &sol, o.factor, 0.0)?;
    write_certificates(sink, &certs)?;
    stages.push(certificate_stage(&certs));
    let data = if sampled { DataKind::Sampled } else { DataKind::Synthetic };
    Ok(Outcome { stages, conclusion: None, data, notes })
}

fn theorem_data(cfg: &RunConfig, t: &Theorem) -> Result<(GeometricProfileData, DataKind)> {
    match &t.data {
        DataConfig::Synthetic { m, j, hj1, v_j, v_1, exact_potential } => {
            let t_max = cfg.t_max.ok_or_else(|| anyhow!("t_max is required for synthetic data"))?;
            let v_1 = match v_1 {
                Some(s) => radial_map(cfg, s)?,
                None => RadialMap::constant(0.0),
            };
            let mut data = GeometricProfileData::synthetic(*m, *j, *hj1, radial_map(cfg, v_j)?, v_1, t_max);
            if let Some(e) = exact_potential {
                data = data.with_exact_potential(radial_map(cfg, e)?);
            }
            let csv =
                [Some(v_j), exact_potential.as_ref()].into_iter().flatten().any(|s| matches!(s, MapConfig::Csv { .. }));
            Ok((data, if csv { DataKind::Sampled } else { DataKind::Synthetic }))
        }
        DataConfig::Surface { surface: def, j, assert_pole_chart, r0 } => {
            let surf = surface(cfg, def)?;
            let opts = RadialOptions {
                assert_pole_chart: *assert_pole_chart,
                t_max: cfg.t_max,
                r0: *r0,
                ..Default::default()
            };
            Ok((radial_data(&surf, *j, &opts)?, DataKind::Geometric))
        }
    }
}

fn theorem(cfg: &RunConfig, t: &Theorem, sink: &mut Sink) -> Result<Outcome> {
    let (data, kind) = theorem_data(cfg, t)?;
    data.validate()?;
    let weight = data.weight()?;
    let mut stages = vec![Stage::new(
        "data",
        "VALID",
        format!("m = {}, j = {}, t_max = {}, {} data", data.m, data.j, data.t_max, source_name(&data.source)),
        json!({
            "m": data.m,
            "j": data.j,
            "hj1": data.hj1,
            "t_max": data.t_max,
            "source": data.source,
            "v_j": weight_flags(&weight),
            "v_1": data.v_1.label(),
            "exact_potential": data.exact_potential.as_ref().map(RadialMap::label),
            "r0": data.r0,
        }),
    )];

    let opts = PipelineOptions {
        check: CheckOptions {
            integrable: IntegrableOptions { t_lower: t_lower(t.t_lower, data.t_max), ..Default::default() },
            ..Default::default()
        },
        solver: SolverOptions { tol: cfg.tol, ..Default::default() },
        z0: t.z0,
        interior_start: t.interior_start,
        radius: t.radius,
        solve_t_max: None,
    };
    let mut notes = Vec::new();
    let record = if cfg.command == Command::CheckTheorem1 {
        let branch = t.branch.ok_or_else(|| anyhow!("theorem1.branch is required"))?;
        let c = cfg.constant_mode.constant(data.m, data.j);
        notes.push(format!(
            "lower-bound potential and limsup threshold use the {} constant C = {c}",
            cfg.constant_mode.as_str()
        ));
        analyze_theorem1(&data, branch.into(), cfg.constant_mode, &opts)?
    } else {
        notes.push("exact potential; the constant mode does not enter".into());
        analyze_theorem2(&data, &opts)?
    };
    notes.extend(record.report.notes.iter().cloned());
    record_stages(&record, &mut stages, sink)?;
    let decision = &record.decision;
    let conclusion = ConclusionRecord {
        stage: "gate".into(),
        verdict: label(&decision.verdict),
        statement: decision.statement.clone(),
        evidence: vec!["hypotheses".into(), "criteria".into(), "certificates".into()],
        reasons: decision.reasons.clone(),
    };
    Ok(Outcome { stages, conclusion: Some(conclusion), data: kind, notes })
}

fn source_name(s: &ProfileSource) -> String {
    match s {
        ProfileSource::Synthetic => "synthetic".into(),
        ProfileSource::Geometric { name } => format!("{name} geometric"),
    }
}

fn record_stages(r: &InstabilityRecord, stages: &mut Vec<Stage>, sink: &mut Sink) -> Result<()> {
    let failing: Vec<&str> =
        r.report.sub_verdicts.iter().filter(|s| label(&s.status) != "affirmative").map(|s| s.name.as_str()).collect();
    stages.push(Stage::new(
        "hypotheses",
        label(&r.report.overall),
        if failing.is_empty() {
            format!("{}: every condition affirmative", label(&r.report.mode))
        } else {
            format!("{}: not affirmative: {}", label(&r.report.mode), failing.join(", "))
        },
        &r.report,
    ));
    let n = &r.criteria.nonintegrable;
    stages.push(Stage::new(
        "criteria",
        label(&r.criteria.verdict),
        format!(
            "A = {}; 1/v probe {}, A v probe {}",
            r.potential,
            label(&n.inverse_weight.verdict),
            label(&n.weighted_potential.verdict)
        ),
        &r.criteria,
    ));
    if let Some(int) = &r.criteria.integrable {
        sink.csv(
            "ratio_trace.csv",
            &["t", "root_potential", "ratio", "ratio_lower", "ratio_upper"],
            int.trace.iter().map(|s| {
                let f = |x: Option<f64>| x.unwrap_or(f64::NAN);
                vec![s.t, s.root_potential, f(s.ratio), f(s.ratio_bracket.0), f(s.ratio_bracket.1)]
            }),
        )?;
    }
    let sol = &r.solution;
    sink.csv("solution.csv", &["t", "z", "w"], sol.rows().map(|(t, z, w)| vec![t, z, w]))?;
    write_zeros(sink, &r.zeros)?;
    stages.push(Stage::new(
        "solve",
        format!("{} ZEROS", r.zeros.len()),
        format!("{} start, {} nodes on [{}, {}]", label(&r.start_kind), sol.grid().len(), sol.t_start(), sol.t_end()),
        json!({ "start_kind": r.start_kind, "zeros": r.zeros }),
    ));
    write_certificates(sink, &r.certificates)?;
    stages.push(certificate_stage(&r.certificates));
    Ok(())
}

fn probe(cfg: &RunConfig, p: &Probe, sink: &mut Sink) -> Result<Outcome> {
    let surf = surface(cfg, &p.surface)?;
    let window = (p.window[0], p.window[1]);
    let stage = if cfg.command == Command::ProbeGauss {
        let c = equator_crossings(&surf, &p.vector, window, p.samples)?;
        sink.csv(
            "crossings.csv",
            &["s", "crossing", "identically_zero", "residual"],
            c.samples.iter().map(|x| {
                vec![x.s, x.crossing as u8 as f64, x.identically_zero as u8 as f64, x.residual.unwrap_or(f64::NAN)]
            }),
        )?;
        let verdict = if c.crossing_count == c.samples.len() {
            "EVERY_SAMPLE"
        } else if c.crossing_count == 0 {
            "NO_SAMPLE"
        } else {
            "SOME_SAMPLES"
        };
        let worst = c.samples.iter().filter_map(|x| x.residual).fold(0.0, f64::max);
        Stage::new(
            "equator_crossings",
            verdict,
            format!("{} of {} parallels meet the equator, max residual {worst:.3e}", c.crossing_count, c.samples.len()),
            &c,
        )
    } else {
        let e = tangent_envelope_probe(&surf, &p.vector, window, p.samples)?;
        let summary = match &e.witness {
            Some(w) => format!("tangent hyperplane at s = {} with residual {:.3e}", w.s, w.residual),
            None => "no tangent hyperplane through the point in the window".into(),
        };
        Stage::new("tangent_envelope", label(&e.verdict), summary, &e)
    };
    let notes = vec![format!("surface {} in dimension m = {}", surf.profile.name(), surf.m)];
    Ok(Outcome { stages: vec![stage], conclusion: None, data: DataKind::Geometric, notes })
}
