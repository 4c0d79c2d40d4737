use nalgebra::DMatrix;
use proptest::prelude::*;

use rmean_core::curvature::{
    binomial, elementary_symmetric, jacobi_potential, newton_inequality_gap, newton_sequence, potential_lower_bound,
    trace_identities, ConstantMode, NewtonSequence, PrincipalSpectrum,
};
use rmean_core::models::{radial_data, RadialOptions, RotationHypersurface};
use rmean_core::oscillation::{
    solve_interior_cauchy, solve_singular_cauchy, CoefficientProfile, CriterionVerdict, PotentialProfile, RadialMap,
    SolverOptions,
};
use rmean_core::quadrature::integrate;
use rmean_core::stability::{
    check_theorem1, instability_verdict, potential_profile, Branch, CheckOptions, Conclusion, GeometricProfileData,
    HypothesisMode, HypothesisReport, Overall, PotentialMode, RayleighCertificate, Theorem,
};

fn symmetric_form() -> impl Strategy<Value = DMatrix<f64>> {
    (2usize..=10).prop_flat_map(|m| {
        prop::collection::vec(-1.0f64..1.0, m * m).prop_map(move |e| {
            let raw = DMatrix::from_vec(m, m, e);
            (&raw + raw.transpose()) * 0.5
        })
    })
}

fn positive_spectrum() -> impl Strategy<Value = Vec<f64>> {
    (2usize..=10).prop_flat_map(|m| prop::collection::vec(1e-3f64..1.0, m))
}

fn spectrum() -> impl Strategy<Value = Vec<f64>> {
    (2usize..=10).prop_flat_map(|m| prop::collection::vec(-2.0f64..2.0, m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn trace_identities_hold(a in symmetric_form()) {
        let m = a.nrows();
        for j in 1..m {
            let r = trace_identities(&a, j).unwrap();
            prop_assert!(r.max_relative() <= 1e-10, "m={m} j={j} {:?}", r.relative());
        }
        let seq = newton_sequence(&a).unwrap();
        prop_assert!(seq.get(m).amax() <= 1e-10 * a.norm().max(1.0).powi(m as i32));
    }

    #[test]
    fn eigenbasis_and_matrix_paths_agree(a in symmetric_form()) {
        let seq = newton_sequence(&a).unwrap();
        let eig = nalgebra::SymmetricEigen::new(a.clone());
        let k = PrincipalSpectrum::new(eig.eigenvalues.iter().copied().collect()).unwrap();
        let diag = NewtonSequence::from_spectrum(&k);
        for j in 0..=a.nrows() {
            let rotated = &eig.eigenvectors * diag.get(j) * eig.eigenvectors.transpose();
            let scale = seq.get(j).norm().max(1.0);
            prop_assert!((&rotated - seq.get(j)).amax() <= 1e-10 * scale, "j={j}");
        }
    }

    #[test]
    fn mean_curvature_normalization(k in spectrum()) {
        let m = k.len();
        let c = elementary_symmetric(&PrincipalSpectrum::new(k).unwrap());
        prop_assert_eq!(c.s(0), 1.0);
        prop_assert_eq!(c.h(0), 1.0);
        for j in 0..=m {
            prop_assert!((binomial(m, j) * c.h(j) - c.s(j)).abs() <= 1e-12 * c.s(j).abs().max(1.0));
        }
    }

    #[test]
    fn scaling_and_orientation(k in spectrum(), lambda in 0.1f64..4.0) {
        let m = k.len();
        let base = elementary_symmetric(&PrincipalSpectrum::new(k.clone()).unwrap());
        let scaled = elementary_symmetric(&PrincipalSpectrum::new(k.iter().map(|x| lambda * x).collect()).unwrap());
        let flipped = elementary_symmetric(&PrincipalSpectrum::new(k.iter().map(|x| -x).collect()).unwrap());
        for j in 0..=m {
            let expect = lambda.powi(j as i32) * base.h(j);
            prop_assert!((scaled.h(j) - expect).abs() <= 1e-11 * expect.abs().max(1.0) * 4f64.powi(j as i32));
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert_eq!(flipped.h(j), sign * base.h(j));
        }
    }

    #[test]
    fn newton_gap_nonnegative(k in positive_spectrum()) {
        let kappa = PrincipalSpectrum::new(k.clone()).unwrap();
        for j in 1..k.len() {
            prop_assert!(newton_inequality_gap(&kappa, j).unwrap() >= -1e-12);
        }
    }

    #[test]
    fn umbilical_gap_vanishes(m in 2usize..=10, c in 0.0f64..=1.0, big in 1.0f64..10.0) {
        let kappa = PrincipalSpectrum::umbilical(m, c).unwrap();
        for j in 1..m {
            prop_assert!(newton_inequality_gap(&kappa, j).unwrap().abs() <= 1e-12);
        }
        // beyond unit curvature the terms H_j² grow, so the bound is relative
        let kappa = PrincipalSpectrum::umbilical(m, big).unwrap();
        for j in 1..m {
            let scale = big.powi(2 * j as i32);
            prop_assert!(newton_inequality_gap(&kappa, j).unwrap().abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn corrected_bound_below_potential(k in positive_spectrum()) {
        let kappa = PrincipalSpectrum::new(k.clone()).unwrap();
        for j in 0..=k.len() - 2 {
            let p = jacobi_potential(&kappa, j).unwrap();
            let b = potential_lower_bound(&kappa, j, ConstantMode::Corrected).unwrap();
            prop_assert!(p - b >= -1e-10, "j={j}: {p} < {b}");
        }
    }

    #[test]
    fn three_dim_minimal_potential_is_norm(k in prop::collection::vec(-2.0f64..2.0, 3)) {
        let p = jacobi_potential(&PrincipalSpectrum::new(k.clone()).unwrap(), 0).unwrap();
        let sq: f64 = k.iter().map(|x| x * x).sum();
        prop_assert!((p - sq).abs() <= 1e-12 * sq.max(1.0));
    }

    #[test]
    fn weight_scaling_leaves_solution(c in 0.01f64..100.0) {
        let t_max = 30.0;
        let opts = SolverOptions::default();
        let a = PotentialProfile::new(RadialMap::constant(1.0), t_max).unwrap();
        let v = CoefficientProfile::new(RadialMap::power(1.0, 2.0), t_max).unwrap();
        let cv = v.scaled(c).unwrap();
        let s1 = solve_singular_cauchy(&v, &a, 1.0, t_max, &opts).unwrap();
        let s2 = solve_singular_cauchy(&cv, &a, 1.0, t_max, &opts).unwrap();
        for i in 1..=300 {
            let t = t_max * i as f64 / 300.0;
            prop_assert!((s1.eval_z(t) - s2.eval_z(t)).abs() <= 1e-9, "t={t}");
        }
    }

    #[test]
    fn gate_needs_every_link(
        overall in prop::sample::select(vec![Overall::Satisfied, Overall::NotSatisfied, Overall::Inconclusive]),
        osc in prop::sample::select(vec![CriterionVerdict::Oscillatory, CriterionVerdict::Inconclusive]),
        passes in prop::collection::vec(any::<bool>(), 0..6),
    ) {
        let report = HypothesisReport {
            mode: HypothesisMode::Thm1Ii,
            constant_mode: ConstantMode::Corrected,
            sub_verdicts: vec![],
            notes: vec![],
            overall,
        };
        let certs: Vec<RayleighCertificate> = passes
            .iter()
            .enumerate()
            .map(|(i, &p)| RayleighCertificate {
                pair_index: i, t1: i as f64, t2: i as f64 + 1.0, q: 0.0, psi_scale: 1.0, energy: 1.0,
                lambda_bound: 0.0, relative: 0.0, passes: p,
            })
            .collect();
        let d = instability_verdict(Theorem::GaussMap, &report, osc, &certs);
        let affirmative = overall == Overall::Satisfied
            && osc == CriterionVerdict::Oscillatory
            && !passes.is_empty()
            && passes.iter().all(|p| *p);
        prop_assert_eq!(d.verdict == Conclusion::Conclusion, affirmative);
        prop_assert_eq!(d.statement.is_some(), affirmative);
    }
}

#[test]
fn newton_equality_needs_umbilic() {
    // well-separated positive spectra stay strictly inside the inequality
    let kappa = PrincipalSpectrum::new(vec![0.5, 0.6, 0.9, 1.0]).unwrap();
    for j in 1..4 {
        assert!(newton_inequality_gap(&kappa, j).unwrap() > 1e-6);
    }
}

#[test]
fn picard_layer_matches_interior_restart() {
    let t_max = 30.0;
    let opts = SolverOptions::default();
    for (v, a) in
        [(RadialMap::power(1.0, 2.0), RadialMap::constant(1.0)), (RadialMap::power(1.0, 1.0), RadialMap::constant(1.0))]
    {
        let v = CoefficientProfile::new(v, t_max).unwrap();
        let a = PotentialProfile::new(a, t_max).unwrap();
        let sol = solve_singular_cauchy(&v, &a, 1.0, t_max, &opts).unwrap();
        let eps = sol.layer().expect("singular start has a layer").width;
        let z = sol.eval_z(eps);
        let zp = sol.eval_w(eps) / v.eval(eps);
        let restart = solve_interior_cauchy(&v, &a, eps, z, zp, t_max, &opts).unwrap();
        for i in 1..=200 {
            let t = eps + (t_max - eps) * i as f64 / 200.0;
            assert!((sol.eval_z(t) - restart.eval_z(t)).abs() <= 1e-8, "t={t}");
        }
    }
}

#[test]
fn lower_bound_potential_below_exact_on_sphere() {
    // the cap of the unit sphere around a pole has all k_i = 1
    let sph = RotationHypersurface::sphere_profile(3, (0.0, 2.5)).unwrap();
    let data = radial_data(&sph, 1, &RadialOptions::default()).unwrap();
    let lb = potential_profile(&data, PotentialMode::LowerBound, ConstantMode::Corrected).unwrap();
    let ex = potential_profile(&data, PotentialMode::Exact, ConstantMode::Corrected).unwrap();
    for i in 1..=200 {
        let t = 2.5 * i as f64 / 200.0;
        assert!(lb.eval(t) <= ex.eval(t) + 1e-10, "t={t}");
    }
}

#[test]
fn threshold_monotone_in_curvature() {
    let e = RadialMap::exponential(1.0, 2.0);
    let mut last = f64::INFINITY;
    let mut seen_satisfied = false;
    for h in [0.05, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0] {
        let data = GeometricProfileData::synthetic(3, 1, h, e.clone(), e.clone(), 100.0);
        let r = check_theorem1(&data, Branch::Ii, ConstantMode::Corrected, &CheckOptions::default()).unwrap();
        let threshold = r
            .sub_verdicts
            .iter()
            .flat_map(|s| &s.evidence)
            .find_map(|e| match e {
                rmean_core::stability::Evidence::Limsup { threshold, .. } => Some(*threshold),
                _ => None,
            })
            .unwrap();
        assert!(threshold < last);
        last = threshold;
        if seen_satisfied {
            assert_eq!(r.overall, Overall::Satisfied, "H = {h}");
        }
        seen_satisfied |= r.overall == Overall::Satisfied;
    }
    assert!(seen_satisfied);
}

#[test]
fn catenoid_coarea() {
    let t_end = 20.0;
    let cat = RotationHypersurface::catenoid(2, (0.0, t_end)).unwrap();
    let opts = RadialOptions { assert_pole_chart: true, ..Default::default() };
    let data = radial_data(&cat, 0, &opts).unwrap();
    for t in [0.5, 3.0, 10.0, 20.0] {
        let numeric = integrate(|s| data.v_j.eval(s), 0.0, t, 1e-12, 0.0).value;
        let analytic = std::f64::consts::PI * (t * (1.0 + t * t).sqrt() + t.asinh());
        assert!((numeric - analytic).abs() <= 1e-6 * analytic, "t={t}: {numeric} vs {analytic}");
    }
}

#[test]
fn sphere_and_catenoid_pointwise_invariants() {
    let sph = RotationHypersurface::sphere_profile(4, (0.0, std::f64::consts::PI)).unwrap();
    let cat = RotationHypersurface::catenoid(2, (-30.0, 30.0)).unwrap();
    for i in 1..300 {
        let s = std::f64::consts::PI * i as f64 / 300.0;
        let k = sph.principal_curvatures(s).unwrap();
        for j in 1..4 {
            assert!(newton_inequality_gap(&k, j).unwrap().abs() <= 1e-12);
        }
        let sc = -30.0 + 60.0 * i as f64 / 300.0;
        let kc = cat.principal_curvatures(sc).unwrap();
        assert!(elementary_symmetric(&kc).s(1).abs() <= 1e-10);
        assert_eq!(kc.rank(1e-8), 2);
        let th = [sc.cos(), sc.sin()];
        let nu = cat.gauss_map(sc, &th).unwrap();
        assert!((nu.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() <= 1e-10);
    }
}
