use mixdecon::estimator::*;
use mixdecon::noise::NoiseModel;
use mixdecon::numerics::{convolve, lp_distance, NormOrder};
use mixdecon::rng::task_rng;
use mixdecon::targets::{forward_density, sample_mixture, MixingDensity};

fn gaussian() -> NoiseModel {
    NoiseModel::parse("gaussian", 1, "model").unwrap()
}

fn bump() -> MixingDensity {
    MixingDensity::parse("bump", -3.0, 3.0, 1, "target").unwrap()
}

#[test]
fn weights_on_simplex_and_mass_one() {
    let p = bump();
    let h = gaussian();
    let x = sample_mixture(&p, &h, 2000, &mut task_rng(1, 0)).unwrap();
    let fit = fit_minimum_distance(&x, &h, p.support(), &FitOptions::default(), 0.02).unwrap();
    assert!((fit.mixing.mass() - 1.0).abs() < 1e-8);
    assert!(fit.mixing.weights.iter().all(|&w| w >= 0.0));
    // Riemann sum of the sampled atoms.
    assert!((fit.p_hat.mass() - 1.0).abs() < 1e-5);
}

#[test]
fn objective_decreases_along_iterates() {
    let p = bump();
    let h = gaussian();
    let x = sample_mixture(&p, &h, 4000, &mut task_rng(2, 0)).unwrap();
    let fit = fit_minimum_distance(&x, &h, p.support(), &FitOptions::default(), 0.02).unwrap();
    for pair in fit.trace.windows(2) {
        assert!(pair[1] <= pair[0] + 1e-15, "{} -> {}", pair[0], pair[1]);
    }
}

#[test]
fn truth_projected_weights_bound_the_optimum() {
    let p = bump();
    let h = gaussian();
    let x = sample_mixture(&p, &h, 4000, &mut task_rng(3, 0)).unwrap();
    let opts = FitOptions::default();
    let problem = SieveProblem::new(&x, &h, p.support(), &opts).unwrap();
    let (w, trace) = problem.solve(opts.tol, opts.max_iter).unwrap();
    let truth: Vec<f64> = problem.centers.iter().map(|&c| p.value_1d(c)).collect();
    let truth = simplex_projection(&truth.iter().map(|v| v / truth.iter().sum::<f64>()).collect::<Vec<_>>());
    assert!(problem.objective(&truth) >= *trace.last().unwrap());
    assert_eq!(problem.objective(&w), *trace.last().unwrap());
}

#[test]
fn too_few_nodes_rejected() {
    let h = gaussian();
    let opts = FitOptions { nodes: 1, ..FitOptions::default() };
    let err = fit_minimum_distance(&[0.0, 1.0], &h, (-1.0, 1.0), &opts, 0.02).unwrap_err();
    assert!(matches!(err, mixdecon::Error::Domain { ref param, .. } if param == "nodes"));
    assert!(fit_minimum_distance(&[], &h, (-1.0, 1.0), &FitOptions::default(), 0.02).is_err());
}

#[test]
fn iteration_cap_reports_last_iterate() {
    let p = bump();
    let h = gaussian();
    let x = sample_mixture(&p, &h, 1000, &mut task_rng(4, 0)).unwrap();
    let opts = FitOptions { max_iter: 3, tol: 0.0, ..FitOptions::default() };
    match fit_minimum_distance(&x, &h, p.support(), &opts, 0.02) {
        Err(mixdecon::Error::NonConvergence { iterations, last_iterate, .. }) => {
            assert_eq!(iterations, 3);
            assert_eq!(last_iterate.len(), opts.nodes);
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn mixture_error_decreases_in_n() {
    let p = bump();
    let h = gaussian();
    let fw = forward_density(&p, &h, 0.02).unwrap();
    let mut medians = Vec::new();
    for n in [1000usize, 4000, 16000] {
        let mut errs: Vec<f64> = (0..10u64)
            .map(|r| {
                let x = sample_mixture(&p, &h, n, &mut task_rng(77, n as u64 * 100 + r)).unwrap();
                let fit = fit_minimum_distance(&x, &h, p.support(), &FitOptions::default(), 0.02).unwrap();
                let target = fit.f_hat.grid().clone();
                let truth = mixdecon::numerics::GridFunction::sample(target, |y| {
                    // f_p by interpolating the forward grid at the fit's nodes.
                    let g = fw.f.grid();
                    let k = ((y[0] - g.lo(0)) / g.spacing(0)).round();
                    if k < 0.0 || k as usize >= g.count(0) {
                        0.0
                    } else {
                        fw.f.values()[k as usize].re
                    }
                });
                lp_distance(&fit.f_hat, &truth, NormOrder::Finite(1.0)).unwrap()
            })
            .collect();
        errs.sort_by(f64::total_cmp);
        medians.push(0.5 * (errs[4] + errs[5]));
    }
    assert!(medians[0] > medians[1] && medians[1] > medians[2], "{medians:?}");
}

fn spline_forward() -> mixdecon::targets::Forward {
    let p = MixingDensity::parse("spline(qtilde=2)", -2.0, 2.0, 1, "target").unwrap();
    let h = NoiseModel::parse("laplace(theta=0.5)", 1, "model").unwrap();
    forward_density(&p, &h, 0.01).unwrap()
}

#[test]
fn injection_zero_is_identity() {
    let fw = spline_forward();
    let inj = oracle_inject(&fw, 0.0, NormOrder::Finite(2.0), &PerturbShape::BandlimitedBump { omega: 3.0 }).unwrap();
    assert_eq!(inj.p_hat.values(), fw.p.values());
    assert_eq!(inj.f_hat.values(), fw.f.values());
}

#[test]
fn injection_calibrates_norm() {
    let fw = spline_forward();
    for u in [NormOrder::Finite(1.0), NormOrder::Finite(2.0), NormOrder::Infinity] {
        for a_n in [1e-2, 1e-3, 1e-4] {
            let inj = oracle_inject(&fw, a_n, u, &PerturbShape::BandlimitedBump { omega: 3.0 }).unwrap();
            let measured = lp_distance(&inj.f_hat, &fw.f, u).unwrap();
            assert!((measured - a_n).abs() < 1e-6, "u={u} a_n={a_n}: {measured}");
            // f̂ = h * p̂ on the grid.
            let again = convolve(&inj.p_hat, &fw.h).unwrap();
            let diff = again.sub(&inj.f_hat).unwrap().sup_norm();
            assert!(diff < 1e-10, "{diff}");
            assert!(inj.p_hat.re().iter().all(|&v| v >= 0.0));
            assert!((inj.p_hat.mass() - fw.p.mass()).abs() < 1e-10);
        }
    }
}

#[test]
fn random_phase_reproducible() {
    let fw = spline_forward();
    let shape = PerturbShape::RandomPhase { omega_max: 4.0, seed: 9 };
    let a = oracle_inject(&fw, 1e-3, NormOrder::Finite(2.0), &shape).unwrap();
    let b = oracle_inject(&fw, 1e-3, NormOrder::Finite(2.0), &shape).unwrap();
    assert_eq!(a.f_hat.values(), b.f_hat.values());
    let other = PerturbShape::RandomPhase { omega_max: 4.0, seed: 10 };
    let c = oracle_inject(&fw, 1e-3, NormOrder::Finite(2.0), &other).unwrap();
    assert_ne!(a.f_hat.values(), c.f_hat.values());
}

#[test]
fn injection_above_cap_names_limit() {
    let fw = spline_forward();
    let shape = PerturbShape::BandlimitedBump { omega: 3.0 };
    let ok = oracle_inject(&fw, 1e-3, NormOrder::Finite(2.0), &shape).unwrap();
    let err = oracle_inject(&fw, ok.a_max * 1.5, NormOrder::Finite(2.0), &shape).unwrap_err();
    match err {
        mixdecon::Error::Domain { param, message } => {
            assert_eq!(param, "a_n");
            assert!(message.contains("largest feasible"));
        }
        e => panic!("{e}"),
    }
}

#[test]
fn measure_quality_identity() {
    let fw = spline_forward();
    let q = measure_quality(&fw.f, &fw.f, NormOrder::Finite(2.0)).unwrap();
    assert_eq!(q.a_n, 0.0);
    assert_eq!(q.mode, QualityMode::Measured);
}
