use dbcd::model::full_gradient;
use dbcd::{
    compute_delta_t, line_search, reference_solve, run_method, run_method_observed, synth_dataset,
    Dataset, Error, InnerStop, LossKind, Method, MethodConfig, ModelState, RunStop, SparseMatrix,
    SynthConfig, Trajectory,
};
use proptest::prelude::*;

fn lambda_max(data: &Dataset<f64>) -> f64 {
    full_gradient(&ModelState::zeros(data, 1.0), data)
        .iter()
        .fold(0.0, |a, v| a.max(v.abs()))
}

fn small_problem(seed: u64, loss: LossKind) -> Dataset<f64> {
    let mut sc = SynthConfig::new(250, 60, 0.08, 0.2, seed);
    sc.loss = loss;
    sc.noise = 0.3;
    sc.group_size = 3;
    sc.correlation = 0.6;
    synth_dataset(&sc).unwrap().train
}

/// Dense, well-conditioned least-squares problem with full column rank.
fn strongly_convex_ls(seed: u64) -> Dataset<f64> {
    let mut sc = SynthConfig::new(400, 20, 1.0, 0.5, seed);
    sc.loss = LossKind::LeastSquares;
    sc.noise = 0.5;
    synth_dataset(&sc).unwrap().train
}

fn one_point_ls() -> Dataset<f64> {
    Dataset::new(
        SparseMatrix::from_dense(1, 1, &[1.0]).unwrap(),
        vec![1.0],
        LossKind::LeastSquares,
    )
    .unwrap()
}

#[test]
fn delta_examples() {
    assert_eq!(
        compute_delta_t(&[0.5, -1.0], &[0.0, 0.0], &[1.0, 2.0], 0.3),
        0.0
    );
    assert_eq!(compute_delta_t(&[0.0], &[-1.0], &[1.0], 2.0), -2.0);
    assert_eq!(compute_delta_t(&[-3.0], &[1.0], &[0.0], 1.0), -2.0);
}

#[test]
fn line_search_examples() {
    // F(w) = 0.5 (w - 1)^2 at w = 2, shifted copy of F = 0.5 w^2 at w = 1
    let data = one_point_ls();
    let y = [2.0];
    let no_l1 = |_: f64| Ok(0.0);
    let unit = line_search(&data, &y, &[-1.0], 0.5, -1.0, 0.5, 0.01, no_l1).unwrap();
    assert_eq!((unit.alpha, unit.trials, unit.f_new), (1.0, 1, 0.0));

    let halved = line_search(&data, &y, &[-3.0], 0.5, -3.0, 0.5, 0.01, no_l1).unwrap();
    assert_eq!((halved.alpha, halved.trials), (0.5, 2));
    assert_eq!(halved.f_new, 0.125);

    let zero = line_search(&data, &y, &[0.0], 0.5, 0.0, 0.5, 0.01, no_l1).unwrap();
    assert_eq!((zero.alpha, zero.trials), (1.0, 1));
}

#[test]
fn line_search_fails_on_ascent_direction() {
    let data = one_point_ls();
    let err = line_search(&data, &[1.0], &[1.0], 0.0, -1.0, 0.5, 0.01, |_| Ok(0.0)).unwrap_err();
    assert!(matches!(err, Error::LineSearch { trials: 61 }), "{err}");
}

#[test]
fn large_lambda_converges_at_zero() {
    let data = small_problem(1, LossKind::Logistic);
    let lambda = lambda_max(&data) * 1.01;
    for method in Method::ALL {
        let run = run_method(&MethodConfig::new(method, lambda, 3), &data).unwrap();
        assert_eq!(run.stop, RunStop::Converged, "{method}");
        assert_eq!(run.records.len(), 1);
        assert!(run.state.w.iter().all(|v| *v == 0.0));
    }
}

#[test]
fn every_method_solves_strongly_convex_ls_on_one_node() {
    let data = strongly_convex_ls(3);
    let lambda = 0.05 * lambda_max(&data);
    let reference = reference_solve(&data, lambda, 1e-12, 100_000);
    for method in Method::ALL {
        let mut cfg = MethodConfig::new(method, lambda, 1);
        cfg.wss_frac = 1.0;
        cfg.max_outer = 5000;
        let run = run_method(&cfg, &data).unwrap();
        assert_eq!(run.stop, RunStop::Converged, "{method}");
        assert!(run.final_kkt() <= 1e-6, "{method}: kkt {}", run.final_kkt());
        assert!(
            (run.state.f_value - reference.f_star).abs() <= 1e-8 * reference.f_star,
            "{method}"
        );
    }
}

fn tail_ratio(run: &Trajectory<f64>, f_star: f64, window: usize) -> f64 {
    let tail = &run.records[run.records.len() - window - 1..];
    let logs: Vec<f64> = tail.iter().map(|r| (r.f - f_star).ln()).collect();
    ((logs[window] - logs[0]) / window as f64).exp()
}

#[test]
fn line_search_methods_converge_geometrically_on_strongly_convex_ls() {
    let data = strongly_convex_ls(4);
    let lambda = 0.05 * lambda_max(&data);
    let reference = reference_solve(&data, lambda, 1e-14, 1_000_000);
    for method in [Method::DbcdR, Method::DbcdS, Method::PcdR, Method::PcdS] {
        let mut cfg = MethodConfig::new(method, lambda, 2);
        cfg.wss_frac = 0.2;
        cfg.f_star = Some(reference.f_star);
        cfg.rfvd_stop = Some(-10.0);
        cfg.kkt_tol = 0.0;
        cfg.max_outer = 10_000;
        let run = run_method(&cfg, &data).unwrap();
        assert_eq!(run.stop, RunStop::RfvdTarget, "{method}");
        assert!(run.records.len() > 5, "{method}: too short to fit");
        let ratio = tail_ratio(&run, reference.f_star, 20.min(run.records.len() - 1));
        assert!(ratio < 1.0, "{method}: tail ratio {ratio}");
    }
}

#[test]
fn both_delta_routes_agree_and_line_search_matches_direct_evaluation() {
    let data = small_problem(2, LossKind::Logistic);
    let lambda = 0.1 * lambda_max(&data);
    for method in [Method::DbcdR, Method::DbcdS, Method::PcdR, Method::PcdS] {
        let mut cfg = MethodConfig::new(method, lambda, 3);
        cfg.max_outer = 60;
        let mut steps = 0;
        run_method_observed(&cfg, &data, |d, state| {
            let route = compute_delta_t(&d.g, &d.d, &d.w_before, lambda);
            let logged = d.delta.unwrap();
            assert!(
                (route - logged).abs() <= 1e-10 * (1.0 + route.abs()),
                "{method}: {route} vs {logged}"
            );
            let direct = ModelState::from_weights(&data, state.w.clone(), lambda).f_value;
            assert!((direct - d.f_after).abs() <= 1e-10 * direct, "{method}");
            steps += 1;
        })
        .unwrap();
        assert!(steps > 0);
    }
}

#[test]
fn directions_vanish_off_the_selected_set() {
    let data = small_problem(3, LossKind::SquaredHinge);
    let lambda = 0.1 * lambda_max(&data);
    for method in Method::ALL {
        let mut cfg = MethodConfig::new(method, lambda, 4);
        cfg.max_outer = 30;
        let wss = cfg.wss(data.m());
        let mut prev = vec![0.0; data.m()];
        run_method_observed(&cfg, &data, |d, state| {
            assert!(d.support.len() <= wss * 4, "{method}");
            for (j, (now, before)) in state.w.iter().zip(&prev).enumerate() {
                if !d.support.contains(&j) {
                    assert_eq!(now, before, "{method}: w_{j} moved off the support");
                }
            }
            prev.clone_from(&state.w);
        })
        .unwrap();
    }
}

#[test]
fn trajectory_records_are_well_formed() {
    let data = small_problem(5, LossKind::Logistic);
    let lambda = 0.1 * lambda_max(&data);
    let f_star = reference_solve(&data, lambda, 1e-11, 100_000).f_star;
    for method in Method::ALL {
        let mut cfg = MethodConfig::new(method, lambda, 2);
        cfg.f_star = Some(f_star);
        cfg.max_outer = 100;
        let run = run_method(&cfg, &data).unwrap();
        for (t, r) in run.records.iter().enumerate() {
            assert_eq!(r.t, t);
            assert!((0.0..=100.0).contains(&r.nnz_pct));
            if r.f > f_star {
                assert!(r.rfvd.is_finite());
            }
            if t > 0 {
                assert!(r.s_size > 0 && r.comp_model > 0.0);
                assert_eq!(r.tau_ls == 0, !method.uses_line_search());
            }
        }
        if method.uses_line_search() {
            assert!(
                run.records.windows(2).all(|p| p[1].rfvd <= p[0].rfvd),
                "{method}"
            );
        }
    }
}

#[test]
fn eps_mode_never_uses_more_inner_work() {
    let data = small_problem(6, LossKind::Logistic);
    let lambda = 0.1 * lambda_max(&data);
    let mut fixed = MethodConfig::new(Method::DbcdS, lambda, 2);
    fixed.mu = 1.0;
    fixed.max_outer = 20;
    let mut eps = fixed.clone();
    eps.inner_stop = InnerStop::EpsMuOverTwo;
    let a = run_method(&fixed, &data).unwrap();
    let b = run_method(&eps, &data).unwrap();
    let total = |r: &Trajectory<f64>| r.records.iter().map(|x| x.comp_model).sum::<f64>();
    assert!(total(&b) <= total(&a));
    assert!(b.records.windows(2).all(|p| p[1].f <= p[0].f));
}

#[test]
fn hydra_with_tiny_eso_multiplier_hits_explosion_guard() {
    let data = small_problem(7, LossKind::LeastSquares);
    let mut cfg = MethodConfig::new(Method::Hydra, 0.01 * lambda_max(&data), 2);
    cfg.hydra_omega = 1e-3;
    cfg.wss_frac = 1.0;
    let run = run_method(&cfg, &data).unwrap();
    assert_eq!(run.stop, RunStop::Diverged);
    assert!(
        run.records.last().unwrap().f > 1e6 * run.records[0].f
            || !run.records.last().unwrap().f.is_finite()
    );
}

#[test]
fn dbcd_spends_more_measured_compute_than_hydra() {
    let data = small_problem(8, LossKind::Logistic);
    let lambda = 0.05 * lambda_max(&data);
    let wall = |method| {
        let mut cfg = MethodConfig::new(method, lambda, 4);
        cfg.max_outer = 150;
        cfg.kkt_tol = 0.0;
        let run = run_method(&cfg, &data).unwrap();
        run.ledger.wall_comp_seconds.iter().sum::<f64>() / run.records.len() as f64
    };
    let hydra = wall(Method::Hydra);
    assert!(wall(Method::DbcdS) > hydra);
    assert!(wall(Method::DbcdR) > hydra);
}

#[test]
fn noiseless_data_is_fit_with_small_lambda() {
    let mut sc = SynthConfig::new(200, 80, 0.3, 1.0, 9);
    sc.n_test = 0;
    let data = synth_dataset::<f64>(&sc).unwrap().train;
    let mut cfg = MethodConfig::new(Method::DbcdS, 1e-4 * lambda_max(&data), 2);
    cfg.wss_frac = 0.5;
    cfg.max_outer = 400;
    let run = run_method(&cfg, &data).unwrap();
    let y = data.matrix.mul_vec(&run.state.w);
    let errors = y
        .iter()
        .zip(&data.labels)
        .filter(|(yi, c)| *yi * *c <= 0.0)
        .count();
    assert!(errors * 100 <= data.n(), "{errors} training errors");
}

#[test]
fn config_validation() {
    let data = small_problem(1, LossKind::Logistic);
    let base = MethodConfig::new(Method::DbcdS, 0.01, 2);
    type Mutation = Box<dyn Fn(&mut MethodConfig<f64>)>;
    let cases: Vec<Mutation> = vec![
        Box::new(|c| c.lambda = 0.0),
        Box::new(|c| c.nodes = 0),
        Box::new(|c| c.nodes = 61),
        Box::new(|c| c.wss_frac = 0.0),
        Box::new(|c| c.wss_frac = 1.5),
        Box::new(|c| c.beta_ls = 1.0),
        Box::new(|c| c.sigma = 0.0),
        Box::new(|c| c.mu = -1.0),
        Box::new(|c| c.nu = 0.0),
        Box::new(|c| c.k = 0),
        Box::new(|c| c.rfvd_stop = Some(-3.0)),
        Box::new(|c| c.f_star = Some(0.0)),
    ];
    for (i, mutate) in cases.iter().enumerate() {
        let mut cfg = base.clone();
        mutate(&mut cfg);
        assert!(
            matches!(run_method(&cfg, &data), Err(Error::Config(_))),
            "case {i}"
        );
    }
    assert!(run_method(&base, &data).is_ok());
}

#[test]
fn method_names_round_trip() {
    for method in Method::ALL {
        assert_eq!(method.to_string().parse::<Method>().unwrap(), method);
    }
    assert_eq!("DBCD-S".parse::<Method>().unwrap(), Method::DbcdS);
    assert!("admm".parse::<Method>().is_err());
}

#[test]
fn f32_runs_track_f64() {
    let mut sc = SynthConfig::new(300, 50, 0.1, 0.2, 11);
    sc.noise = 0.2;
    let d64 = synth_dataset::<f64>(&sc).unwrap().train;
    let d32 = synth_dataset::<f32>(&sc).unwrap().train;
    let lambda = 0.1 * lambda_max(&d64);
    let mut c64 = MethodConfig::new(Method::DbcdS, lambda, 2);
    c64.max_outer = 100;
    c64.kkt_tol = 1e-5;
    let mut c32 = MethodConfig::new(Method::DbcdS, lambda as f32, 2);
    c32.max_outer = 100;
    c32.kkt_tol = 1e-4;
    let r64 = run_method(&c64, &d64).unwrap();
    let r32 = run_method(&c32, &d32).unwrap();
    assert!(r32.records.windows(2).all(|p| p[1].f <= p[0].f));
    assert!((r32.state.f_value as f64 - r64.state.f_value).abs() <= 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decoupled_directions_are_descent(
        entries in prop::collection::vec((-5.0f64..5.0, 0.01f64..5.0, -3.0f64..3.0), 1..20),
        lambda in 0.0f64..2.0,
    ) {
        let g: Vec<f64> = entries.iter().map(|e| e.0).collect();
        let h: Vec<f64> = entries.iter().map(|e| e.1).collect();
        let w: Vec<f64> = entries.iter().map(|e| e.2).collect();
        let support: Vec<usize> = (0..entries.len()).collect();
        let step = dbcd::subprob::decoupled_step(&support, &g, &w, &h, lambda).unwrap();
        let delta = compute_delta_t(&g, &step.d, &w, lambda);
        let curvature: f64 = step.d.iter().zip(&h).map(|(d, h)| h * d * d).sum();
        prop_assert!(delta <= -curvature + 1e-9 * (1.0 + delta.abs()));
    }

    #[test]
    fn thread_count_never_changes_results(seed in 0u64..1000, threads in 2usize..6) {
        let data = small_problem(seed, LossKind::Logistic);
        let mut serial = MethodConfig::new(Method::DbcdS, 0.1 * lambda_max(&data), 4);
        serial.max_outer = 15;
        serial.seed = seed;
        let mut concurrent = serial.clone();
        concurrent.threads = threads;
        let a = run_method(&serial, &data).unwrap();
        let b = run_method(&concurrent, &data).unwrap();
        prop_assert_eq!(&a.state.w, &b.state.w);
        prop_assert_eq!(a.ledger.comm_units().to_bits(), b.ledger.comm_units().to_bits());
    }
}
