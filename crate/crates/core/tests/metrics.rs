use aog::games::{
    make_appendix_d_toy, make_appendix_e_instance, make_bilinear_saddle, make_random_linear_monotone,
    ActionProfile, GameOracle,
};
use aog::geometry::FeasibleSet;
use aog::harness::{run_self_play_on, SelfPlaySetup};
use aog::learners::Algorithm;
use aog::metrics::{
    dynamic_regret, external_regret, measure_equilibrium, second_order_variation, DynamicMode,
};
use aog::Vector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bounded_games() -> Vec<Box<dyn GameOracle>> {
    vec![
        Box::new(make_bilinear_saddle(1.0, 1.0, (1, 1)).unwrap()),
        Box::new(make_bilinear_saddle(0.7, 2.0, (3, 3)).unwrap()),
        Box::new(make_appendix_d_toy().unwrap()),
        Box::new(make_appendix_e_instance(5, 3.0).unwrap()),
        Box::new(make_random_linear_monotone(&[2, 1, 2], Some(1.5), 17).unwrap()),
    ]
}

#[test]
fn ordering_chain_on_random_profiles() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for game in bounded_games() {
        let d = game.joint_set().diameter().unwrap();
        for _ in 0..300 {
            let z = game.joint_set().sample(&mut rng, 1.0);
            let p = ActionProfile::new(z, game.layout().clone()).unwrap();
            let m = measure_equilibrium(game.as_ref(), &p).unwrap();
            let gap = m.gap.unwrap();
            assert!(gap <= d * m.r_tan + 1e-9, "gap {gap} > D·r_tan {}", d * m.r_tan);
            if let Some(tgap) = m.tgap_exact {
                assert!(tgap <= gap + 1e-9, "tgap {tgap} > gap {gap}");
                assert!(tgap >= -1e-12);
            }
        }
    }
}

#[test]
fn ordering_chain_along_self_play() {
    for game in bounded_games() {
        let d = game.joint_set().diameter().unwrap();
        let x1 = game.joint_set().project(&Vector::from_element(game.layout().total_dim(), 0.3)).unwrap();
        let setup = SelfPlaySetup::uniform(Algorithm::Aog, None, game.num_players(), 500, x1);
        let trace = run_self_play_on(game.as_ref(), &setup).unwrap();
        for r in &trace.records {
            let gap = r.gap.unwrap();
            assert!(gap <= d * r.r_tan.unwrap() + 1e-9);
            if let Some(tgap) = r.tgap_exact {
                assert!(tgap <= gap + 1e-9);
            }
        }
    }
}

/// Best fixed action by exhaustive search over a grid of the interval.
fn grid_best_total(grads: &[f64], lo: f64, hi: f64) -> f64 {
    (0..=20_000)
        .map(|k| lo + (hi - lo) * k as f64 / 20_000.0)
        .map(|x| grads.iter().map(|g| g * x).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn external_regret_matches_grid_comparator() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let set = FeasibleSet::boxed(Vector::from_element(1, -0.5), Vector::from_element(1, 2.0)).unwrap();
    for _ in 0..20 {
        let n = rng.random_range(1..40);
        let plays: Vec<Vector> = (0..n).map(|_| Vector::from_element(1, rng.random_range(-0.5..2.0))).collect();
        let grads: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let gv: Vec<Vector> = grads.iter().map(|g| Vector::from_element(1, *g)).collect();
        let played: f64 = plays.iter().zip(&grads).map(|(x, g)| x[0] * g).sum();
        let oracle = played - grid_best_total(&grads, -0.5, 2.0);
        let r = external_regret(&plays, &gv, &set).unwrap();
        assert!((r - oracle).abs() <= 1e-12 * oracle.abs().max(1.0), "{r} vs {oracle}");
    }
}

#[test]
fn dynamic_regret_exact_on_bilinear() {
    let game = make_bilinear_saddle(1.0, 1.0, (1, 1)).unwrap();
    let profiles = vec![Vector::from_vec(vec![0.5, 0.5]), Vector::from_vec(vec![-0.25, 1.0])];
    let (totals, mode) = dynamic_regret(&profiles, &game).unwrap();
    assert_eq!(mode, DynamicMode::Exact);
    // f(x, y) = -xy on [-1,1]²; player 1 minimizes f, player 2 maximizes it.
    let mut oracle = [0.0, 0.0];
    for z in &profiles {
        let (x, y) = (z[0], z[1]);
        let f = |a: f64, b: f64| -a * b;
        let best_x = [-1.0, 1.0].iter().map(|a| f(*a, y)).fold(f64::INFINITY, f64::min);
        let best_y = [-1.0, 1.0].iter().map(|b| -f(x, *b)).fold(f64::INFINITY, f64::min);
        oracle[0] += f(x, y) - best_x;
        oracle[1] += -f(x, y) - best_y;
    }
    assert!((totals[0] - oracle[0]).abs() < 1e-12 && (totals[1] - oracle[1]).abs() < 1e-12);
    assert_eq!(oracle, [0.25 + 1.25, 0.75 + 0.0]);
}

#[test]
fn self_play_variation_accounting_matches_learners() {
    let game = make_random_linear_monotone(&[2, 3], Some(1.0), 4).unwrap();
    let mut setup = SelfPlaySetup::uniform(Algorithm::AogAdaptive, None, 2, 300, Vector::zeros(5));
    setup.log_iterates = 300;
    let trace = run_self_play_on(&game, &setup).unwrap();
    let last = trace.last();
    assert_eq!(last.s, trace.learner_variation);
    for i in 0..2 {
        let range = game.layout().range(i);
        let g: Vec<Vector> = trace.iterates.iter().map(|s| s.v_half.rows(range.start, range.len()).into_owned()).collect();
        assert_eq!(second_order_variation(&g).unwrap(), last.s[i]);
    }
}

#[test]
fn potential_agrees_with_direct_formula() {
    let cases: Vec<(Box<dyn GameOracle>, Vector)> = vec![
        (Box::new(make_bilinear_saddle(1.0, 1.0, (1, 1)).unwrap()), Vector::from_vec(vec![0.5, 0.5])),
        (Box::new(make_bilinear_saddle(1.0, 1.0, (2, 2)).unwrap()), Vector::from_vec(vec![0.5, -0.3, 0.2, 0.7])),
        (Box::new(make_appendix_e_instance(20, 200.0).unwrap()), Vector::from_element(40, 0.05)),
    ];
    for (game, x1) in cases {
        let mut setup = SelfPlaySetup::uniform(Algorithm::Aog, None, 2, 10, x1.clone());
        setup.log_iterates = 10;
        let trace = run_self_play_on(game.as_ref(), &setup).unwrap();
        let eta = trace.common_eta.unwrap();
        let d = trace.diameter.unwrap();
        let it = &trace.iterates;
        for t in 2..=10usize {
            let (prev, cur) = (&it[t - 2], &it[t - 1]);
            let tf = t as f64;
            let c = (&prev.base - &prev.v_half * eta + (&x1 - &prev.base) / tf - &cur.base) / eta;
            let a = (&cur.v_base + &c) * eta;
            let b = (&cur.v_base - &prev.v_half) * eta;
            let direct = tf * (tf + 1.0) / 2.0 * (a.norm_squared() + b.norm_squared()) + tf * a.dot(&(&cur.base - &x1));
            let recorded = trace.records[t - 1].potential.unwrap();
            assert!((direct - recorded).abs() <= 1e-12 * direct.abs().max(1.0), "t={t}: {direct} vs {recorded}");
            if t == 2 {
                assert!(recorded <= 9.0 * d * d);
            }
        }
        assert!(trace.records[0].potential.is_none());
    }
}
