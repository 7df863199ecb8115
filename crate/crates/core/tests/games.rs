use aog::games::{
    make_appendix_d_toy, make_appendix_e_instance, make_bilinear_saddle, make_random_linear_monotone,
    make_shifted_rotation, probe_operator, ActionProfile, GameOracle,
};
use aog::Vector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instances() -> Vec<(&'static str, Box<dyn GameOracle>)> {
    vec![
        ("bilinear 1+1", Box::new(make_bilinear_saddle(1.0, 1.0, (1, 1)).unwrap())),
        ("bilinear 2+2", Box::new(make_bilinear_saddle(2.5, 3.0, (2, 2)).unwrap())),
        ("appendix D toy", Box::new(make_appendix_d_toy().unwrap())),
        ("appendix E n=2", Box::new(make_appendix_e_instance(2, 200.0).unwrap())),
        ("appendix E n=3", Box::new(make_appendix_e_instance(3, 200.0).unwrap())),
        ("appendix E n=20", Box::new(make_appendix_e_instance(20, 200.0).unwrap())),
        ("random monotone", Box::new(make_random_linear_monotone(&[2, 3, 1], Some(2.0), 8).unwrap())),
        ("random unbounded", Box::new(make_random_linear_monotone(&[2, 2], None, 3).unwrap())),
        ("shifted rotation", Box::new(make_shifted_rotation(1.0, 0.05, [0.5, -2.0]).unwrap())),
    ]
}

#[test]
fn monotonicity_and_lipschitz_probes() {
    for (name, game) in instances() {
        let r = probe_operator(game.as_ref(), 1000, 2024);
        assert!(r.min_monotone_ratio >= -1e-10, "{name}: {}", r.min_monotone_ratio);
        assert!(
            r.max_lipschitz_ratio <= game.lipschitz() + 1e-8,
            "{name}: {} > {}",
            r.max_lipschitz_ratio,
            game.lipschitz()
        );
    }
}

#[test]
fn zero_sum_losses_cancel() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    for (name, game) in instances() {
        if !game.is_zero_sum() {
            continue;
        }
        checked += 1;
        for _ in 0..200 {
            let z = game.joint_set().sample(&mut rng, 10.0);
            let l1 = game.loss(0, &z).unwrap();
            let l2 = game.loss(1, &z).unwrap();
            assert!((l1 + l2).abs() <= 1e-12 * l1.abs().max(1.0), "{name}: {l1} + {l2}");
        }
    }
    assert!(checked >= 6);
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = 1e-5;
    for (name, game) in instances() {
        if !game.has_losses() {
            continue;
        }
        let layout = game.layout().clone();
        for _ in 0..20 {
            let z = game.joint_set().sample(&mut rng, 5.0);
            let v = game.eval(&z);
            for i in 0..layout.num_players() {
                for j in layout.range(i) {
                    let mut zp = z.clone();
                    let mut zm = z.clone();
                    zp[j] += h;
                    zm[j] -= h;
                    let fd = (game.loss(i, &zp).unwrap() - game.loss(i, &zm).unwrap()) / (2.0 * h);
                    let scale = v[j].abs().max(1.0);
                    assert!((fd - v[j]).abs() <= 1e-5 * scale, "{name} coord {j}: {fd} vs {}", v[j]);
                }
            }
        }
    }
}

#[test]
fn gradient_returns_per_player_slices() {
    let game = make_random_linear_monotone(&[2, 3, 1], Some(2.0), 8).unwrap();
    let z = Vector::from_fn(6, |i, _| 0.1 * i as f64);
    let profile = ActionProfile::new(z.clone(), game.layout().clone()).unwrap();
    let g = game.gradient(&profile).unwrap();
    let v = game.eval(&z);
    assert_eq!(g.num_players(), 3);
    assert_eq!(g.values(), &v);
    assert_eq!(g.block(1).len(), 3);
}

#[test]
fn best_response_beats_every_sampled_deviation() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (name, game) in instances() {
        for i in 0..game.num_players() {
            if !game.supports_best_response(i) {
                continue;
            }
            let layout = game.layout().clone();
            for _ in 0..20 {
                let z = game.joint_set().sample(&mut rng, 1.0);
                let (br, value) = game.best_response(i, &z).unwrap();
                let mut with_br = z.clone();
                with_br.rows_mut(layout.range(i).start, br.len()).copy_from(&br);
                assert!((game.loss(i, &with_br).unwrap() - value).abs() <= 1e-9 * value.abs().max(1.0));
                for _ in 0..50 {
                    let dev = game.player_sets()[i].sample(&mut rng, 1.0);
                    let mut zd = z.clone();
                    zd.rows_mut(layout.range(i).start, dev.len()).copy_from(&dev);
                    assert!(value <= game.loss(i, &zd).unwrap() + 1e-12, "{name} player {i}");
                }
            }
        }
    }
}

#[test]
fn known_equilibria_are_fixed_points() {
    let game = make_shifted_rotation(1.0, 0.05, [0.5, -2.0]).unwrap();
    let star = game.equilibrium().unwrap();
    assert!((star[0] - 0.5).abs() < 1e-12 && (star[1] + 2.0).abs() < 1e-12);
    assert!(game.eval(&star).norm() < 1e-12);
    let game = make_random_linear_monotone(&[2, 2], None, 3).unwrap();
    let star = game.equilibrium().unwrap();
    assert!(game.eval(&star).norm() < 1e-9);
}
