mod common;

use ppm_core::dynamics::{best_response_iteration, DynamicsOptions, Termination};
use ppm_core::oracle::{grid_search_equilibria, GridSpec};
use ppm_core::payoff::{payoff_at, ResponseObjective};
use ppm_core::random::{random_game, random_interior_profile, random_profile, InstanceSpec};
use ppm_core::simplex;
use ppm_core::verifier::{
    best_response_m1, best_response_numeric, profile_regret, NumericOptions, VerifyOptions,
};
use ppm_core::StrategyProfile;

use common::{market, rng};

#[test]
fn exact_best_response_dominates_samples() {
    let mut r = rng(3);
    let spec = InstanceSpec {
        firms: 1..=4,
        catalog: 1..=6,
        ..InstanceSpec::single_segment(1, 1)
    };
    for _ in 0..30 {
        let game = random_game(&mut r, &spec);
        let profile = random_profile(&mut r, &game);
        for i in 0..game.n_firms() {
            let best = best_response_m1(&game, i, &profile).unwrap();
            let objective = ResponseObjective::new(&game, profile.masses(), i);
            for _ in 0..300 {
                let s = simplex::sample(&mut r, game.catalog_len(i));
                assert!(best.value >= objective.value(&s) - 1e-9 * best.value.abs());
            }
            let numeric =
                best_response_numeric(&game, i, &profile, &NumericOptions::default()).unwrap();
            assert!(best.value >= numeric.value - 1e-9 * game.payoff_scale());
        }
    }
}

#[test]
fn numeric_best_response_handles_several_segments() {
    let mut r = rng(4);
    let spec = InstanceSpec {
        segments: 2..=3,
        catalog: 2..=4,
        ..InstanceSpec::default()
    };
    for _ in 0..10 {
        let game = random_game(&mut r, &spec);
        let profile = random_interior_profile(&mut r, &game, 0.1);
        for i in 0..game.n_firms() {
            let numeric =
                best_response_numeric(&game, i, &profile, &NumericOptions::default()).unwrap();
            let objective = ResponseObjective::new(&game, profile.masses(), i);
            for k in 0..game.catalog_len(i) {
                assert!(
                    numeric.value
                        >= objective.value(&simplex::vertex(game.catalog_len(i), k)) - 1e-9
                );
            }
        }
    }
}

#[test]
fn grid_equilibria_reevaluate_exactly() {
    let mut r = rng(8);
    let grid = GridSpec::new(0.05).unwrap();
    for _ in 0..8 {
        let game = random_game(&mut r, &InstanceSpec::single_segment(2, 2));
        let eps = 1e-6 * game.payoff_scale();
        let found = grid_search_equilibria(&game, &grid, eps).unwrap();
        assert!(
            !found.is_empty(),
            "vertex profiles always admit a grid equilibrium here"
        );
        for eq in &found {
            let masses = eq.profile.masses();
            for i in 0..2 {
                let here = payoff_at(&game, masses, i);
                let best = grid
                    .simplex_points(2)
                    .into_iter()
                    .map(|p| {
                        let mut m = masses.to_vec();
                        m[i] = p;
                        payoff_at(&game, &m, i)
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                assert!(best - here <= eps + 1e-9 * game.payoff_scale());
            }
            // best responses are vertices, which lie on every grid, so grid
            // regret and continuous regret coincide
            let report =
                profile_regret(&game, &eq.profile, 1e-6, &VerifyOptions::default()).unwrap();
            assert!((report.epsilon - eq.max_regret()).abs() <= 1e-9 * game.payoff_scale());
        }
    }
}

#[test]
fn halving_the_grid_keeps_equilibria() {
    let mut r = rng(9);
    for _ in 0..6 {
        let game = random_game(&mut r, &InstanceSpec::single_segment(2, 2));
        let eps = 1e-6 * game.payoff_scale();
        let coarse = grid_search_equilibria(&game, &GridSpec::new(0.1).unwrap(), eps).unwrap();
        let fine = grid_search_equilibria(&game, &GridSpec::new(0.05).unwrap(), eps).unwrap();
        for eq in &coarse {
            // a true ε-NE stays an equilibrium on the refined grid
            let report =
                profile_regret(&game, &eq.profile, 1e-6, &VerifyOptions::default()).unwrap();
            if report.is_epsilon_nash {
                assert!(fine
                    .iter()
                    .any(|f| f.profile.linf_distance(&eq.profile) <= 1e-12));
            }
        }
    }
}

#[test]
fn dynamics_fixed_points_verify() {
    let mut r = rng(12);
    let spec = InstanceSpec {
        firms: 2..=3,
        catalog: 1..=4,
        ..InstanceSpec::single_segment(2, 2)
    };
    for _ in 0..10 {
        let game = random_game(&mut r, &spec);
        let start = random_profile(&mut r, &game);
        let opts = DynamicsOptions::default();
        let trace = best_response_iteration(&game, &start, &opts).unwrap();
        for round in &trace.rounds {
            for u in &round.updates {
                assert!(u.after >= u.before - 1e-9 * game.payoff_scale());
            }
        }
        if trace.termination == Termination::Converged {
            let report = profile_regret(
                &game,
                trace.final_profile(),
                10.0 * opts.tol,
                &VerifyOptions::default(),
            )
            .unwrap();
            assert!(report.is_epsilon_nash, "{report:?}");
        }
        assert_eq!(
            trace,
            best_response_iteration(&game, &start, &opts).unwrap()
        );
    }
}

#[test]
fn all_singleton_profile_has_zero_regret() {
    let game = market(30.0, &[&[(2.0, 0.0)], &[(5.0, 1.0)], &[(1.0, -1.0)]]);
    let report = profile_regret(
        &game,
        &StrategyProfile::uniform(&game),
        0.0,
        &VerifyOptions::default(),
    )
    .unwrap();
    assert_eq!(report.epsilon, 0.0);
    assert!(report.is_epsilon_nash);
}
