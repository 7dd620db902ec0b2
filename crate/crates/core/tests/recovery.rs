use fiar_core::recovery::{default_generator_params, random_stimuli, recovery_test, simulate_choices, StimulusConfig};
use fiar_core::{dataset_nll, fit_model, FitOptions, ModelVariant};

fn opts(seed: u64) -> FitOptions {
    FitOptions {
        n_restarts: 4,
        ..FitOptions::with_seed(seed)
    }
}

#[test]
fn simulation_is_deterministic_and_keeps_stimuli() {
    let stimuli = random_stimuli(100, 4, &StimulusConfig::default());
    let p = default_generator_params();
    let a = simulate_choices(&stimuli, &p, ModelVariant::FullTree, 8);
    assert_eq!(a, simulate_choices(&stimuli, &p, ModelVariant::FullTree, 8));
    for (s, r) in stimuli.iter().zip(&a) {
        assert_eq!((s.fen.as_str(), &s.tree), (r.fen.as_str(), &r.tree));
        assert!(r.tree.as_ref().unwrap().contains_candidate(r.chosen_move.unwrap()));
    }
}

#[test]
fn full_tree_self_consistency() {
    let stimuli = random_stimuli(300, 5, &StimulusConfig::default());
    let p = default_generator_params().with_gamma(1.0);
    let data = simulate_choices(&stimuli, &p, ModelVariant::FullTree, 5);
    let fit = fit_model(&data, ModelVariant::FullTree, &opts(5)).unwrap();
    assert!(fit.nll_per_sample <= dataset_nll(&data, &p, ModelVariant::FullTree).unwrap() + 1e-6);
}

#[test]
fn both_conditions_recover_and_repeat() {
    let stimuli = random_stimuli(500, 6, &StimulusConfig::default());
    let p = default_generator_params();
    let (full, myopic) = recovery_test(&stimuli, &p, &p, 6, &opts(6)).unwrap();
    assert_eq!((full.generator, myopic.generator), (ModelVariant::FullTree, ModelVariant::Myopic));
    assert!(full.delta > 0.0 && full.recovered, "{full:?}");
    assert!(myopic.delta < 0.0 && myopic.recovered, "{myopic:?}");
    assert_eq!(full.n, 500);
    let again = recovery_test(&stimuli, &p, &p, 6, &opts(6)).unwrap();
    assert_eq!(again, (full, myopic));
}
