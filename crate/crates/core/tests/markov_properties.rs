use std::collections::BTreeMap;

use proptest::prelude::*;
use shinohara_core::game::{resolve_round, Action, GameState, PlayerId, ResolutionKind};
use shinohara_core::markov::{
    all_states, compute_values, residual_system, verify_one_shot, MarkovProfile, Representation,
    Selection, DEFAULT_EPSILON,
};

fn explicit_from(universe: usize, draws: &[f64]) -> MarkovProfile {
    let mut it = draws.iter().cycle();
    let probs = all_states(universe)
        .unwrap()
        .into_iter()
        .map(|s| {
            let ps = (0..s.len()).map(|_| *it.next().unwrap()).collect();
            (s, ps)
        })
        .collect();
    MarkovProfile::explicit(universe, probs).unwrap()
}

fn explicit_map(p: &MarkovProfile) -> BTreeMap<GameState, Vec<f64>> {
    match p.to_explicit().unwrap().representation() {
        Representation::Explicit { probs } => probs.clone(),
        _ => unreachable!(),
    }
}

fn permute_state(state: &GameState, perm: &[usize]) -> GameState {
    GameState::new(state.iter().map(|p| PlayerId(perm[p.0]))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn values_sum_to_one(draws in prop::collection::vec(0.0f64..=1.0, 1..40)) {
        let values = compute_values(&explicit_from(5, &draws)).unwrap();
        prop_assert!(values.max_sum_error() <= 1e-10);
    }

    #[test]
    fn value_is_mixture_of_pure_values(draws in prop::collection::vec(0.0f64..=1.0, 1..40)) {
        let report = verify_one_shot(&explicit_from(5, &draws), DEFAULT_EPSILON).unwrap();
        for e in &report.entries {
            let mixed = e.prob * e.value_paper + (1.0 - e.prob) * e.value_rock;
            prop_assert!((mixed - e.profile_value).abs() <= 1e-10);
            prop_assert!(e.gain >= -DEFAULT_EPSILON);
        }
    }

    #[test]
    fn relabeling_permutes_values(
        draws in prop::collection::vec(0.01f64..0.99, 32),
        perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle(),
    ) {
        let original = explicit_from(4, &draws);
        let mut relabeled = BTreeMap::new();
        for (state, ps) in explicit_map(&original) {
            let image = permute_state(&state, &perm);
            let mut moved = vec![0.0; ps.len()];
            for (k, p) in state.iter().enumerate() {
                moved[image.position(PlayerId(perm[p.0])).unwrap()] = ps[k];
            }
            relabeled.insert(image, moved);
        }
        let relabeled = MarkovProfile::explicit(4, relabeled).unwrap();
        let a = compute_values(&original).unwrap();
        let b = compute_values(&relabeled).unwrap();
        for (state, rho) in a.iter() {
            let image = permute_state(state, &perm);
            for (k, p) in state.iter().enumerate() {
                let other = b.rho(&image, PlayerId(perm[p.0])).unwrap();
                prop_assert!((rho[k] - other).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn combo_is_equilibrium_for_any_q(q in 0.0f64..=1.0, universe in 3usize..=6) {
        let p = MarkovProfile::combo_constant(universe, q, Selection::default()).unwrap();
        prop_assert!(verify_one_shot(&p, DEFAULT_EPSILON).unwrap().is_equilibrium());
    }
}

#[test]
fn residuals_and_deviations_agree_on_indifference() {
    for universe in 3..=6 {
        let sym = MarkovProfile::symmetric_spe(universe).unwrap();
        assert!(residual_system(&sym).unwrap().max_abs() < 1e-9);
        assert!(verify_one_shot(&sym, DEFAULT_EPSILON).unwrap().is_equilibrium());

        let mut bumped = explicit_map(&sym);
        let full = GameState::full(universe).unwrap();
        bumped.get_mut(&full).unwrap()[0] += 0.05;
        let bumped = MarkovProfile::explicit(universe, bumped).unwrap();
        assert!(residual_system(&bumped).unwrap().max_abs() > 1e-4);
        assert!(!verify_one_shot(&bumped, DEFAULT_EPSILON).unwrap().is_equilibrium());
    }
}

#[test]
fn combo_randomizes_by_state_size() {
    let q: BTreeMap<usize, f64> = [(3, 0.1), (4, 0.9), (5, 0.5), (6, 0.0)].into_iter().collect();
    let p = MarkovProfile::combo(6, q, Selection::HighestIndex).unwrap();
    assert!(verify_one_shot(&p, DEFAULT_EPSILON).unwrap().is_equilibrium());
    assert_eq!(
        p.probs(&GameState::full(4).unwrap()).unwrap(),
        vec![0.0, 0.0, 0.9, 1.0]
    );
}

#[test]
fn selection_relabels_one_paper_values() {
    let lo = compute_values(&MarkovProfile::one_paper(5, Selection::LowestIndex).unwrap()).unwrap();
    let hi = compute_values(&MarkovProfile::one_paper(5, Selection::HighestIndex).unwrap()).unwrap();
    let full = GameState::full(5).unwrap();
    let mut reversed = lo.state_values(&full).unwrap().to_vec();
    reversed.reverse();
    assert_eq!(hi.state_values(&full).unwrap(), reversed.as_slice());
}

fn round_under(profile: &MarkovProfile, state: &GameState) -> ResolutionKind {
    let actions = state
        .iter()
        .zip(profile.probs(state).unwrap())
        .map(|(p, prob)| (p, if prob == 1.0 { Action::Paper } else { Action::Rock }))
        .collect();
    resolve_round(state, &actions).unwrap().kind
}

#[test]
fn two_paper_rounds() {
    let p = MarkovProfile::two_paper(6, Selection::default()).unwrap();
    let three = GameState::from_key("0,1,2").unwrap();
    assert_eq!(round_under(&p, &three), ResolutionKind::Winner { player: PlayerId(2) });
    let four = GameState::from_key("0,1,2,3").unwrap();
    assert_eq!(
        round_under(&p, &four),
        ResolutionKind::SplitTwo { pair: [PlayerId(2), PlayerId(3)] }
    );
    match round_under(&p, &GameState::full(6).unwrap()) {
        ResolutionKind::Continue { survivors } => assert_eq!(survivors.len(), 4),
        other => panic!("unexpected {other:?}"),
    }
    let values = compute_values(&p).unwrap();
    assert_eq!(values.rho(&three, PlayerId(2)), Some(1.0));
    assert_eq!(values.state_values(&four).unwrap(), &[0.0, 0.0, 0.5, 0.5]);
}
