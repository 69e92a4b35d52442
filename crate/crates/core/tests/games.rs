mod common;

use pikl::games::*;
use pikl::{kl_divergence, Error, GameDump, Policy, Profile};
use proptest::prelude::*;

fn profile(ps: &[&[f64]]) -> Profile {
    Profile::new(ps.iter().map(|p| Policy::new(p.to_vec()).unwrap()).collect())
}

#[test]
fn expected_utility_examples() {
    let pennies = make_matching_pennies();
    assert_eq!(pennies.expected_utility(&profile(&[&[0.5, 0.5], &[0.5, 0.5]]), 0).unwrap(), 0.0);
    let rps = make_rps();
    assert_eq!(rps.expected_utility(&profile(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0]]), 0).unwrap(), 1.0);
    let blotto = make_blotto(10, 3).unwrap();
    let u = Profile::new(vec![Policy::uniform(66), Policy::uniform(66)]);
    assert!(blotto.expected_utility(&u, 0).unwrap().abs() < 1e-12);
}

#[test]
fn best_response_examples() {
    let rps = make_rps();
    let vs_rock = profile(&[&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]]);
    assert_eq!(rps.best_response(&vs_rock, 1).unwrap(), (1, 1.0));
    let pennies = make_matching_pennies();
    assert_eq!(pennies.best_response(&profile(&[&[0.5, 0.5], &[0.5, 0.5]]), 0).unwrap(), (0, 0.0));

    // Opponent mixes rock and paper evenly: rock scores -1/2, paper 1/2, scissors 0.
    let mix = profile(&[&[1.0, 0.0, 0.0], &[0.5, 0.5, 0.0]]);
    let by_hand: Vec<f64> = (0..3)
        .map(|a| 0.5 * rps.utility(0, &[a, 0]) + 0.5 * rps.utility(0, &[a, 1]))
        .collect();
    assert_eq!(by_hand, vec![-0.5, 0.5, 0.0]);
    assert_eq!(rps.action_values(&mix, 0).unwrap(), by_hand);
    assert_eq!(rps.best_response(&mix, 0).unwrap(), (1, 0.5));
}

#[test]
fn exploitability_examples() {
    let pennies = make_matching_pennies();
    let e = pennies.exploitability(&profile(&[&[0.5, 0.5], &[0.5, 0.5]])).unwrap();
    assert_eq!(e.gaps, vec![0.0, 0.0]);
    let rps = make_rps();
    let e = rps
        .exploitability(&profile(&[&[1.0, 0.0, 0.0], &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]]))
        .unwrap();
    assert!((e.gaps[1] - 1.0).abs() < 1e-12);
}

#[test]
fn blotto_uniform_exploitability_matches_enumeration() {
    let g = make_blotto(10, 3).unwrap();
    let comps = blotto_compositions(10, 3);
    let uniform = Profile::new(vec![Policy::uniform(66), Policy::uniform(66)]);
    // Independent oracle: score every pure reply against the uniform mixture.
    let best = comps
        .iter()
        .map(|a| comps.iter().map(|b| blotto_outcome(a, b)).sum::<f64>() / 66.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let e = g.exploitability(&uniform).unwrap();
    assert!((e.gaps[0] - best).abs() < 1e-12);
    assert!((e.gaps[0] - e.gaps[1]).abs() < 1e-12);
    assert!(e.gaps[0] > 0.0);
}

#[test]
fn kl_examples() {
    let p = Policy::new(vec![0.2, 0.3, 0.5]).unwrap();
    assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
    let pure = Policy::new(vec![1.0, 0.0]).unwrap();
    let half = Policy::uniform(2);
    assert!((kl_divergence(&pure, &half).unwrap() - 2f64.ln()).abs() < 1e-15);
    assert!(matches!(
        kl_divergence(&half, &pure),
        Err(Error::SupportViolation { action: 1, .. })
    ));
}

#[test]
fn blotto_examples() {
    let g = make_blotto(10, 3).unwrap();
    assert_eq!(g.action_counts(), &[66, 66]);
    let comps = blotto_compositions(10, 3);
    let idx = |c: &[usize]| comps.iter().position(|x| x == c).unwrap();
    assert_eq!(g.utility(0, &[idx(&[10, 0, 0]), idx(&[0, 5, 5])]), -1.0);
    for a in 0..66 {
        assert_eq!(g.utility(0, &[a, a]), 0.0);
        for b in 0..66 {
            assert_eq!(g.utility(0, &[a, b]), -g.utility(0, &[b, a]));
        }
    }
}

#[test]
fn blotto_enumerates_compositions() {
    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
    for (c, f) in [(10, 3), (5, 4), (7, 1), (1, 5)] {
        let comps = blotto_compositions(c, f);
        assert_eq!(comps.len(), binom(c + f - 1, f - 1));
        assert!(comps.iter().all(|x| x.len() == f && x.iter().sum::<usize>() == c));
        assert!(comps.windows(2).all(|w| w[0] < w[1]), "lexicographic and distinct");
    }
    assert!(matches!(make_blotto(40, 5), Err(Error::TooLarge { .. })));
}

#[test]
fn small_matrix_games() {
    let rps = make_rps();
    assert_eq!(rps.utility(0, &[0, 2]), 1.0);
    assert_eq!(rps.utility(0, &[0, 0]), 0.0);
    let pennies = make_matching_pennies();
    assert_eq!(pennies.utility(0, &[0, 0]), 1.0);
    assert_eq!(pennies.utility(0, &[0, 1]), -1.0);
}

#[test]
fn random_games_are_reproducible_and_zero_sum() {
    let a = make_random_zero_sum(7, 3).unwrap();
    let b = make_random_zero_sum(7, 3).unwrap();
    assert_eq!(a.dump().unwrap(), b.dump().unwrap());
    for i in 0..7 {
        for j in 0..7 {
            assert_eq!(a.utility(0, &[i, j]) + a.utility(1, &[i, j]), 0.0);
        }
    }
    assert!(make_random_zero_sum(1, 0).is_err());
    assert!(make_random_zero_sum(101, 0).is_err());
}

#[test]
fn random_game_golden_file() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/random_zero_sum_2_7.json");
    let golden: GameDump = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(make_random_zero_sum(2, 7).unwrap().dump().unwrap(), golden);
}

#[test]
fn tree_game_examples() {
    let g = TreeGame::from_leaves(2, 1, vec![1.0, -1.0]).unwrap();
    assert_eq!(g.minimax_value(g.root()), 1.0);
    assert_eq!(g.best_move(g.root()), 0);

    let (g, m) = common::tree(3, 4, 11);
    assert_eq!(g.num_leaves(), 81);
    for node in 0..g.num_nodes() {
        let v = m.value(node);
        assert!((-1.0..=1.0).contains(&v));
        if !g.is_terminal(node) {
            let p = m.prior(node);
            assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.probs().iter().all(|&x| x > 0.0));
            // Backward induction, checked against the children.
            let kids: Vec<f64> = (0..3).map(|a| g.minimax_value(g.child(node, a))).collect();
            let expect = if g.player_to_move(node) == 0 {
                kids.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            } else {
                kids.iter().cloned().fold(f64::INFINITY, f64::min)
            };
            assert_eq!(g.minimax_value(node), expect);
        }
    }
    let too_big = make_tree_game(10, 6, 0, TreeParams::default());
    assert!(matches!(too_big, Err(Error::TooLarge { .. })));
}

fn policy_strategy(n: usize) -> impl Strategy<Value = Policy> {
    prop::collection::vec(0.0f64..1.0, n)
        .prop_filter("non-zero mass", |w| w.iter().sum::<f64>() > 1e-3)
        .prop_map(|w| Policy::from_weights(w).unwrap())
}

proptest! {
    #[test]
    fn expected_utility_is_multilinear(
        seed in 0u64..1000,
        p in policy_strategy(4),
        p2 in policy_strategy(4),
        q in policy_strategy(4),
    ) {
        let g = make_random_zero_sum(4, seed).unwrap();
        for alpha in [0.0, 0.3, 1.0] {
            let mix: Vec<f64> = p.probs().iter().zip(p2.probs()).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
            let mixed = Profile::new(vec![Policy::from_weights(mix).unwrap(), q.clone()]);
            let lhs = g.expected_utility(&mixed, 0).unwrap();
            let u1 = g.expected_utility(&Profile::new(vec![p.clone(), q.clone()]), 0).unwrap();
            let u2 = g.expected_utility(&Profile::new(vec![p2.clone(), q.clone()]), 0).unwrap();
            prop_assert!((lhs - (alpha * u1 + (1.0 - alpha) * u2)).abs() < 1e-9);
        }
    }

    #[test]
    fn kl_is_nonnegative(p in policy_strategy(5), q in policy_strategy(5)) {
        let q = Policy::from_weights(q.probs().iter().map(|x| x + 1e-3).collect()).unwrap();
        let d = kl_divergence(&p, &q).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert_eq!(kl_divergence(&q, &q).unwrap(), 0.0);
        if p.linf_distance(&q) > 1e-6 {
            prop_assert!(d > 0.0);
        }
    }

    #[test]
    fn zero_sum_exploitability_is_nonnegative(seed in 0u64..1000, p in policy_strategy(3), q in policy_strategy(3)) {
        let g = make_random_zero_sum(3, seed).unwrap();
        let e = g.exploitability(&Profile::new(vec![p, q])).unwrap();
        prop_assert!(e.gaps.iter().all(|&x| x >= -1e-9));
        prop_assert!(e.total >= -1e-9);
    }
}

#[test]
fn gibbs_on_a_thousand_pairs() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let p = common::random_policy(&mut rng, 6, 0.0);
        let q = common::random_policy(&mut rng, 6, 0.01);
        assert!(kl_divergence(&p, &q).unwrap() >= 0.0);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
    }
}

#[test]
fn zero_sum_nash_has_zero_total_gap() {
    let pennies = make_matching_pennies();
    let e = pennies.exploitability(&profile(&[&[0.5, 0.5], &[0.5, 0.5]])).unwrap();
    assert!(e.total.abs() < 1e-9);
    let e = pennies.exploitability(&profile(&[&[0.6, 0.4], &[0.5, 0.5]])).unwrap();
    assert!(e.total > 1e-9);
}
