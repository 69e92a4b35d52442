mod common;

use common::{grid_argmax3, linf, minimax_vs_uniform, reverse_objective, subtree_value_range, tree};
use pikl::games::{SyntheticAnchor, TreeGame, TreeModel};
use pikl::mcts::*;
use pikl::{kl_divergence, Policy};

fn config(iterations: usize, c_puct: f64) -> SearchConfig {
    SearchConfig {
        iterations,
        c_puct,
        ..SearchConfig::default()
    }
}

fn bandit(rewards: Vec<f64>) -> (TreeGame, TreeModel) {
    let n = rewards.len();
    let game = TreeGame::from_leaves(n, 1, rewards.clone()).unwrap();
    let anchor = SyntheticAnchor::new(1.0, 0, vec![Policy::uniform(n)]);
    let mut values = vec![0.0];
    values.extend(rewards);
    (game, TreeModel::new(anchor, values))
}

fn visit_distribution(tree: &SearchTree) -> Policy {
    tree.root().visits_to_policy(1.0)
}

fn total_variation(a: &Policy, b: &Policy) -> f64 {
    0.5 * a.probs().iter().zip(b.probs()).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

#[test]
fn single_iteration_falls_back_to_prior() {
    let (g, m) = tree(3, 4, 1);
    let t = run_search(&g, &m, g.root(), &config(1, 1.0)).unwrap();
    assert_eq!(t.root().total_visits(), 0);
    assert_eq!(t.nodes().len(), 1);
    assert_eq!(t.root().visits_to_policy(1.0).probs(), m.prior(0).probs());
    assert!(matches!(t.root().grill_policy(1.0, 0.0), Err(pikl::Error::NoVisitedActions)));
}

#[test]
fn bandit_concentrates_on_best_arm() {
    let (g, m) = bandit(vec![1.0, -1.0, 0.0]);
    let t = run_search(&g, &m, 0, &config(1000, 0.1)).unwrap();
    t.check_visit_conservation().unwrap();
    assert_eq!(t.root().visits_to_policy(0.0).argmax(), 0);
    assert_eq!(t.root().q(0), Some(1.0));
}

#[test]
fn large_c_puct_recovers_prior() {
    for seed in 0..20 {
        let (g, m) = tree(3, 4, seed);
        let t = run_search(&g, &m, 0, &config(1000, 1e4)).unwrap();
        let tv = total_variation(&visit_distribution(&t), m.prior(0));
        assert!(tv <= 0.05, "seed {seed}: tv {tv}");
    }
}

#[test]
fn visits_are_conserved_and_values_bounded() {
    for seed in 0..50 {
        let (g, m) = tree(3, 4, seed);
        for c in [1e-6, 0.1, 1.0, 10.0] {
            let t = run_search(&g, &m, 0, &config(400, c)).unwrap();
            t.check_visit_conservation().unwrap();
            for node in t.nodes().iter().filter(|n| !n.terminal) {
                for a in 0..node.num_actions() {
                    let Some(q) = node.q(a) else { continue };
                    assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&q));
                    let child = g.child(node.state, a);
                    let (lo, hi) = subtree_value_range(&g, &m, child, node.player);
                    assert!(q >= lo - 1e-9 && q <= hi + 1e-9, "seed {seed}: q {q} outside [{lo}, {hi}]");
                }
            }
        }
    }
}

#[test]
fn terminal_values_are_exact() {
    // Value model deliberately wrong at interior nodes; leaves carry the truth.
    let game = TreeGame::from_leaves(2, 2, vec![1.0, 0.5, -1.0, -0.5]).unwrap();
    let anchor = SyntheticAnchor::new(1.0, 0, vec![Policy::uniform(2); 3]);
    let model = TreeModel::new(anchor, vec![0.0, 0.9, 0.9, 1.0, 0.5, -1.0, -0.5]);
    let t = run_search(&game, &model, 0, &config(2000, 0.5)).unwrap();
    t.check_visit_conservation().unwrap();
    assert_eq!(t.root().visits_to_policy(0.0).argmax(), 0);
    assert!((t.root().q(0).unwrap() - 0.5).abs() < 0.05);
}

fn recovery_kl(seed: u64, iterations: usize) -> Vec<f64> {
    let (g, m) = tree(3, 4, seed);
    [1e-2, 1.0, 1e4]
        .iter()
        .map(|&c| {
            let t = run_search(&g, &m, 0, &config(iterations, c)).unwrap();
            kl_divergence(&visit_distribution(&t), m.prior(0)).unwrap()
        })
        .collect()
}

#[test]
fn prior_recovery_trend_holds_on_average() {
    for iterations in [50, 1000] {
        let mut mean = [0.0; 3];
        for seed in 0..50 {
            for (m, k) in mean.iter_mut().zip(recovery_kl(seed, iterations)) {
                *m += k / 50.0;
            }
        }
        assert!(mean[2] < mean[1] && mean[1] < mean[0], "{mean:?}");
    }
}

#[test]
#[ignore = "fails on 9 of 50 trees: greedy search can settle on a high-prior move and stay closer to the prior than c_puct = 1"]
fn prior_recovery_is_monotone_on_every_tree() {
    for seed in 0..50 {
        let kl = recovery_kl(seed, 1000);
        assert!(kl[2] <= kl[1] && kl[1] <= kl[0], "seed {seed}: {kl:?}");
    }
}

#[test]
fn tiny_c_puct_is_greedy_on_q() {
    for seed in 0..50 {
        let (g, m) = tree(3, 4, seed);
        let t = run_search(&g, &m, 0, &config(1000, 1e-6)).unwrap();
        let root = t.root();
        let most_visited = root.visits_to_policy(0.0).argmax();
        let best_q = (0..3)
            .filter_map(|a| root.q(a).map(|q| (a, q)))
            .fold((0, f64::NEG_INFINITY), |best, (a, q)| if q > best.1 { (a, q) } else { best })
            .0;
        assert_eq!(most_visited, best_q, "seed {seed}");
    }
}

#[test]
fn grill_matches_grid_search() {
    let cases = [
        (vec![0.5, 0.3, 0.2], vec![30, 15, 4], vec![0.2, 0.1, -0.3], 2.0),
        (vec![0.2, 0.2, 0.6], vec![10, 0, 39], vec![0.6, 0.0, 0.1], 1.0),
        (vec![0.6, 0.3, 0.1], vec![5, 5, 5], vec![-0.2, 0.4, 0.0], 0.5),
        (vec![0.1, 0.8, 0.1], vec![1, 47, 1], vec![0.9, -0.1, 0.3], 5.0),
    ];
    for (prior, visits, q, c) in cases {
        let prior = Policy::new(prior).unwrap();
        let node = MctsNode::with_stats(&prior, visits.clone(), q.clone(), 0.0);
        let total: u32 = visits.iter().sum();
        let lambda = c * (total as f64).sqrt() / total as f64;
        let visited: Vec<f64> = (0..3).filter(|&a| visits[a] > 0).map(|a| q[a]).collect();
        let fill = visited.iter().sum::<f64>() / visited.len() as f64;
        let q_eff: Vec<f64> = (0..3).map(|a| if visits[a] > 0 { q[a] } else { fill }).collect();
        let grid = grid_argmax3(|pi| reverse_objective(pi, &q_eff, prior.probs(), lambda));
        let p = node.grill_policy(c, 0.0).unwrap();
        assert!(linf(p.probs(), &grid) <= 2e-3);
        assert!(p.has_full_support());
    }
}

#[test]
fn grill_with_equal_values_returns_prior() {
    let prior = Policy::new(vec![0.5, 0.25, 0.25]).unwrap();
    let node = MctsNode::with_stats(&prior, vec![20, 20, 9], vec![0.3; 3], 0.0);
    assert!(node.grill_policy(2.0, 0.0).unwrap().linf_distance(&prior) <= 1e-12);
    assert!((grill_lambda(2.0, 49.0, 0.0) - 2.0 / 7.0).abs() < 1e-15);
}

#[test]
fn searches_are_deterministic() {
    let (g, m) = tree(3, 4, 11);
    let a = run_search(&g, &m, 0, &config(300, 1.0)).unwrap();
    let b = run_search(&g, &m, 0, &config(300, 1.0)).unwrap();
    assert_eq!(a.nodes(), b.nodes());
    assert_eq!(a.root_stats_csv(), b.root_stats_csv());
    assert!(a.root_stats_csv().starts_with("action,visits,q,prior\n"));
}

#[test]
fn terminal_root_is_rejected() {
    let (g, m) = bandit(vec![1.0, 0.0]);
    assert!(run_search(&g, &m, 1, &config(10, 1.0)).is_err());
    assert!(run_search(&g, &m, 0, &config(0, 1.0)).is_err());
}

#[test]
fn grill_prediction_improves_on_prior() {
    let trees: Vec<_> = (0..200).map(|s| tree(3, 4, 1000 + s)).collect();
    let prior_hits = trees.iter().filter(|(g, m)| m.prior(0).argmax() == g.best_move(0)).count();
    let best = [0.5, 1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|&c| {
            trees
                .iter()
                .filter(|(g, m)| pikl::harness::predicted_move(g, m, 0, &config(50, c)).unwrap() == g.best_move(0))
                .count()
        })
        .max()
        .unwrap();
    assert!(best >= prior_hits, "search {best} vs prior {prior_hits}");
}

#[test]
fn self_play_is_even() {
    let (g, m) = tree(3, 4, 3);
    let r = play_match(&g, &m, &Agent::Prior, &Agent::Prior, 1000, 1.0, 9).unwrap();
    assert!((r.mean - 0.5).abs() <= 3.0 * r.stderr, "{} ± {}", r.mean, r.stderr);
}

fn minimax_uniform_match(seeds: std::ops::Range<u64>) -> (MatchResult, f64) {
    let mut scores = Vec::new();
    let mut exact = 0.0;
    let count = seeds.end - seeds.start;
    for seed in seeds {
        let (g, m) = tree(3, 4, seed);
        scores.extend(play_match(&g, &m, &Agent::Minimax, &Agent::Uniform, 50, 1.0, seed).unwrap().scores);
        exact += 0.5 * (minimax_vs_uniform(&g, 0, 0) + minimax_vs_uniform(&g, 0, 1)) / count as f64;
    }
    (MatchResult::from_scores(scores), exact)
}

#[test]
fn minimax_vs_uniform_matches_enumeration() {
    let (r, exact) = minimax_uniform_match(0..20);
    assert!((r.mean - exact).abs() <= 3.0 * r.stderr, "{} ± {} vs {exact}", r.mean, r.stderr);
    assert!(r.mean > 0.5 + 3.0 * r.stderr);
}

#[test]
#[ignore = "exact expectation on depth-4 branching-3 trees with uniform leaves is about 0.87"]
fn minimax_beats_uniform_nine_times_in_ten() {
    let (r, _) = minimax_uniform_match(0..20);
    assert!(r.mean > 0.9, "{}", r.mean);
}

#[test]
fn search_beats_raw_prior() {
    let mut scores = Vec::new();
    for seed in 0..100 {
        let (g, m) = tree(3, 4, 500 + seed);
        let agent = Agent::Mcts(config(50, 2.0));
        scores.extend(play_match(&g, &m, &agent, &Agent::Prior, 10, 1.0, seed).unwrap().scores);
    }
    let r = MatchResult::from_scores(scores);
    assert!(r.mean - 0.5 > 3.0 * r.stderr, "{} ± {}", r.mean, r.stderr);
}
