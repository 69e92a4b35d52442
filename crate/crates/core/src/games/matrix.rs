use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{NormalFormGame, RewardBounds};

fn labelled(game: NormalFormGame, names: &[&str]) -> NormalFormGame {
    let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    game.with_labels(vec![names.clone(), names])
        .expect("fixture labels match")
}

/// Rock-paper-scissors, actions (R, P, S), win +1 / loss −1.
pub fn make_rps() -> NormalFormGame {
    let rows = vec![
        vec![0.0, -1.0, 1.0],
        vec![1.0, 0.0, -1.0],
        vec![-1.0, 1.0, 0.0],
    ];
    let g = NormalFormGame::zero_sum_matrix("rps", rows, RewardBounds::new(-1.0, 1.0))
        .expect("valid fixture");
    labelled(g, &["R", "P", "S"])
}

/// Matching pennies, actions (H, T); player 0 wins on a match.
pub fn make_matching_pennies() -> NormalFormGame {
    let rows = vec![vec![1.0, -1.0], vec![-1.0, 1.0]];
    let g = NormalFormGame::zero_sum_matrix("pennies", rows, RewardBounds::new(-1.0, 1.0))
        .expect("valid fixture");
    labelled(g, &["H", "T"])
}

/// `n × n` zero-sum game with payoffs drawn i.i.d. uniform on `[−1, 1]`.
pub fn make_random_zero_sum(n: usize, seed: u64) -> Result<NormalFormGame> {
    if !(2..=100).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "random zero-sum games need 2 to 100 actions, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect())
        .collect();
    NormalFormGame::zero_sum_matrix(
        format!("random_zero_sum(n={n},seed={seed})"),
        rows,
        RewardBounds::new(-1.0, 1.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rps_payoffs() {
        let g = make_rps();
        assert_eq!(g.utility(0, &[0, 2]), 1.0);
        assert_eq!(g.utility(0, &[0, 0]), 0.0);
        assert_eq!(g.utility(1, &[0, 2]), -1.0);
    }

    #[test]
    fn pennies_payoffs() {
        let g = make_matching_pennies();
        assert_eq!(g.utility(0, &[0, 0]), 1.0);
        assert_eq!(g.utility(0, &[0, 1]), -1.0);
    }

    #[test]
    fn random_games_are_reproducible_and_zero_sum() {
        let a = make_random_zero_sum(10, 3).unwrap();
        let b = make_random_zero_sum(10, 3).unwrap();
        assert_eq!(a.dump().unwrap(), b.dump().unwrap());
        let c = make_random_zero_sum(10, 4).unwrap();
        assert_ne!(a.dump().unwrap().payoffs, c.dump().unwrap().payoffs);
        for i in 0..10 {
            for j in 0..10 {
                assert_eq!(a.utility(0, &[i, j]) + a.utility(1, &[i, j]), 0.0);
            }
        }
    }

    #[test]
    fn random_game_size_is_checked() {
        assert!(make_random_zero_sum(1, 0).is_err());
        assert!(make_random_zero_sum(101, 0).is_err());
    }
}
