use std::sync::Arc;

use crate::error::{Error, Result};
use crate::game::{NormalFormGame, RewardBounds};

/// Largest number of allocations per player accepted by [`make_blotto`].
pub const BLOTTO_ACTION_LIMIT: u128 = 10_000;

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// All ways to split `coins` over `fields` non-negative piles, in ascending
/// lexicographic order.
pub fn blotto_compositions(coins: usize, fields: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, fields: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if fields == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            rec(left - c, fields - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(coins, fields, &mut Vec::with_capacity(fields), &mut out);
    out
}

/// Payoff to the first allocation: +1 if it wins strictly more fields than it
/// loses, −1 if fewer, 0 otherwise. A field is won with strictly more coins.
pub fn blotto_outcome(a: &[usize], b: &[usize]) -> f64 {
    let (mut won, mut lost) = (0usize, 0usize);
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            std::cmp::Ordering::Greater => won += 1,
            std::cmp::Ordering::Less => lost += 1,
            std::cmp::Ordering::Equal => {}
        }
    }
    match won.cmp(&lost) {
        std::cmp::Ordering::Greater => 1.0,
        std::cmp::Ordering::Less => -1.0,
        std::cmp::Ordering::Equal => 0.0,
    }
}

/// Symmetric two-player Colonel Blotto with `coins` coins over `fields` fields.
pub fn make_blotto(coins: usize, fields: usize) -> Result<NormalFormGame> {
    if coins == 0 || fields == 0 {
        return Err(Error::InvalidArgument(
            "blotto needs at least one coin and one field".into(),
        ));
    }
    let count = binomial((coins + fields - 1) as u128, (fields - 1) as u128);
    if count > BLOTTO_ACTION_LIMIT {
        return Err(Error::TooLarge {
            joint: count,
            limit: BLOTTO_ACTION_LIMIT,
        });
    }
    let actions = Arc::new(blotto_compositions(coins, fields));
    debug_assert_eq!(actions.len() as u128, count);
    let labels: Vec<String> = actions
        .iter()
        .map(|a| {
            let parts: Vec<String> = a.iter().map(usize::to_string).collect();
            format!("({})", parts.join(","))
        })
        .collect();
    let n = actions.len();
    let oracle = {
        let actions = Arc::clone(&actions);
        move |player: usize, joint: &[usize]| {
            let u = blotto_outcome(&actions[joint[0]], &actions[joint[1]]);
            if player == 0 {
                u
            } else {
                -u
            }
        }
    };
    NormalFormGame::new(
        format!("blotto({coins},{fields})"),
        vec![n, n],
        vec![RewardBounds::new(-1.0, 1.0); 2],
        true,
        Arc::new(oracle),
    )?
    .with_labels(vec![labels.clone(), labels])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blotto_10_3_has_66_actions() {
        let g = make_blotto(10, 3).unwrap();
        assert_eq!(g.action_counts(), &[66, 66]);
        assert_eq!(binomial(12, 2), 66);
    }

    #[test]
    fn compositions_are_lexicographic_and_sum_to_coins() {
        let comps = blotto_compositions(10, 3);
        assert_eq!(comps.first().unwrap(), &vec![0, 0, 10]);
        assert_eq!(comps.last().unwrap(), &vec![10, 0, 0]);
        assert!(comps.windows(2).all(|w| w[0] < w[1]));
        assert!(comps.iter().all(|c| c.iter().sum::<usize>() == 10));
    }

    #[test]
    fn one_big_pile_loses_to_two_medium_ones() {
        assert_eq!(blotto_outcome(&[10, 0, 0], &[0, 5, 5]), -1.0);
        assert_eq!(blotto_outcome(&[0, 5, 5], &[10, 0, 0]), 1.0);
    }

    #[test]
    fn mirror_match_is_a_draw() {
        for a in blotto_compositions(10, 3) {
            assert_eq!(blotto_outcome(&a, &a), 0.0);
        }
    }

    #[test]
    fn antisymmetric_everywhere() {
        let g = make_blotto(10, 3).unwrap();
        for a in 0..66 {
            for b in 0..66 {
                assert_eq!(g.utility(0, &[a, b]), -g.utility(0, &[b, a]));
            }
        }
    }

    #[test]
    fn size_limit_is_enforced() {
        assert!(matches!(make_blotto(100, 4), Err(Error::TooLarge { .. })));
        assert!(make_blotto(0, 3).is_err());
    }

    #[test]
    fn labels_follow_enumeration() {
        let g = make_blotto(2, 2).unwrap();
        assert_eq!(g.labels().unwrap()[0], vec!["(0,2)", "(1,1)", "(2,0)"]);
    }
}
