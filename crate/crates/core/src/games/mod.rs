//! Benchmark games: Colonel Blotto, small matrix fixtures, seeded random
//! zero-sum games and synthetic perfect-information trees.

mod blotto;
mod matrix;
mod tree;

pub use blotto::{blotto_compositions, blotto_outcome, make_blotto, BLOTTO_ACTION_LIMIT};
pub use matrix::{make_matching_pennies, make_random_zero_sum, make_rps};
pub use tree::{make_tree_game, SyntheticAnchor, TreeGame, TreeModel, TreeParams, TREE_LEAF_LIMIT};
