//! PUCT Monte Carlo tree search with a policy prior on alternating-move
//! two-player zero-sum tree games.
//!
//! Every node stores per-action statistics from the perspective of the player
//! to move there. One iteration descends by [`MctsNode::select_action`],
//! adds one new node, and backs up that node's model value (or exact reward
//! at terminals) along the path, negating for the opponent's edges.

mod arena;

pub use arena::{game_rng, play_game, play_match, Agent, MatchResult};

use serde::{Deserialize, Serialize};

use crate::anchored::reverse_kl_opt;
use crate::error::{Error, Result};
use crate::games::{TreeGame, TreeModel};
use crate::policy::{Policy, SUM_TOLERANCE};

/// Value proxy for actions that have not been tried yet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FpuMode {
    /// Equal-weighted mean of the visited siblings' `Q`; the node's own model
    /// value when nothing has been visited.
    #[default]
    SiblingMean,
    /// Always the node's own model value.
    NodeValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub iterations: usize,
    pub c_puct: f64,
    pub temperature: f64,
    pub seed: u64,
    pub fpu: FpuMode,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            iterations: 50,
            c_puct: 1.0,
            temperature: 1.0,
            seed: 0,
            fpu: FpuMode::SiblingMean,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("search needs at least one iteration".into()));
        }
        if !(self.c_puct >= 0.0 && self.c_puct.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid c_puct {}", self.c_puct)));
        }
        if !(self.temperature >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "invalid temperature {}",
                self.temperature
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MctsNode {
    /// Game state id.
    pub state: usize,
    pub player: usize,
    pub terminal: bool,
    /// Model value (exact reward at terminals) for the player to move.
    pub value: f64,
    /// Prior over actions; empty at terminals.
    pub prior: Vec<f64>,
    pub visits: Vec<u32>,
    pub value_sums: Vec<f64>,
    pub children: Vec<Option<usize>>,
}

impl MctsNode {
    /// A node with explicit statistics, mainly for inspecting the selection rule.
    pub fn with_stats(prior: &Policy, visits: Vec<u32>, q: Vec<f64>, value: f64) -> Self {
        let n = prior.len();
        assert!(visits.len() == n && q.len() == n);
        let value_sums = q.iter().zip(&visits).map(|(q, n)| q * *n as f64).collect();
        Self {
            state: 0,
            player: 0,
            terminal: false,
            value,
            prior: prior.probs().to_vec(),
            visits,
            value_sums,
            children: vec![None; n],
        }
    }

    fn terminal(state: usize, player: usize, value: f64) -> Self {
        Self {
            state,
            player,
            terminal: true,
            value,
            prior: Vec::new(),
            visits: Vec::new(),
            value_sums: Vec::new(),
            children: Vec::new(),
        }
    }

    pub fn num_actions(&self) -> usize {
        self.prior.len()
    }

    pub fn total_visits(&self) -> u64 {
        self.visits.iter().map(|&n| n as u64).sum()
    }

    /// Mean backed-up value of `action`, if it has been tried.
    pub fn q(&self, action: usize) -> Option<f64> {
        (self.visits[action] > 0).then(|| self.value_sums[action] / self.visits[action] as f64)
    }

    /// Equal-weighted mean of the visited actions' `Q`.
    pub fn visited_mean_q(&self) -> Option<f64> {
        let (sum, count) = (0..self.num_actions())
            .filter_map(|a| self.q(a))
            .fold((0.0, 0usize), |(s, c), q| (s + q, c + 1));
        (count > 0).then(|| sum / count as f64)
    }

    fn unvisited_value(&self, fpu: FpuMode) -> f64 {
        match fpu {
            FpuMode::SiblingMean => self.visited_mean_q().unwrap_or(self.value),
            FpuMode::NodeValue => self.value,
        }
    }

    /// PUCT scores `Q(a) + c·τ(a)·√(Σ_b N(b)) / (N(a) + 1)`.
    pub fn puct_scores(&self, c_puct: f64, fpu: FpuMode) -> Vec<f64> {
        let sqrt_total = (self.total_visits() as f64).sqrt();
        let fallback = self.unvisited_value(fpu);
        (0..self.num_actions())
            .map(|a| {
                let q = self.q(a).unwrap_or(fallback);
                q + c_puct * self.prior[a] * sqrt_total / (self.visits[a] as f64 + 1.0)
            })
            .collect()
    }

    /// Highest PUCT score; ties go to the higher prior, then the lower index.
    pub fn select_action(&self, c_puct: f64, fpu: FpuMode) -> usize {
        let scores = self.puct_scores(c_puct, fpu);
        let mut best = 0;
        for a in 1..scores.len() {
            if scores[a] > scores[best] || (scores[a] == scores[best] && self.prior[a] > self.prior[best]) {
                best = a;
            }
        }
        best
    }

    /// Root policy from visit counts: `N^{1/T}` normalized, argmax for `T = 0`
    /// (ties by prior, then index), the prior when nothing was visited.
    pub fn visits_to_policy(&self, temperature: f64) -> Policy {
        let n = self.num_actions();
        if self.total_visits() == 0 {
            return Policy::from_normalized(self.prior.clone());
        }
        if temperature == 0.0 {
            let mut best = 0;
            for a in 1..n {
                let (va, vb) = (self.visits[a], self.visits[best]);
                if va > vb || (va == vb && self.prior[a] > self.prior[best]) {
                    best = a;
                }
            }
            return Policy::pure(n, best);
        }
        let max = *self.visits.iter().max().expect("non-empty") as f64;
        let weights = self
            .visits
            .iter()
            .map(|&v| {
                if v == 0 {
                    0.0
                } else {
                    (((v as f64).ln() - max.ln()) / temperature).exp()
                }
            })
            .collect();
        Policy::from_weights(weights).expect("some action was visited")
    }

    /// Smooth root policy: maximizer of `Σ π·Q − λ·KL(τ ‖ π)` with
    /// `λ = c_puct·√(Σ n) / (k + Σ n)`; unvisited actions take the mean of
    /// the visited ones' `Q`.
    pub fn grill_policy(&self, c_puct: f64, k: f64) -> Result<Policy> {
        let mean = self.visited_mean_q().ok_or(Error::NoVisitedActions)?;
        let total = self.total_visits() as f64;
        let lambda = grill_lambda(c_puct, total, k);
        let q: Vec<f64> = (0..self.num_actions()).map(|a| self.q(a).unwrap_or(mean)).collect();
        let prior = Policy::new(self.prior.clone())?;
        Ok(reverse_kl_opt(&q, &prior, lambda)?.policy)
    }
}

/// `c_puct·√(Σ n) / (k + Σ n)`.
pub fn grill_lambda(c_puct: f64, total_visits: f64, k: f64) -> f64 {
    c_puct * total_visits.sqrt() / (k + total_visits)
}

/// A finished search; node 0 is the root.
#[derive(Debug, Clone)]
pub struct SearchTree {
    nodes: Vec<MctsNode>,
    iterations: usize,
}

impl SearchTree {
    pub fn root(&self) -> &MctsNode {
        &self.nodes[0]
    }

    pub fn nodes(&self) -> &[MctsNode] {
        &self.nodes
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Per-root-action rows `(action, N, Q, prior)`.
    pub fn root_stats(&self) -> Vec<RootStat> {
        let root = self.root();
        (0..root.num_actions())
            .map(|a| RootStat {
                action: a,
                visits: root.visits[a],
                q: root.q(a),
                prior: root.prior[a],
            })
            .collect()
    }

    /// Root statistics as CSV with header `action,visits,q,prior`.
    pub fn root_stats_csv(&self) -> String {
        let mut out = String::from("action,visits,q,prior\n");
        for s in self.root_stats() {
            let q = s.q.map_or_else(|| "nan".to_string(), |q| format!("{q:.8e}"));
            out.push_str(&format!("{},{},{},{:.8e}\n", s.action, s.visits, q, s.prior));
        }
        out
    }

    /// Checks `Σ_a N(s,a) = (iterations through s) − 1` at every interior node.
    pub fn check_visit_conservation(&self) -> std::result::Result<(), String> {
        let mut incoming = vec![0u64; self.nodes.len()];
        incoming[0] = self.iterations as u64;
        for node in &self.nodes {
            for (a, child) in node.children.iter().enumerate() {
                if let Some(c) = child {
                    incoming[*c] += node.visits[a] as u64;
                }
            }
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if !node.terminal && node.total_visits() + 1 != incoming[i] {
                return Err(format!(
                    "node {i} (state {}): {} child visits, {} arrivals",
                    node.state,
                    node.total_visits(),
                    incoming[i]
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootStat {
    pub action: usize,
    pub visits: u32,
    pub q: Option<f64>,
    pub prior: f64,
}

fn new_node(game: &TreeGame, model: &TreeModel, state: usize) -> MctsNode {
    let player = game.player_to_move(state);
    let sign = TreeGame::sign(player);
    if game.is_terminal(state) {
        return MctsNode::terminal(state, player, sign * game.terminal_reward(state));
    }
    let prior = model.prior(state).probs().to_vec();
    let n = prior.len();
    MctsNode {
        state,
        player,
        terminal: false,
        value: sign * model.value(state),
        prior,
        visits: vec![0; n],
        value_sums: vec![0.0; n],
        children: vec![None; n],
    }
}

/// Runs `config.iterations` iterations from `root_state`; the first one only
/// expands the root.
pub fn run_search(
    game: &TreeGame,
    model: &TreeModel,
    root_state: usize,
    config: &SearchConfig,
) -> Result<SearchTree> {
    config.validate()?;
    if game.is_terminal(root_state) {
        return Err(Error::InvalidArgument("cannot search from a terminal state".into()));
    }
    let mut nodes = vec![new_node(game, model, root_state)];
    let mut path: Vec<(usize, usize)> = Vec::with_capacity(game.depth() + 1);
    for _ in 1..config.iterations {
        path.clear();
        let mut current = 0usize;
        let leaf_value_p0 = loop {
            let a = nodes[current].select_action(config.c_puct, config.fpu);
            path.push((current, a));
            match nodes[current].children[a] {
                Some(c) if nodes[c].terminal => {
                    break TreeGame::sign(nodes[c].player) * nodes[c].value;
                }
                Some(c) => current = c,
                None => {
                    let state = game.child(nodes[current].state, a);
                    let node = new_node(game, model, state);
                    let v = TreeGame::sign(node.player) * node.value;
                    nodes.push(node);
                    let id = nodes.len() - 1;
                    nodes[current].children[a] = Some(id);
                    break v;
                }
            }
        };
        for &(n, a) in &path {
            let node = &mut nodes[n];
            node.visits[a] += 1;
            node.value_sums[a] += TreeGame::sign(node.player) * leaf_value_p0;
        }
    }
    debug_assert!(nodes[0].prior.iter().sum::<f64>() - 1.0 <= SUM_TOLERANCE);
    Ok(SearchTree {
        nodes,
        iterations: config.iterations,
    })
}
