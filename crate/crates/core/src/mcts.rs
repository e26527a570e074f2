//! UCT Monte Carlo tree search playthroughs.
//!
//! A playthrough builds a fresh search tree at every real move, runs a fixed
//! number of iterations (selection, expansion, random rollout,
//! backpropagation) and commits the most-visited root action. Every tree
//! node's player position and every loss met in the tree or in a rollout is
//! written to a [`PlaythroughRecord`].

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{Action, FailureEvent, Game, GameError, GameState, Status};
use crate::kit::KnowledgeKit;
use crate::level::Position;
use crate::rng::{self, RandomStream};

/// Rollouts flagged unbounded still stop here so a random walk that never
/// meets a terminal state cannot hang the search.
pub const UNBOUNDED_ROLLOUT_CAP: u32 = 10_000;

/// Retries granted to a failed playthrough before its record is kept anyway.
pub const PLAYTHROUGH_RETRIES: u32 = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("node has not been visited")]
    UnvisitedNode,
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("invalid search budget: {0}")]
    InvalidBudget(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub iterations_per_move: u32,
    pub max_moves: u32,
}

impl SearchBudget {
    pub fn validate(&self) -> Result<(), SearchError> {
        if self.iterations_per_move == 0 || self.max_moves == 0 {
            return Err(SearchError::InvalidBudget(
                "iterations per move and max moves must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Positions and failures harvested from one or more playthroughs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaythroughRecord {
    pub visited: BTreeSet<Position>,
    /// Multiset of failures, kept sorted so merges are order-independent.
    pub failures: Vec<FailureEvent>,
    pub success: bool,
    pub executed_path: Vec<Position>,
}

impl PlaythroughRecord {
    /// Union of visited positions and multiset union of failures. The
    /// executed paths are concatenated; `success` is the conjunction.
    pub fn merge(&mut self, other: &PlaythroughRecord) {
        self.visited.extend(other.visited.iter().copied());
        self.failures.extend(other.failures.iter().copied());
        self.failures.sort_unstable();
        self.executed_path
            .extend(other.executed_path.iter().copied());
        self.success = self.success && other.success;
    }

    pub fn is_empty(&self) -> bool {
        self.visited.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }
}

/// `mean + c * sqrt(ln(parent_visits) / visits)`.
pub fn uct_value(mean: f64, parent_visits: u32, visits: u32, c: f64) -> Result<f64, SearchError> {
    if visits == 0 {
        return Err(SearchError::UnvisitedNode);
    }
    let explore = ((parent_visits as f64).ln() / visits as f64).sqrt();
    Ok(mean + c * explore)
}

pub type NodeId = usize;

#[derive(Debug, Clone)]
pub struct SearchNode {
    pub state: GameState,
    pub visits: u32,
    pub total_value: f64,
    /// Rollouts started from this node.
    pub simulations: u32,
    pub parent: Option<NodeId>,
    pub children: Vec<(Action, NodeId)>,
    untried: Vec<Action>,
    actions_known: bool,
}

impl SearchNode {
    pub fn mean_value(&self) -> f64 {
        if self.visits == 0 {
            0.0
        } else {
            self.total_value / self.visits as f64
        }
    }

    pub fn position(&self) -> Position {
        self.state.player
    }

    pub fn fully_expanded(&self) -> bool {
        self.actions_known && self.untried.is_empty()
    }
}

/// Arena-backed search tree rooted at index 0.
#[derive(Debug, Clone)]
pub struct SearchTree {
    nodes: Vec<SearchNode>,
}

impl SearchTree {
    pub fn new(game: &Game, root: GameState) -> Result<Self, SearchError> {
        let untried = game.legal_actions(&root)?;
        Ok(Self {
            nodes: vec![SearchNode {
                state: root,
                visits: 0,
                total_value: 0.0,
                simulations: 0,
                parent: None,
                children: Vec::new(),
                untried,
                actions_known: true,
            }],
        })
    }

    pub fn root(&self) -> &SearchNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: NodeId) -> &SearchNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[SearchNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// UCT score of a non-root node against its parent's visit count.
    pub fn uct(&self, id: NodeId, c: f64) -> Result<f64, SearchError> {
        let node = &self.nodes[id];
        let parent = node.parent.ok_or(SearchError::UnvisitedNode)?;
        uct_value(node.mean_value(), self.nodes[parent].visits, node.visits, c)
    }

    fn select_child(
        &self,
        id: NodeId,
        c: f64,
        rng: &mut RandomStream,
    ) -> Result<(Action, NodeId), SearchError> {
        let mut best = f64::NEG_INFINITY;
        let mut ties: Vec<(Action, NodeId)> = Vec::new();
        for &(action, child) in &self.nodes[id].children {
            let v = self.uct(child, c)?;
            if v > best {
                best = v;
                ties.clear();
                ties.push((action, child));
            } else if v == best {
                ties.push((action, child));
            }
        }
        Ok(ties[rng::index(rng, ties.len())])
    }

    /// One selection / expansion / simulation / backpropagation pass.
    ///
    /// The tree is open-loop: enemy moves are resampled on every descent, so
    /// a node's value averages over the outcomes of its action sequence and
    /// its stored state is just the sample seen when it was expanded.
    pub fn iterate(
        &mut self,
        game: &Game,
        kit: &KnowledgeKit,
        rng: &mut RandomStream,
        record: &mut PlaythroughRecord,
    ) -> Result<(), SearchError> {
        let height = game.terrain().height();
        let mut id = 0;
        let mut state = self.nodes[0].state.clone();
        while !state.status.is_terminal() {
            if !self.nodes[id].actions_known {
                self.nodes[id].untried = game.legal_actions(&state)?;
                self.nodes[id].actions_known = true;
            }
            if !self.nodes[id].untried.is_empty() {
                let k = rng::index(rng, self.nodes[id].untried.len());
                let action = self.nodes[id].untried.swap_remove(k);
                state = game.step(&state, action, rng)?;
                record.visited.insert(clamp_row(state.player, height));
                let child = self.nodes.len();
                self.nodes.push(SearchNode {
                    state: state.clone(),
                    visits: 0,
                    total_value: 0.0,
                    simulations: 0,
                    parent: Some(id),
                    children: Vec::new(),
                    untried: Vec::new(),
                    actions_known: false,
                });
                self.nodes[id].children.push((action, child));
                id = child;
                break;
            }
            let (action, child) = self.select_child(id, kit.c, rng)?;
            state = game.step(&state, action, rng)?;
            id = child;
        }

        if !state.status.is_terminal() {
            let cap = kit.rollout_depth.unwrap_or(UNBOUNDED_ROLLOUT_CAP);
            let mut depth = 0;
            while !state.status.is_terminal() && depth < cap {
                let actions = game.legal_actions(&state)?;
                let a = actions[rng::index(rng, actions.len())];
                state = game.step(&state, a, rng)?;
                depth += 1;
            }
        }
        let value = game.evaluate_state(&state)?;
        if let Status::Loss(ev) = state.status {
            record.failures.push(ev);
        }
        self.nodes[id].simulations += 1;

        let mut cur = Some(id);
        while let Some(i) = cur {
            let n = &mut self.nodes[i];
            n.visits += 1;
            n.total_value += value;
            cur = n.parent;
        }
        Ok(())
    }

    /// Most-visited root action, ties broken uniformly.
    pub fn best_action(&self, rng: &mut RandomStream) -> Option<Action> {
        let children = &self.nodes[0].children;
        let most = children.iter().map(|&(_, c)| self.nodes[c].visits).max()?;
        let ties: Vec<Action> = children
            .iter()
            .filter(|&&(_, c)| self.nodes[c].visits == most)
            .map(|&(a, _)| a)
            .collect();
        Some(ties[rng::index(rng, ties.len())])
    }
}

fn clamp_row(p: Position, height: usize) -> Position {
    Position::new(p.col, p.row.min(height - 1))
}

/// Plays the level from its start with MCTS until a win, a loss or the move
/// budget runs out. Running out of moves is reported as `success = false`.
pub fn run_playthrough(
    game: &Game,
    kit: &KnowledgeKit,
    budget: &SearchBudget,
    seed: u64,
) -> Result<PlaythroughRecord, SearchError> {
    budget.validate()?;
    let height = game.terrain().height();
    let mut rng = rng::stream(seed);
    let mut record = PlaythroughRecord::default();
    let mut state = game.initial_state();
    // every goal must have a cell before searching
    game.evaluate_state(&state)?;
    record.executed_path.push(clamp_row(state.player, height));
    record.visited.insert(clamp_row(state.player, height));

    let mut moves = 0;
    while !state.status.is_terminal() && moves < budget.max_moves {
        let mut tree = SearchTree::new(game, state.clone())?;
        for _ in 0..budget.iterations_per_move {
            tree.iterate(game, kit, &mut rng, &mut record)?;
        }
        let action = tree
            .best_action(&mut rng)
            .expect("non-terminal root has at least one legal action");
        state = game.step(&state, action, &mut rng)?;
        let p = clamp_row(state.player, height);
        record.executed_path.push(p);
        record.visited.insert(p);
        if let Status::Loss(ev) = state.status {
            record.failures.push(ev);
        }
        moves += 1;
    }
    record.failures.sort_unstable();
    record.success = state.status == Status::Win;
    Ok(record)
}

/// Merges `t` playthroughs seeded `base_seed .. base_seed + t`. A failed
/// playthrough is retried with fresh seeds up to [`PLAYTHROUGH_RETRIES`]
/// times; the last attempt's record is merged either way.
pub fn collect_records(
    game: &Game,
    kit: &KnowledgeKit,
    t: u32,
    budget: &SearchBudget,
    base_seed: u64,
) -> Result<PlaythroughRecord, SearchError> {
    if t == 0 {
        return Err(SearchError::InvalidBudget("t must be at least 1".into()));
    }
    let mut merged = PlaythroughRecord {
        success: true,
        ..Default::default()
    };
    for i in 0..t as u64 {
        let mut attempt = 0;
        let record = loop {
            let seed = base_seed.wrapping_add(i).wrapping_add(attempt * t as u64);
            let r = run_playthrough(game, kit, budget, seed)?;
            if r.success || attempt as u32 >= PLAYTHROUGH_RETRIES {
                break r;
            }
            attempt += 1;
        };
        merged.merge(&record);
    }
    Ok(merged)
}
