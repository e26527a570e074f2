//! Forward models: the game-state contract the search agent plays against,
//! with a top-down dungeon and a side-view platformer implementation.

mod dungeon;
mod platformer;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::level::{Category, Level, Position};
use crate::rng::RandomStream;

pub use dungeon::DungeonRules;
pub use platformer::PlatformerRules;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("state is terminal")]
    TerminalState,
    #[error("action {0:?} is not legal in this state")]
    IllegalAction(Action),
    #[error("no cells satisfy goal on token {0:?}")]
    NoGoalCells(char),
    #[error("level has no player-start token")]
    NoPlayerStart,
    #[error("goal sequence is empty")]
    EmptyGoalSpec,
    #[error("invalid rules: {0}")]
    InvalidRules(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
    Wait,
    Jump,
    JumpLeft,
    JumpRight,
}

impl Action {
    pub const DUNGEON: [Action; 5] = [
        Action::Up,
        Action::Down,
        Action::Left,
        Action::Right,
        Action::Wait,
    ];
    pub const PLATFORMER: [Action; 6] = [
        Action::Left,
        Action::Right,
        Action::JumpLeft,
        Action::JumpRight,
        Action::Jump,
        Action::Wait,
    ];

    /// Horizontal component.
    pub fn dx(self) -> isize {
        match self {
            Action::Left | Action::JumpLeft => -1,
            Action::Right | Action::JumpRight => 1,
            _ => 0,
        }
    }

    pub fn dy(self) -> isize {
        match self {
            Action::Up => -1,
            Action::Down => 1,
            _ => 0,
        }
    }

    pub fn jumps(self) -> bool {
        matches!(self, Action::Jump | Action::JumpLeft | Action::JumpRight)
    }
}

/// One step of the goal sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalPredicate {
    /// Player stands on a cell holding the token.
    Reach(char),
    /// Player's column contains the token somewhere.
    ReachColumn(char),
    /// Player inventory contains the token.
    Hold(char),
}

impl GoalPredicate {
    pub fn token(self) -> char {
        match self {
            GoalPredicate::Reach(t) | GoalPredicate::ReachColumn(t) | GoalPredicate::Hold(t) => t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GoalSpec(pub Vec<GoalPredicate>);

impl GoalSpec {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn tokens(&self) -> Vec<char> {
        self.0.iter().map(|g| g.token()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailurePredicate {
    /// Sharing a cell with a threat-categorized token or entity.
    ThreatContact,
    /// Falling one row below the grid; the event's cause is the given token.
    BelowScreen(char),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FailureSpec(pub Vec<FailurePredicate>);

impl FailureSpec {
    pub fn threat_contact(&self) -> bool {
        self.0.contains(&FailurePredicate::ThreatContact)
    }

    pub fn below_screen(&self) -> Option<char> {
        self.0.iter().find_map(|f| match f {
            FailurePredicate::BelowScreen(t) => Some(*t),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FailureEvent {
    pub position: Position,
    pub cause: char,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rules {
    Dungeon(DungeonRules),
    Platformer(PlatformerRules),
}

impl Rules {
    pub fn is_side_view(&self) -> bool {
        matches!(self, Rules::Platformer(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ongoing,
    Win,
    Loss(FailureEvent),
}

impl Status {
    pub fn is_terminal(self) -> bool {
        !matches!(self, Status::Ongoing)
    }
}

/// A moving threat.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entity {
    pub position: Position,
    pub token: char,
    pub period: u32,
    /// Patrol direction for side-view enemies; unused top-down.
    pub dir: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameState {
    pub player: Position,
    pub inventory: Vec<char>,
    /// Cells whose pickup token has been taken.
    pub collected: Vec<Position>,
    pub entities: Vec<Entity>,
    pub goal_index: usize,
    pub steps: u32,
    /// Remaining rise of an ongoing jump.
    pub ascent: u32,
    /// Horizontal direction carried through the air, -1, 0 or 1.
    pub drift: i8,
    pub status: Status,
}

/// A playable level: static terrain, rules, goals and failures.
#[derive(Debug, Clone)]
pub struct Game {
    terrain: Level,
    rules: Rules,
    goals: GoalSpec,
    failures: FailureSpec,
    start: Position,
    entities: Vec<Entity>,
    goal_cells: Vec<Vec<Position>>,
    goal_columns: Vec<Vec<usize>>,
    /// Shortest goal-to-goal Manhattan legs left after finishing goal `i`.
    remaining: Vec<usize>,
}

impl Game {
    /// Builds the forward model for `level`. Threat tokens that are not pits
    /// become moving entities; pits stay in the terrain.
    pub fn new(
        level: &Level,
        rules: Rules,
        goals: GoalSpec,
        failures: FailureSpec,
    ) -> Result<Self, GameError> {
        if goals.is_empty() {
            return Err(GameError::EmptyGoalSpec);
        }
        let alphabet = level.alphabet().clone();
        let start = level
            .positions()
            .find(|&p| alphabet.has(level.get(p), Category::PlayerStart))
            .ok_or(GameError::NoPlayerStart)?;
        match &rules {
            Rules::Dungeon(r) => r.validate()?,
            Rules::Platformer(r) => {
                r.validate()?;
                if failures.below_screen().is_none() {
                    return Err(GameError::InvalidRules(
                        "side-view domain needs a below-screen failure".into(),
                    ));
                }
            }
        }

        let mut terrain = level.clone();
        let mut entities = Vec::new();
        for p in level.positions() {
            let t = level.get(p);
            if alphabet.has(t, Category::Threat) && !alphabet.has(t, Category::Pit) {
                let period = match &rules {
                    Rules::Dungeon(r) => r.period(t),
                    Rules::Platformer(r) => r.enemy_period,
                };
                entities.push(Entity {
                    position: p,
                    token: t,
                    period,
                    dir: -1,
                });
                terrain.set(p, alphabet.empty());
            }
        }

        let mut goal_cells = Vec::with_capacity(goals.len());
        let mut goal_columns = Vec::with_capacity(goals.len());
        for g in &goals.0 {
            let cells = terrain.find(g.token());
            if cells.is_empty() {
                return Err(GameError::NoGoalCells(g.token()));
            }
            let mut cols: Vec<usize> = cells.iter().map(|p| p.col).collect();
            cols.dedup();
            cols.sort_unstable();
            cols.dedup();
            goal_cells.push(cells);
            goal_columns.push(cols);
        }

        let mut remaining = vec![0; goals.len()];
        for i in (0..goals.len().saturating_sub(1)).rev() {
            let by_column = matches!(goals.0[i + 1], GoalPredicate::ReachColumn(_));
            let next = &goal_cells[i + 1];
            let leg = goal_cells[i]
                .iter()
                .flat_map(|&a| {
                    next.iter().map(move |&b| {
                        if by_column {
                            a.col.abs_diff(b.col)
                        } else {
                            a.manhattan(b)
                        }
                    })
                })
                .min()
                .expect("goal cells are non-empty");
            remaining[i] = leg + remaining[i + 1];
        }

        Ok(Self {
            terrain,
            rules,
            goals,
            failures,
            start,
            entities,
            goal_cells,
            goal_columns,
            remaining,
        })
    }

    pub fn terrain(&self) -> &Level {
        &self.terrain
    }

    pub fn rules(&self) -> &Rules {
        &self.rules
    }

    pub fn goals(&self) -> &GoalSpec {
        &self.goals
    }

    pub fn start(&self) -> Position {
        self.start
    }

    pub fn initial_state(&self) -> GameState {
        self.state_at(self.start)
    }

    /// A fresh state with the player placed at `player`.
    pub fn state_at(&self, player: Position) -> GameState {
        let mut s = GameState {
            player,
            inventory: Vec::new(),
            collected: Vec::new(),
            entities: self.entities.clone(),
            goal_index: 0,
            steps: 0,
            ascent: 0,
            drift: 0,
            status: Status::Ongoing,
        };
        self.resolve(&mut s, None);
        s
    }

    pub fn is_terminal(&self, state: &GameState) -> Status {
        state.status
    }

    pub(crate) fn is_solid(&self, col: isize, row: isize) -> bool {
        self.terrain
            .try_get(col, row)
            .is_some_and(|t| self.terrain.alphabet().is_solid(t))
    }

    pub(crate) fn in_grid(&self, col: isize, row: isize) -> bool {
        col >= 0
            && row >= 0
            && (col as usize) < self.terrain.width()
            && (row as usize) < self.terrain.height()
    }

    pub fn legal_actions(&self, state: &GameState) -> Result<Vec<Action>, GameError> {
        if state.status.is_terminal() {
            return Err(GameError::TerminalState);
        }
        Ok(match &self.rules {
            Rules::Dungeon(_) => dungeon::legal_actions(self, state),
            Rules::Platformer(_) => platformer::legal_actions(self, state),
        })
    }

    pub fn step(
        &self,
        state: &GameState,
        action: Action,
        rng: &mut RandomStream,
    ) -> Result<GameState, GameError> {
        if !self.legal_actions(state)?.contains(&action) {
            return Err(GameError::IllegalAction(action));
        }
        let mut next = state.clone();
        match &self.rules {
            Rules::Dungeon(_) => dungeon::step(self, &mut next, action, rng),
            Rules::Platformer(r) => platformer::step(self, r, &mut next, action),
        }
        next.steps += 1;
        Ok(next)
    }

    /// Value of a state in [-1, 1]: 1 for a win, -1 for a loss, otherwise
    /// `1 - (d + legs) / (width + height)` floored at 0, where `d` is the
    /// distance to the current goal and `legs` the shortest legs between the
    /// goals after it.
    pub fn evaluate_state(&self, state: &GameState) -> Result<f64, GameError> {
        match state.status {
            Status::Win => Ok(1.0),
            Status::Loss(_) => Ok(-1.0),
            Status::Ongoing => {
                let gi = state.goal_index.min(self.goals.len() - 1);
                let d = (self.goal_distance(state)? + self.remaining[gi]) as f64;
                let span = (self.terrain.width() + self.terrain.height()) as f64;
                Ok((1.0 - d / span).max(0.0))
            }
        }
    }

    /// Manhattan distance from the player to the nearest cell satisfying the
    /// current goal.
    pub fn goal_distance(&self, state: &GameState) -> Result<usize, GameError> {
        let gi = state.goal_index.min(self.goals.len() - 1);
        let goal = self.goals.0[gi];
        let p = state.player;
        match goal {
            GoalPredicate::ReachColumn(_) => Ok(self.goal_columns[gi]
                .iter()
                .map(|&c| c.abs_diff(p.col))
                .min()
                .expect("non-empty")),
            GoalPredicate::Reach(t) | GoalPredicate::Hold(t) => self.goal_cells[gi]
                .iter()
                .filter(|c| !state.collected.contains(c))
                .map(|c| c.manhattan(p))
                .min()
                .ok_or(GameError::NoGoalCells(t)),
        }
    }

    fn goal_holds(&self, state: &GameState, gi: usize) -> bool {
        let p = state.player;
        match self.goals.0[gi] {
            GoalPredicate::Hold(t) => state.inventory.contains(&t),
            GoalPredicate::Reach(t) => {
                self.terrain.in_bounds(p)
                    && self.terrain.get(p) == t
                    && !state.collected.contains(&p)
            }
            GoalPredicate::ReachColumn(_) => self.goal_columns[gi].binary_search(&p.col).is_ok(),
        }
    }

    /// Applies failures, pickups and goal progress after movement. `moved`
    /// carries the player's previous cell and the entities' previous cells for
    /// pass-through contact checks.
    fn resolve(&self, state: &mut GameState, moved: Option<(Position, &[Entity])>) {
        if state.status.is_terminal() {
            return;
        }
        let h = self.terrain.height();
        if state.player.row >= h {
            if let Some(cause) = self.failures.below_screen() {
                state.status = Status::Loss(FailureEvent {
                    position: Position::new(state.player.col, h - 1),
                    cause,
                });
                return;
            }
        }
        if self.failures.threat_contact() {
            let p = state.player;
            let alphabet = self.terrain.alphabet();
            if self.terrain.in_bounds(p) && alphabet.has(self.terrain.get(p), Category::Threat) {
                state.status = Status::Loss(FailureEvent {
                    position: p,
                    cause: self.terrain.get(p),
                });
                return;
            }
            let hit = state.entities.iter().enumerate().find(|(i, e)| {
                e.position == p
                    || moved.is_some_and(|(prev, before)| {
                        before[*i].position == p && e.position == prev
                    })
            });
            if let Some((_, e)) = hit {
                state.status = Status::Loss(FailureEvent {
                    position: p,
                    cause: e.token,
                });
                return;
            }
        }

        let p = state.player;
        if self.terrain.in_bounds(p) {
            let t = self.terrain.get(p);
            if self.terrain.alphabet().has(t, Category::Key) && !state.collected.contains(&p) {
                state.inventory.push(t);
                state.collected.push(p);
            }
        }
        while state.goal_index < self.goals.len() && self.goal_holds(state, state.goal_index) {
            state.goal_index += 1;
        }
        if state.goal_index == self.goals.len() {
            state.status = Status::Win;
        }
    }

    /// Contact check between player movement and entity movement.
    fn contact_before_entities(&self, state: &mut GameState) {
        if !self.failures.threat_contact() || state.status.is_terminal() {
            return;
        }
        if let Some(e) = state.entities.iter().find(|e| e.position == state.player) {
            state.status = Status::Loss(FailureEvent {
                position: state.player,
                cause: e.token,
            });
        }
    }
}

pub(crate) fn default_periods() -> BTreeMap<char, u32> {
    [('1', 1), ('2', 2), ('3', 3)].into()
}
