use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{default_periods, Action, Game, GameError, GameState};
use crate::level::Position;
use crate::rng::{self, RandomStream};

/// Top-down rules: orthogonal moves, enemies wander at per-type periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DungeonRules {
    /// Steps between random moves, per enemy token.
    #[serde(default = "default_periods")]
    pub periods: BTreeMap<char, u32>,
}

impl Default for DungeonRules {
    fn default() -> Self {
        Self {
            periods: default_periods(),
        }
    }
}

impl DungeonRules {
    pub fn period(&self, token: char) -> u32 {
        self.periods.get(&token).copied().unwrap_or(1)
    }

    pub(crate) fn validate(&self) -> Result<(), GameError> {
        match self.periods.iter().find(|(_, &p)| p == 0) {
            Some((t, _)) => Err(GameError::InvalidRules(format!("enemy {t:?} has period 0"))),
            None => Ok(()),
        }
    }
}

fn open(game: &Game, col: isize, row: isize) -> bool {
    game.in_grid(col, row) && !game.is_solid(col, row)
}

pub(super) fn legal_actions(game: &Game, state: &GameState) -> Vec<Action> {
    let (c, r) = (state.player.col as isize, state.player.row as isize);
    Action::DUNGEON
        .into_iter()
        .filter(|a| *a == Action::Wait || open(game, c + a.dx(), r + a.dy()))
        .collect()
}

pub(super) fn step(game: &Game, state: &mut GameState, action: Action, rng: &mut RandomStream) {
    let p = state.player;
    state.player = Position::new(
        (p.col as isize + action.dx()) as usize,
        (p.row as isize + action.dy()) as usize,
    );
    game.contact_before_entities(state);
    if state.status.is_terminal() {
        return;
    }

    let tick = state.steps + 1;
    let mut options = Vec::with_capacity(4);
    for e in state.entities.iter_mut() {
        if !tick.is_multiple_of(e.period) {
            continue;
        }
        options.clear();
        let (c, r) = (e.position.col as isize, e.position.row as isize);
        for (dc, dr) in [(0, -1), (0, 1), (-1, 0), (1, 0)] {
            if open(game, c + dc, r + dr) {
                options.push(Position::new((c + dc) as usize, (r + dr) as usize));
            }
        }
        if !options.is_empty() {
            e.position = options[rng::index(rng, options.len())];
        }
    }
    game.resolve(state, None);
}

#[cfg(test)]
mod tests {
    use super::super::test_support::dungeon;
    use super::*;
    use crate::rng::stream;

    #[test]
    fn enemies_move_on_their_period() {
        let g = dungeon("wwwwwww\nwA...gw\nw.....w\nw..2..w\nw+....w\nwwwwwww\n");
        let mut s = g.initial_state();
        let mut rng = stream(11);
        let start = s.entities[0].position;
        s = g.step(&s, Action::Wait, &mut rng).unwrap();
        // period 2: no move on tick 1
        assert_eq!(s.entities[0].position, start);
        s = g.step(&s, Action::Wait, &mut rng).unwrap();
        assert_eq!(s.entities[0].position.manhattan(start), 1);
    }

    #[test]
    fn boxed_enemy_stays_put() {
        let g = dungeon("wwwwww\nwA.+gw\nwwwwww\nww1www\nwwwwww\n");
        let mut s = g.initial_state();
        let mut rng = stream(2);
        for _ in 0..5 {
            s = g.step(&s, Action::Wait, &mut rng).unwrap();
        }
        assert_eq!(s.entities[0].position, Position::new(2, 3));
    }
}
