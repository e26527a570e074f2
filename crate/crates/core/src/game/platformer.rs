use serde::{Deserialize, Serialize};

use super::{Action, Game, GameError, GameState};
use crate::level::Position;

/// Side-view rules: 1 cell/step horizontal speed, a fixed ascent when
/// jumping from support, 1 cell/step gravity otherwise. There is no air
/// control: a player off the ground keeps the horizontal direction it had
/// when it left. Enemies patrol their row and turn around at walls and
/// ledges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatformerRules {
    /// Cells risen over the same number of steps after a jump.
    #[serde(default = "default_jump")]
    pub jump_height: u32,
    /// Steps between enemy patrol moves.
    #[serde(default = "default_enemy_period")]
    pub enemy_period: u32,
}

fn default_jump() -> u32 {
    3
}

fn default_enemy_period() -> u32 {
    2
}

impl Default for PlatformerRules {
    fn default() -> Self {
        Self {
            jump_height: default_jump(),
            enemy_period: default_enemy_period(),
        }
    }
}

impl PlatformerRules {
    pub(crate) fn validate(&self) -> Result<(), GameError> {
        if self.jump_height == 0 || self.enemy_period == 0 {
            return Err(GameError::InvalidRules(
                "jump height and enemy period must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn grounded(game: &Game, p: Position) -> bool {
    game.is_solid(p.col as isize, p.row as isize + 1)
}

pub(super) fn legal_actions(game: &Game, state: &GameState) -> Vec<Action> {
    if grounded(game, state.player) && state.ascent == 0 {
        Action::PLATFORMER.to_vec()
    } else {
        vec![Action::Wait]
    }
}

pub(super) fn step(game: &Game, rules: &PlatformerRules, state: &mut GameState, action: Action) {
    let before = state.player;
    let mut p = before;
    if grounded(game, p) && state.ascent == 0 {
        state.drift = action.dx() as i8;
        if action.jumps() {
            state.ascent = rules.jump_height;
        }
    }

    let col = p.col as isize + state.drift as isize;
    if game.in_grid(col, p.row as isize) && !game.is_solid(col, p.row as isize) {
        p.col = col as usize;
    }

    if state.ascent > 0 {
        if p.row > 0 && !game.is_solid(p.col as isize, p.row as isize - 1) {
            p.row -= 1;
            state.ascent -= 1;
        } else {
            state.ascent = 0;
        }
    } else if !grounded(game, p) {
        p.row += 1;
    }
    state.player = p;

    game.contact_before_entities(state);
    if state.status.is_terminal() || p.row >= game.terrain().height() {
        game.resolve(state, None);
        return;
    }

    let previous = state.entities.clone();
    let tick = state.steps + 1;
    for e in state.entities.iter_mut() {
        if !tick.is_multiple_of(e.period) {
            continue;
        }
        let next = e.position.col as isize + e.dir as isize;
        let row = e.position.row as isize;
        let blocked =
            !game.in_grid(next, row) || game.is_solid(next, row) || !game.is_solid(next, row + 1);
        if blocked {
            e.dir = -e.dir;
        } else {
            e.position.col = next as usize;
        }
    }
    game.resolve(state, Some((before, &previous)));
}

#[cfg(test)]
mod tests {
    use super::super::test_support::platformer;
    use super::super::{FailureEvent, Status};
    use super::*;
    use crate::rng::stream;

    #[test]
    fn gravity_pulls_unsupported_player() {
        let g = platformer("M----F\n------\nXXXXXX\n");
        let s = g.initial_state();
        assert_eq!(s.player, Position::new(0, 0));
        let n = g.step(&s, Action::Wait, &mut stream(0)).unwrap();
        assert_eq!(n.player.row, 1);
    }

    #[test]
    fn wall_blocks_left_movement() {
        let g = platformer("-----F\nM-----\nXXXXXX\n");
        let s = g.initial_state();
        let acts = g.legal_actions(&s).unwrap();
        assert!(acts.contains(&Action::Left));
        assert_eq!(acts.len(), 6);
        let n = g.step(&s, Action::Left, &mut stream(0)).unwrap();
        assert_eq!(n.player, s.player);
    }

    #[test]
    fn jump_rises_then_falls() {
        let g = platformer(
            "----------F\n-----------\n-----------\n-----------\nM----------\nXXXXXXXXXXX\n",
        );
        let mut s = g.initial_state();
        let mut rows = vec![];
        let mut rng = stream(0);
        s = g.step(&s, Action::JumpRight, &mut rng).unwrap();
        rows.push(s.player.row);
        for _ in 0..6 {
            let a = if g.legal_actions(&s).unwrap().contains(&Action::Right) {
                Action::Right
            } else {
                Action::Wait
            };
            s = g.step(&s, a, &mut rng).unwrap();
            rows.push(s.player.row);
        }
        assert_eq!(rows, vec![3, 2, 1, 2, 3, 4, 4]);
    }

    #[test]
    fn falling_off_the_bottom_is_a_pit_death() {
        let g = platformer("M---F\n-----\nX-XXX\n");
        let mut s = g.initial_state();
        let mut rng = stream(0);
        s = g.step(&s, Action::Wait, &mut rng).unwrap();
        assert_eq!(s.player, Position::new(0, 1));
        s = g.step(&s, Action::Right, &mut rng).unwrap();
        assert_eq!(s.player, Position::new(1, 2));
        s = g.step(&s, Action::Wait, &mut rng).unwrap();
        assert_eq!(
            s.status,
            Status::Loss(FailureEvent {
                position: Position::new(1, 2),
                cause: 'p'
            })
        );
    }

    #[test]
    fn landing_in_marked_pit_dies() {
        let g = platformer("M---F\nXpXXX\n");
        let s = g.initial_state();
        let s = g.step(&s, Action::Right, &mut stream(0)).unwrap();
        assert_eq!(
            s.status,
            Status::Loss(FailureEvent {
                position: Position::new(1, 1),
                cause: 'p'
            })
        );
    }

    #[test]
    fn enemy_patrol_turns_at_walls() {
        let g = platformer("--------F\nM---Xg--X\nXXXXXXXXX\n");
        let mut s = g.initial_state();
        let mut rng = stream(0);
        let mut cols = vec![];
        for _ in 0..8 {
            s = g.step(&s, Action::Wait, &mut rng).unwrap();
            cols.push(s.entities[0].position.col);
        }
        // period 2, starts heading left into the wall
        assert_eq!(cols, vec![5, 5, 5, 6, 6, 7, 7, 7]);
    }

    #[test]
    fn walking_into_enemy_loses() {
        let g = platformer("------F\nM-g----\nXXXXXXX\n");
        let mut s = g.initial_state();
        let mut rng = stream(0);
        s = g.step(&s, Action::Right, &mut rng).unwrap();
        assert_eq!(s.status, Status::Ongoing);
        s = g.step(&s, Action::Right, &mut rng).unwrap();
        assert!(matches!(
            s.status,
            Status::Loss(FailureEvent { cause: 'g', .. })
        ));
    }

    #[test]
    fn airborne_player_keeps_drifting() {
        let g = platformer(
            "----------F\n-----------\n-----------\n-----------\nM----------\nXXXXXXXXXXX\n",
        );
        let mut rng = stream(0);
        let mut s = g
            .step(&g.initial_state(), Action::JumpRight, &mut rng)
            .unwrap();
        let mut cols = vec![s.player.col];
        while g.legal_actions(&s).unwrap() == vec![Action::Wait] {
            s = g.step(&s, Action::Wait, &mut rng).unwrap();
            cols.push(s.player.col);
        }
        assert_eq!(cols, vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(s.player.row, 4);
        assert_eq!(g.legal_actions(&s).unwrap().len(), 6);
    }
}
