//! Population metrics: playability, plagiarism against the source and
//! pairwise self-similarity.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::DomainKind;
use crate::level::{Category, Level, Position};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("self-similarity needs at least two levels, got {0}")]
    PopulationTooSmall(usize),
    #[error("empty population")]
    EmptyPopulation,
    #[error("no non-solid cell in the start column")]
    NoStartPosition,
    #[error("no source levels")]
    NoSources,
}

/// Column the platformer reachability check starts from.
pub const PLATFORMER_START_COLUMN: usize = 2;
/// Rise of a platformer jump, mirrored from the default rules.
pub const PLATFORMER_JUMP_HEIGHT: u32 = 3;

/// Exactly one player, at least one door and one key, and a flood fill over
/// non-solid cells from the player reaching both a key and a door. Enemies
/// do not block the fill.
pub fn playability_dungeon(level: &Level) -> bool {
    let a = level.alphabet();
    let starts: Vec<Position> = level
        .positions()
        .filter(|&p| a.has(level.get(p), Category::PlayerStart))
        .collect();
    if starts.len() != 1
        || level.count_category(Category::Door) == 0
        || level.count_category(Category::Key) == 0
    {
        return false;
    }
    let reach = flood_fill(level, starts[0]);
    let mut key = false;
    let mut door = false;
    for p in reach {
        let t = level.get(p);
        key |= a.has(t, Category::Key);
        door |= a.has(t, Category::Door);
    }
    key && door
}

fn flood_fill(level: &Level, from: Position) -> Vec<Position> {
    let a = level.alphabet();
    let mut seen = vec![false; level.width() * level.height()];
    let idx = |p: Position| p.row * level.width() + p.col;
    let mut out = Vec::new();
    let mut queue = VecDeque::from([from]);
    seen[idx(from)] = true;
    while let Some(p) = queue.pop_front() {
        out.push(p);
        for (dc, dr) in [(0, -1), (0, 1), (-1, 0), (1, 0)] {
            let (c, r) = (p.col as isize + dc, p.row as isize + dr);
            let Some(t) = level.try_get(c, r) else {
                continue;
            };
            let q = Position::new(c as usize, r as usize);
            if !seen[idx(q)] && !a.is_solid(t) {
                seen[idx(q)] = true;
                queue.push_back(q);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Body {
    col: usize,
    row: usize,
    ascent: u32,
    drift: i8,
}

/// Best-first search over player position and jump phase under the
/// side-view movement model, ignoring enemies. Starts at the first
/// non-solid cell from the top of column 2 and succeeds on reaching any
/// column holding a goal token. Landing on a pit or leaving the bottom of
/// the screen is a dead end.
pub fn playability_platformer(level: &Level) -> Result<bool, MetricsError> {
    let start = platformer_start(level)?;
    let a = level.alphabet();
    let mut goal_cols: Vec<usize> = level
        .positions()
        .filter(|&p| a.has(level.get(p), Category::Goal))
        .map(|p| p.col)
        .collect();
    goal_cols.sort_unstable();
    goal_cols.dedup();
    if goal_cols.is_empty() {
        return Ok(false);
    }
    let h = |b: &Body| {
        goal_cols
            .iter()
            .map(|&c| c.abs_diff(b.col))
            .min()
            .expect("non-empty")
    };

    let first = Body {
        col: start.col,
        row: start.row,
        ascent: 0,
        drift: 0,
    };
    if is_pit(level, start) {
        return Ok(false);
    }
    let mut seen = HashSet::from([first]);
    let mut open = BinaryHeap::from([Reverse((h(&first), 0usize, first))]);
    let mut order = 1usize;
    while let Some(Reverse((dist, _, b))) = open.pop() {
        if dist == 0 {
            return Ok(true);
        }
        for next in successors(level, b) {
            if seen.insert(next) {
                open.push(Reverse((h(&next), order, next)));
                order += 1;
            }
        }
    }
    Ok(false)
}

fn platformer_start(level: &Level) -> Result<Position, MetricsError> {
    if level.width() <= PLATFORMER_START_COLUMN {
        return Err(MetricsError::NoStartPosition);
    }
    let a = level.alphabet();
    (0..level.height())
        .map(|r| Position::new(PLATFORMER_START_COLUMN, r))
        .find(|&p| !a.is_solid(level.get(p)))
        .ok_or(MetricsError::NoStartPosition)
}

fn solid(level: &Level, col: isize, row: isize) -> bool {
    level
        .try_get(col, row)
        .is_some_and(|t| level.alphabet().is_solid(t))
}

fn is_pit(level: &Level, p: Position) -> bool {
    level.alphabet().has(level.get(p), Category::Pit)
}

fn successors(level: &Level, b: Body) -> Vec<Body> {
    let (col, row) = (b.col as isize, b.row as isize);
    let grounded = solid(level, col, row + 1) && b.ascent == 0;
    let choices: &[(i8, bool)] = if grounded {
        &[
            (-1, false),
            (1, false),
            (0, false),
            (0, true),
            (-1, true),
            (1, true),
        ]
    } else {
        &[(b.drift, false)]
    };
    let mut out = Vec::with_capacity(choices.len());
    for &(drift, jump) in choices {
        let mut ascent = if jump {
            PLATFORMER_JUMP_HEIGHT
        } else {
            b.ascent
        };
        let mut c = col;
        let mut r = row;
        let dx = drift as isize;
        if c + dx >= 0 && (c + dx) < level.width() as isize && !solid(level, c + dx, r) {
            c += dx;
        }
        if ascent > 0 {
            if r > 0 && !solid(level, c, r - 1) {
                r -= 1;
                ascent -= 1;
            } else {
                ascent = 0;
            }
        } else if !solid(level, c, r + 1) {
            r += 1;
        }
        if r >= level.height() as isize {
            continue;
        }
        let p = Position::new(c as usize, r as usize);
        if is_pit(level, p) {
            continue;
        }
        out.push(Body {
            col: p.col,
            row: p.row,
            ascent,
            drift,
        });
    }
    out
}

/// Percentage of cells holding the same token in both levels.
pub fn plagiarism(generated: &Level, source: &Level) -> Result<f64, MetricsError> {
    if generated.width() != source.width() || generated.height() != source.height() {
        return Err(MetricsError::DimensionMismatch(
            generated.width(),
            generated.height(),
            source.width(),
            source.height(),
        ));
    }
    let same = generated
        .cells()
        .iter()
        .zip(source.cells())
        .filter(|(a, b)| a == b)
        .count();
    Ok(100.0 * same as f64 / generated.cells().len() as f64)
}

/// Highest plagiarism against any source with matching dimensions.
pub fn plagiarism_max(generated: &Level, sources: &[Level]) -> Result<f64, MetricsError> {
    let mut best: Option<f64> = None;
    let mut last_err = MetricsError::NoSources;
    for s in sources {
        match plagiarism(generated, s) {
            Ok(v) => best = Some(best.map_or(v, |b: f64| b.max(v))),
            Err(e) => last_err = e,
        }
    }
    best.ok_or(last_err)
}

/// Mean plagiarism over all unordered pairs.
pub fn self_similarity(population: &[Level]) -> Result<f64, MetricsError> {
    let n = population.len();
    if n < 2 {
        return Err(MetricsError::PopulationTooSmall(n));
    }
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            sum += plagiarism(&population[i], &population[j])?;
            pairs += 1;
        }
    }
    Ok(sum / pairs as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub playable: f64,
    pub plagiarism_mean: f64,
    pub plagiarism_std: f64,
    /// `None` for a single-level population.
    pub selfsim_mean: Option<f64>,
    pub selfsim_std: Option<f64>,
    pub n: usize,
}

pub const CSV_HEADER: &str = "playable,plagiarism_mean,plagiarism_std,selfsim_mean,selfsim_std,n";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.4}"))
}

impl MetricsReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{:.4},{:.4},{:.4},{},{},{}",
            self.playable,
            self.plagiarism_mean,
            self.plagiarism_std,
            opt(self.selfsim_mean),
            opt(self.selfsim_std),
            self.n
        )
    }

    pub fn to_csv(&self) -> String {
        format!("{CSV_HEADER}\n{}\n", self.csv_row())
    }

    /// Rows of a human-readable table; `label` heads the first column.
    pub fn table(rows: &[(String, MetricsReport)]) -> String {
        let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max(6);
        let mut s = format!(
            "{:<width$}  {:>8}  {:>17}  {:>17}  {:>4}\n",
            "method", "playable", "plagiarism", "self-sim", "n"
        );
        for (label, r) in rows {
            let selfsim = match (r.selfsim_mean, r.selfsim_std) {
                (Some(m), Some(sd)) => format!("{m:.2} ± {sd:.2}"),
                _ => "n/a".to_string(),
            };
            s.push_str(&format!(
                "{:<width$}  {:>7.1}%  {:>17}  {:>17}  {:>4}\n",
                label,
                100.0 * r.playable,
                format!("{:.2} ± {:.2}", r.plagiarism_mean, r.plagiarism_std),
                selfsim,
                r.n
            ));
        }
        s
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&MetricsReport::table(&[("levels".into(), self.clone())]))
    }
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn is_playable(level: &Level, kind: DomainKind) -> Result<bool, MetricsError> {
    match kind {
        DomainKind::Dungeon => Ok(playability_dungeon(level)),
        DomainKind::Platformer => match playability_platformer(level) {
            Err(MetricsError::NoStartPosition) => Ok(false),
            other => other,
        },
    }
}

/// Report for `levels` against `sources`. With several sources a level's
/// plagiarism is its highest match. Platformer levels without a start
/// position count as unplayable.
pub fn evaluate_population(
    levels: &[Level],
    sources: &[Level],
    kind: DomainKind,
) -> Result<MetricsReport, MetricsError> {
    if levels.is_empty() {
        return Err(MetricsError::EmptyPopulation);
    }
    let mut playable = 0usize;
    let mut plag = Vec::with_capacity(levels.len());
    for l in levels {
        if is_playable(l, kind)? {
            playable += 1;
        }
        plag.push(plagiarism_max(l, sources)?);
    }
    let (plagiarism_mean, plagiarism_std) = mean_std(&plag);

    let (selfsim_mean, selfsim_std) = if levels.len() < 2 {
        (None, None)
    } else {
        let mut pairs = Vec::new();
        for i in 0..levels.len() {
            for j in i + 1..levels.len() {
                pairs.push(plagiarism(&levels[i], &levels[j])?);
            }
        }
        let (m, sd) = mean_std(&pairs);
        (Some(m), Some(sd))
    };

    Ok(MetricsReport {
        playable: playable as f64 / levels.len() as f64,
        plagiarism_mean,
        plagiarism_std,
        selfsim_mean,
        selfsim_std,
        n: levels.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::test_support::{dungeon_alphabet, platformer_alphabet};
    use crate::level::parse_level;
    use proptest::prelude::*;

    fn dungeon(text: &str) -> Level {
        parse_level(text, dungeon_alphabet()).unwrap()
    }

    fn platformer(text: &str) -> Level {
        parse_level(text, platformer_alphabet()).unwrap()
    }

    const LEVEL1: &str = include_str!("../data/dungeon/level1.lvl");

    #[test]
    fn dungeon_examples() {
        assert!(playability_dungeon(&dungeon(LEVEL1)));
        let two = LEVEL1.replacen("w.2.", "wA2.", 1);
        assert!(!playability_dungeon(&dungeon(&two)));
        let sealed = dungeon("wwwww\nwA..w\nw...w\nwwwww\nw+w.g\n");
        assert!(!playability_dungeon(&sealed));
        let open = dungeon("wwwww\nwA..w\nw...w\nw.w.w\nw+w.g\n");
        assert!(playability_dungeon(&open));
    }

    #[test]
    fn enemies_do_not_block_the_fill() {
        assert!(playability_dungeon(&dungeon("A1+2g\n")));
        assert!(!playability_dungeon(&dungeon("A1+wg\n")));
    }

    #[test]
    fn platformer_examples() {
        let flat = platformer("------F\n-------\nXXXXXXX\n");
        assert!(playability_platformer(&flat).unwrap());
        let blocked = platformer("-X----F\n-X-----\nXXXXXXX\n");
        // column 2 start is to the right of the wall
        assert!(playability_platformer(&blocked).unwrap());
        let wall = platformer("---X--F\n---X---\n---X---\n---X---\n---X---\nXXXXXXX\n");
        assert!(!playability_platformer(&wall).unwrap());
        let solid = platformer("--X--F\n--X---\nXXXXXX\n");
        assert_eq!(
            playability_platformer(&solid),
            Err(MetricsError::NoStartPosition)
        );
    }

    #[test]
    fn a_twenty_wide_pit_is_uncrossable() {
        // a jump covers 6 columns before dropping back to its launch row
        let mut rows = vec!["-".repeat(30); 14];
        rows[0].replace_range(29..30, "F");
        let ground = format!("{}{}{}", "X".repeat(5), "-".repeat(20), "X".repeat(5));
        rows.push(ground.clone());
        rows.push(ground);
        let text = rows.join("\n");
        let level = crate::level::preprocess_pits(&platformer(&text)).unwrap();
        assert!(!playability_platformer(&level).unwrap());
        let mut gap5 = rows.clone();
        let g = format!("{}{}{}", "X".repeat(5), "-".repeat(5), "X".repeat(20));
        gap5[14] = g.clone();
        gap5[15] = g;
        let level = crate::level::preprocess_pits(&platformer(&gap5.join("\n"))).unwrap();
        assert!(playability_platformer(&level).unwrap());
    }

    #[test]
    fn jump_reaches_three_high_ledge_only() {
        let three = platformer("------F\n----XXX\n----X--\n----X--\nXXXXXXX\n");
        assert!(playability_platformer(&three).unwrap());
        let four = platformer("------F\n----XXX\n----X--\n----X--\n----X--\nXXXXXXX\n");
        assert!(!playability_platformer(&four).unwrap());
    }

    #[test]
    fn plagiarism_examples() {
        let a = dungeon(LEVEL1);
        assert_eq!(plagiarism(&a, &a).unwrap(), 100.0);
        let mut b = a.clone();
        for p in a.positions().take(27).collect::<Vec<_>>() {
            b.set(p, if a.get(p) == '.' { 'w' } else { '.' });
        }
        let expected = 100.0 * (117.0 - 27.0) / 117.0;
        assert!((plagiarism(&a, &b).unwrap() - expected).abs() < 1e-9);
        assert!((expected - 76.92).abs() < 0.01);
        let x = dungeon("..\n..\n");
        let y = dungeon("ww\nww\n");
        assert_eq!(plagiarism(&x, &y).unwrap(), 0.0);
        assert!(matches!(
            plagiarism(&x, &dungeon("...\n")),
            Err(MetricsError::DimensionMismatch(..))
        ));
    }

    #[test]
    fn self_similarity_examples() {
        let a = dungeon("..\n..\n");
        let b = dungeon("..\nww\n");
        let c = dungeon("ww\nww\n");
        assert_eq!(
            self_similarity(&[a.clone(), a.clone(), a.clone()]).unwrap(),
            100.0
        );
        assert_eq!(self_similarity(&[a.clone(), c.clone()]).unwrap(), 0.0);
        // pairs: (a,a)=100, (a,b)=50, (a,b)=50
        let v = self_similarity(&[a.clone(), a.clone(), b]).unwrap();
        assert!((v - 200.0 / 3.0).abs() < 1e-9);
        assert_eq!(
            self_similarity(&[a]),
            Err(MetricsError::PopulationTooSmall(1))
        );
    }

    #[test]
    fn report_examples() {
        let src = dungeon(LEVEL1);
        let r = evaluate_population(
            std::slice::from_ref(&src),
            std::slice::from_ref(&src),
            DomainKind::Dungeon,
        )
        .unwrap();
        assert_eq!(r.playable, 1.0);
        assert_eq!(r.plagiarism_mean, 100.0);
        assert_eq!(r.plagiarism_std, 0.0);
        assert_eq!(r.selfsim_mean, None);
        assert_eq!(r.n, 1);

        let broken = dungeon(&LEVEL1.replace('+', "."));
        let r = evaluate_population(&[src.clone(), broken], &[src], DomainKind::Dungeon).unwrap();
        assert_eq!(r.playable, 0.5);
        assert!(r.selfsim_mean.is_some());
        assert_eq!(r.to_csv().lines().next().unwrap(), CSV_HEADER);
    }

    #[test]
    fn sample_standard_deviation() {
        let (m, sd) = mean_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(m, 5.0);
        // sum of squared deviations is 32
        assert!((sd - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
    }

    #[test]
    fn multi_source_plagiarism_takes_the_best_match() {
        let a = dungeon("..\n..\n");
        let b = dungeon("..\nww\n");
        let c = dungeon("ww\nww\n");
        assert_eq!(plagiarism_max(&a, &[c.clone(), b.clone()]).unwrap(), 50.0);
        assert_eq!(plagiarism_max(&a, &[dungeon("...\n"), c]).unwrap(), 0.0);
        assert!(plagiarism_max(&a, &[]).is_err());
    }

    fn arb_pair() -> impl Strategy<Value = (Level, Level)> {
        (1usize..8, 1usize..8).prop_flat_map(|(w, h)| {
            let cells =
                prop::collection::vec(prop::sample::select(vec!['.', 'w', '+', 'g']), w * h);
            (cells.clone(), cells).prop_map(move |(a, b)| {
                let to = |c: Vec<char>| Level::from_grid(w, h, c, dungeon_alphabet()).unwrap();
                (to(a), to(b))
            })
        })
    }

    // reachability by repeated sweeps until nothing changes
    fn sweep_oracle(cells: &[char], w: usize, h: usize) -> bool {
        let starts: Vec<usize> = (0..cells.len()).filter(|&i| cells[i] == 'A').collect();
        if starts.len() != 1 || !cells.contains(&'+') || !cells.contains(&'g') {
            return false;
        }
        let mut mark = vec![false; cells.len()];
        mark[starts[0]] = true;
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..cells.len() {
                if mark[i] || cells[i] == 'w' {
                    continue;
                }
                let (c, r) = (i % w, i / w);
                let near = (c > 0 && mark[i - 1])
                    || (c + 1 < w && mark[i + 1])
                    || (r > 0 && mark[i - w])
                    || (r + 1 < h && mark[i + w]);
                if near {
                    mark[i] = true;
                    changed = true;
                }
            }
        }
        let hit = |t| (0..cells.len()).any(|i| mark[i] && cells[i] == t);
        hit('+') && hit('g')
    }

    #[test]
    fn dungeon_check_matches_exhaustive_oracle() {
        let tiles = ['.', 'w', '+', 'g'];
        for (w, h) in [(3, 2), (2, 3), (6, 1), (1, 5)] {
            let n = w * h;
            for a in 0..n {
                for code in 0..tiles.len().pow(n as u32 - 1) {
                    let mut k = code;
                    let cells: Vec<char> = (0..n)
                        .map(|i| {
                            if i == a {
                                return 'A';
                            }
                            let t = tiles[k % 4];
                            k /= 4;
                            t
                        })
                        .collect();
                    let level = Level::from_grid(w, h, cells.clone(), dungeon_alphabet()).unwrap();
                    assert_eq!(
                        playability_dungeon(&level),
                        sweep_oracle(&cells, w, h),
                        "{cells:?}"
                    );
                }
            }
        }
    }

    // breadth-first search over the game's own step function
    fn game_oracle(level: &Level) -> bool {
        use crate::game::{
            Action, FailurePredicate, FailureSpec, Game, GoalPredicate, GoalSpec, Rules, Status,
        };
        use crate::rng::stream;
        let Ok(start) = platformer_start(level) else {
            return false;
        };
        if level.get(start) == 'p' {
            return false;
        }
        let mut terrain = level.clone();
        terrain.set(start, 'M');
        let game = Game::new(
            &terrain,
            Rules::Platformer(Default::default()),
            GoalSpec(vec![GoalPredicate::ReachColumn('F')]),
            FailureSpec(vec![
                FailurePredicate::ThreatContact,
                FailurePredicate::BelowScreen('p'),
            ]),
        )
        .unwrap();
        let first = game.state_at(start);
        let key = |s: &crate::game::GameState| (s.player, s.ascent, s.drift);
        let mut seen = HashSet::from([key(&first)]);
        let mut queue = VecDeque::from([first]);
        let mut rng = stream(0);
        while let Some(s) = queue.pop_front() {
            match s.status {
                Status::Win => return true,
                Status::Loss(_) => continue,
                Status::Ongoing => {}
            }
            let actions: Vec<Action> = game.legal_actions(&s).unwrap();
            for a in actions {
                let n = game.step(&s, a, &mut rng).unwrap();
                if seen.insert(key(&n)) {
                    queue.push_back(n);
                }
            }
        }
        false
    }

    fn arb_side_view() -> impl Strategy<Value = Level> {
        (4usize..=20, 3usize..=7).prop_flat_map(|(w, h)| {
            let body = prop::collection::vec(
                prop::sample::select(vec!['-', '-', '-', 'X', 'p']),
                w * (h - 1),
            );
            let ground = prop::collection::vec(prop::sample::select(vec!['X', 'X', '-']), w);
            (body, ground, 3..w).prop_map(move |(mut cells, ground, f)| {
                cells.extend(ground);
                cells[f] = 'F';
                Level::from_grid(w, h, cells, platformer_alphabet()).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn plagiarism_is_symmetric((a, b) in arb_pair()) {
            prop_assert_eq!(plagiarism(&a, &b).unwrap(), plagiarism(&b, &a).unwrap());
            prop_assert_eq!(plagiarism(&a, &a).unwrap(), 100.0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]
        #[test]
        fn platformer_check_matches_game_search(level in arb_side_view()) {
            prop_assert_eq!(playability_platformer(&level).unwrap_or(false), game_oracle(&level));
        }
    }
}
