use crate::game::{Game, Rules};
use crate::kit::KnowledgeKit;
use crate::level::{strip_threats, BinarySketch, Category, Level, Position};
use crate::mcts::{collect_records, PlaythroughRecord, SearchBudget};
use crate::rng;

use super::bsp::{fill, Placement};
use super::sketch::reconstruct_sketch;
use super::threats::{place_threats, rank_threats, ThreatCandidate};
use super::PipelineError;

const PLAYTHROUGH_SALT: u64 = 0x706c_6179;
const FILL_SALT: u64 = 0x6669_6c6c;

/// Every intermediate artifact of one generation.
#[derive(Debug, Clone)]
pub struct Generation {
    pub seed: u64,
    pub t: u32,
    pub s: usize,
    pub e: f64,
    pub record: PlaythroughRecord,
    pub sketch: BinarySketch,
    pub placements: Vec<Placement>,
    /// Output of the partition fill, before threats and repair.
    pub filled: Level,
    pub ranked: Vec<ThreatCandidate>,
    pub level: Level,
}

/// Plays `source` `kit.t` times, carves a sketch from the visited positions,
/// fills it from the threat-stripped source, places threats by relevance
/// and restores missing required tokens. Deterministic in `seed`.
pub fn generate(
    source: &Level,
    rules: &Rules,
    kit: &KnowledgeKit,
    budget: &SearchBudget,
    seed: u64,
) -> Result<Generation, PipelineError> {
    kit.validate(source.alphabet())?;
    let game = Game::new(
        source,
        rules.clone(),
        kit.goals.clone(),
        kit.failures.clone(),
    )?;
    let play_seed = rng::derive_seed(seed, PLAYTHROUGH_SALT);
    let record = collect_records(&game, kit, kit.t, budget, play_seed)?;

    let sketch = reconstruct_sketch(&record, source.width(), source.height())?;
    let stripped = strip_threats(source, &kit.threats);
    let mut fill_rng = rng::substream(seed, FILL_SALT);
    let filled = fill(&sketch, &stripped, kit.s, &mut fill_rng)?;

    let ranked = rank_threats(&record);
    let threatened = place_threats(&filled.level, &ranked, kit.e);
    let level = repair_required_tokens(&threatened, source, &sketch, &kit.goals.tokens());

    Ok(Generation {
        seed,
        t: kit.t,
        s: kit.s,
        e: kit.e,
        record,
        sketch,
        placements: filled.placements,
        filled: filled.level,
        ranked,
        level,
    })
}

/// Leaves exactly one player start and makes sure every goal token sits on
/// a carved (zero) sketch cell. Copies stranded on structure cells do not
/// count: the start is moved, goal tokens get an extra copy, each on the
/// empty carved cell nearest to where the source had it.
pub fn repair_required_tokens(
    level: &Level,
    source: &Level,
    sketch: &BinarySketch,
    goal_tokens: &[char],
) -> Level {
    let mut out = level.clone();
    let alphabet = source.alphabet().clone();
    let empty = alphabet.empty();
    let carved =
        |p: Position| p.col < sketch.width() && p.row < sketch.height() && sketch.get(p) == 0;

    if let Some(start) = source
        .positions()
        .find(|&p| alphabet.has(source.get(p), Category::PlayerStart))
    {
        let starts: Vec<Position> = out
            .positions()
            .filter(|&p| alphabet.has(out.get(p), Category::PlayerStart))
            .collect();
        let keep = starts
            .iter()
            .copied()
            .filter(|&p| carved(p))
            .min_by_key(|p| (p.manhattan(start), p.row_major()));
        for &p in &starts {
            if Some(p) != keep {
                out.set(p, empty);
            }
        }
        if keep.is_none() {
            if let Some(p) = nearest_empty(&out, start, &carved) {
                out.set(p, source.get(start));
            }
        }
    }

    let mut seen = Vec::new();
    for &t in goal_tokens {
        if seen.contains(&t) {
            continue;
        }
        seen.push(t);
        if out.find(t).into_iter().any(&carved) {
            continue;
        }
        if let Some(&origin) = source.find(t).first() {
            if let Some(p) = nearest_empty(&out, origin, &carved) {
                out.set(p, t);
            }
        }
    }
    out
}

/// Nearest empty carved cell, or nearest empty cell if none is carved.
fn nearest_empty(
    level: &Level,
    target: Position,
    carved: &impl Fn(Position) -> bool,
) -> Option<Position> {
    let key = |p: &Position| (p.manhattan(target), p.row_major());
    level
        .positions()
        .filter(|&p| level.is_empty_at(p) && carved(p))
        .min_by_key(key)
        .or_else(|| {
            level
                .positions()
                .filter(|&p| level.is_empty_at(p))
                .min_by_key(key)
        })
}
