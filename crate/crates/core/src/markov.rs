//! Markov-chain baseline with an L-shaped 2x2 context: the top-right tile of
//! every 2x2 window is predicted from its bottom-left, bottom-right and
//! top-left neighbours.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::level::{Level, Position, TokenAlphabet};
use crate::rng::{self, RandomStream};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarkovError {
    #[error("no training levels")]
    EmptyTrainingSet,
    #[error("training levels use different alphabets")]
    MixedAlphabets,
    #[error("levels must be at least 2x2, got {0}x{1}")]
    TooSmall(usize, usize),
}

/// `(bottom-left, bottom-right, top-left)`.
pub type Context = [char; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovModel {
    alphabet: Arc<TokenAlphabet>,
    table: BTreeMap<Context, Vec<(char, f64)>>,
    columns: BTreeSet<Vec<char>>,
    bottom_rows: BTreeSet<Vec<char>>,
}

pub fn train(levels: &[Level]) -> Result<MarkovModel, MarkovError> {
    let first = levels.first().ok_or(MarkovError::EmptyTrainingSet)?;
    let alphabet = first.alphabet().clone();
    let mut counts: BTreeMap<Context, BTreeMap<char, usize>> = BTreeMap::new();
    let mut columns = BTreeSet::new();
    let mut bottom_rows = BTreeSet::new();
    for level in levels {
        if **level.alphabet() != *alphabet {
            return Err(MarkovError::MixedAlphabets);
        }
        if level.width() < 2 || level.height() < 2 {
            return Err(MarkovError::TooSmall(level.width(), level.height()));
        }
        for r in 0..level.height() - 1 {
            for c in 1..level.width() {
                let ctx = [
                    level.get(Position::new(c - 1, r + 1)),
                    level.get(Position::new(c, r + 1)),
                    level.get(Position::new(c - 1, r)),
                ];
                *counts
                    .entry(ctx)
                    .or_default()
                    .entry(level.get(Position::new(c, r)))
                    .or_default() += 1;
            }
        }
        for c in 0..level.width() {
            columns.insert(
                (0..level.height())
                    .map(|r| level.get(Position::new(c, r)))
                    .collect(),
            );
        }
        bottom_rows.insert(level.row(level.height() - 1).to_vec());
    }
    let table = counts
        .into_iter()
        .map(|(ctx, next)| {
            let total: usize = next.values().sum();
            let dist = next
                .into_iter()
                .map(|(t, n)| (t, n as f64 / total as f64))
                .collect();
            (ctx, dist)
        })
        .collect();
    Ok(MarkovModel {
        alphabet,
        table,
        columns,
        bottom_rows,
    })
}

impl MarkovModel {
    pub fn distribution(&self, ctx: &Context) -> Option<&[(char, f64)]> {
        self.table.get(ctx).map(Vec::as_slice)
    }

    pub fn contexts(&self) -> impl Iterator<Item = &Context> {
        self.table.keys()
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Entry {
            context: String,
            next: BTreeMap<String, f64>,
        }
        let entries: Vec<Entry> = self
            .table
            .iter()
            .map(|(ctx, dist)| Entry {
                context: ctx.iter().collect(),
                next: dist.iter().map(|(t, p)| (t.to_string(), *p)).collect(),
            })
            .collect();
        serde_json::to_string_pretty(&entries).expect("model serializes")
    }

    fn sample(&self, ctx: &Context, rng: &mut RandomStream) -> char {
        let Some(dist) = self.table.get(ctx) else {
            return self.alphabet.empty();
        };
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for &(t, p) in dist {
            acc += p;
            if u < acc {
                return t;
            }
        }
        dist.last().expect("distributions are non-empty").0
    }
}

/// Seeds the left column and bottom row from training data, then fills
/// columns left to right, each bottom to top. Unseen contexts emit the
/// empty token.
pub fn mc_generate(
    model: &MarkovModel,
    width: usize,
    height: usize,
    rng: &mut RandomStream,
) -> Result<Level, MarkovError> {
    if width < 2 || height < 2 {
        return Err(MarkovError::TooSmall(width, height));
    }
    let mut level = Level::filled(width, height, model.alphabet.clone());
    let empty = model.alphabet.empty();

    let columns: Vec<&Vec<char>> = model.columns.iter().collect();
    let col = columns[rng::index(rng, columns.len())];
    for r in 0..height {
        // bottom-aligned when heights differ
        let src = (col.len() as isize - height as isize) + r as isize;
        let t = if src >= 0 { col[src as usize] } else { empty };
        level.set(Position::new(0, r), t);
    }
    let rows: Vec<&Vec<char>> = model.bottom_rows.iter().collect();
    let row = rows[rng::index(rng, rows.len())];
    let offset = rng::index(rng, row.len());
    for c in 1..width {
        level.set(Position::new(c, height - 1), row[(offset + c) % row.len()]);
    }

    for c in 1..width {
        for r in (0..height - 1).rev() {
            let ctx = [
                level.get(Position::new(c - 1, r + 1)),
                level.get(Position::new(c, r + 1)),
                level.get(Position::new(c - 1, r)),
            ];
            let t = model.sample(&ctx, rng);
            level.set(Position::new(c, r), t);
        }
    }
    Ok(level)
}
