//! Token alphabets, the rectangular level grid and binary sketches.
//!
//! Levels are stored row-major with row 0 at the top of the screen. The text
//! format is one character per tile, one line per row, with a trailing
//! newline after the last row.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LevelError {
    #[error("unknown token {symbol:?} at column {}, row {}", .position.col, .position.row)]
    UnknownToken { symbol: char, position: Position },
    #[error("ragged rows: expected width {expected}, found {found} on row {row}")]
    RaggedRows {
        expected: usize,
        found: usize,
        row: usize,
    },
    #[error("empty level text")]
    EmptyInput,
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("alphabet has no {0} token")]
    MissingCategory(Category),
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    Empty,
    Solid,
    Threat,
    PlayerStart,
    Goal,
    Key,
    Door,
    Pit,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Category::Empty => "empty",
            Category::Solid => "solid",
            Category::Threat => "threat",
            Category::PlayerStart => "player-start",
            Category::Goal => "goal",
            Category::Key => "key",
            Category::Door => "door",
            Category::Pit => "pit",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub symbol: char,
    pub categories: BTreeSet<Category>,
}

impl Token {
    pub fn is(&self, category: Category) -> bool {
        self.categories.contains(&category)
    }
}

/// An ordered set of tokens with exactly one designated empty token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenAlphabet {
    tokens: Vec<Token>,
    empty: char,
}

impl TokenAlphabet {
    pub fn new(mut tokens: Vec<Token>) -> Result<Self, LevelError> {
        tokens.sort_by_key(|t| t.symbol);
        let mut seen = BTreeSet::new();
        for t in &tokens {
            if t.symbol.is_control() || t.symbol == '\n' {
                return Err(LevelError::InvalidAlphabet(format!(
                    "symbol {:?} is not printable",
                    t.symbol
                )));
            }
            if !seen.insert(t.symbol) {
                return Err(LevelError::InvalidAlphabet(format!(
                    "duplicate symbol {:?}",
                    t.symbol
                )));
            }
        }
        let empties: Vec<char> = tokens
            .iter()
            .filter(|t| t.is(Category::Empty))
            .map(|t| t.symbol)
            .collect();
        if empties.len() != 1 {
            return Err(LevelError::InvalidAlphabet(format!(
                "expected exactly one empty token, found {}",
                empties.len()
            )));
        }
        if let Some(t) = tokens
            .iter()
            .find(|t| t.is(Category::Empty) && t.categories.len() > 1)
        {
            return Err(LevelError::InvalidAlphabet(format!(
                "empty token {:?} carries extra categories",
                t.symbol
            )));
        }
        Ok(Self {
            tokens,
            empty: empties[0],
        })
    }

    /// Parses the JSON form: an object mapping each symbol to its category list.
    pub fn from_json(text: &str) -> Result<Self, LevelError> {
        let raw: BTreeMap<String, Vec<Category>> =
            serde_json::from_str(text).map_err(|e| LevelError::InvalidAlphabet(e.to_string()))?;
        let mut tokens = Vec::with_capacity(raw.len());
        for (key, cats) in raw {
            let mut chars = key.chars();
            let symbol = match (chars.next(), chars.next()) {
                (Some(c), None) => c,
                _ => {
                    return Err(LevelError::InvalidAlphabet(format!(
                        "symbol {key:?} must be a single character"
                    )))
                }
            };
            tokens.push(Token {
                symbol,
                categories: cats.into_iter().collect(),
            });
        }
        Self::new(tokens)
    }

    pub fn to_json(&self) -> String {
        let map: BTreeMap<String, Vec<Category>> = self
            .tokens
            .iter()
            .map(|t| (t.symbol.to_string(), t.categories.iter().copied().collect()))
            .collect();
        serde_json::to_string_pretty(&map).expect("alphabet serializes")
    }

    pub fn empty(&self) -> char {
        self.empty
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn get(&self, symbol: char) -> Option<&Token> {
        self.tokens.iter().find(|t| t.symbol == symbol)
    }

    pub fn contains(&self, symbol: char) -> bool {
        self.get(symbol).is_some()
    }

    pub fn has(&self, symbol: char, category: Category) -> bool {
        self.get(symbol).is_some_and(|t| t.is(category))
    }

    pub fn is_solid(&self, symbol: char) -> bool {
        self.has(symbol, Category::Solid)
    }

    /// All symbols carrying `category`, in alphabet order.
    pub fn with_category(&self, category: Category) -> Vec<char> {
        self.tokens
            .iter()
            .filter(|t| t.is(category))
            .map(|t| t.symbol)
            .collect()
    }

    pub fn first_with(&self, category: Category) -> Result<char, LevelError> {
        self.with_category(category)
            .first()
            .copied()
            .ok_or(LevelError::MissingCategory(category))
    }
}

/// A grid coordinate. `row` 0 is the top of the screen.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
pub struct Position {
    pub col: usize,
    pub row: usize,
}

impl Position {
    pub const fn new(col: usize, row: usize) -> Self {
        Self { col, row }
    }

    pub fn manhattan(self, other: Position) -> usize {
        self.col.abs_diff(other.col) + self.row.abs_diff(other.row)
    }

    /// Row-major ordering key.
    pub fn row_major(self) -> (usize, usize) {
        (self.row, self.col)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.col, self.row)
    }
}

#[derive(Debug, Clone)]
pub struct Level {
    width: usize,
    height: usize,
    grid: Vec<char>,
    alphabet: Arc<TokenAlphabet>,
}

impl PartialEq for Level {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height && self.grid == other.grid
    }
}

impl Eq for Level {}

impl Level {
    /// Builds a level from a row-major grid, validating every symbol.
    pub fn from_grid(
        width: usize,
        height: usize,
        grid: Vec<char>,
        alphabet: Arc<TokenAlphabet>,
    ) -> Result<Self, LevelError> {
        if width == 0 || height == 0 {
            return Err(LevelError::EmptyInput);
        }
        if grid.len() != width * height {
            return Err(LevelError::RaggedRows {
                expected: width * height,
                found: grid.len(),
                row: 0,
            });
        }
        for (i, &c) in grid.iter().enumerate() {
            if !alphabet.contains(c) {
                return Err(LevelError::UnknownToken {
                    symbol: c,
                    position: Position::new(i % width, i / width),
                });
            }
        }
        Ok(Self {
            width,
            height,
            grid,
            alphabet,
        })
    }

    /// A level filled with the alphabet's empty token.
    pub fn filled(width: usize, height: usize, alphabet: Arc<TokenAlphabet>) -> Self {
        let empty = alphabet.empty();
        Self {
            width,
            height,
            grid: vec![empty; width * height],
            alphabet,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn alphabet(&self) -> &Arc<TokenAlphabet> {
        &self.alphabet
    }

    pub fn cells(&self) -> &[char] {
        &self.grid
    }

    pub fn in_bounds(&self, p: Position) -> bool {
        p.col < self.width && p.row < self.height
    }

    pub fn get(&self, p: Position) -> char {
        self.grid[p.row * self.width + p.col]
    }

    /// Token at `(col, row)` if inside the grid.
    pub fn try_get(&self, col: isize, row: isize) -> Option<char> {
        if col < 0 || row < 0 {
            return None;
        }
        let p = Position::new(col as usize, row as usize);
        self.in_bounds(p).then(|| self.get(p))
    }

    /// Writes a symbol. Panics if the symbol is not in the alphabet.
    pub fn set(&mut self, p: Position, symbol: char) {
        assert!(
            self.alphabet.contains(symbol),
            "symbol {symbol:?} not in alphabet"
        );
        let w = self.width;
        self.grid[p.row * w + p.col] = symbol;
    }

    pub fn is_empty_at(&self, p: Position) -> bool {
        self.get(p) == self.alphabet.empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = Position> + '_ {
        (0..self.height).flat_map(move |r| (0..self.width).map(move |c| Position::new(c, r)))
    }

    /// Every cell holding `symbol`, row-major.
    pub fn find(&self, symbol: char) -> Vec<Position> {
        self.positions()
            .filter(|&p| self.get(p) == symbol)
            .collect()
    }

    pub fn count(&self, symbol: char) -> usize {
        self.grid.iter().filter(|&&c| c == symbol).count()
    }

    pub fn count_category(&self, category: Category) -> usize {
        self.grid
            .iter()
            .filter(|&&c| self.alphabet.has(c, category))
            .count()
    }

    /// Copies the `w`x`h` window at `origin` into a new row-major buffer.
    pub fn window(&self, origin: Position, w: usize, h: usize) -> Vec<char> {
        let mut out = Vec::with_capacity(w * h);
        for r in origin.row..origin.row + h {
            let start = r * self.width + origin.col;
            out.extend_from_slice(&self.grid[start..start + w]);
        }
        out
    }

    pub fn row(&self, r: usize) -> &[char] {
        &self.grid[r * self.width..(r + 1) * self.width]
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_level(self))
    }
}

/// Parses newline-separated rows into a level. A single trailing newline and
/// `\r\n` line endings are accepted.
pub fn parse_level(text: &str, alphabet: Arc<TokenAlphabet>) -> Result<Level, LevelError> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    if body.is_empty() {
        return Err(LevelError::EmptyInput);
    }
    let mut width = None;
    let mut grid = Vec::new();
    let mut height = 0;
    for (r, line) in body.split('\n').enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        let row: Vec<char> = line.chars().collect();
        let expected = *width.get_or_insert(row.len());
        if row.len() != expected || row.is_empty() {
            return Err(LevelError::RaggedRows {
                expected,
                found: row.len(),
                row: r,
            });
        }
        for (c, &symbol) in row.iter().enumerate() {
            if !alphabet.contains(symbol) {
                return Err(LevelError::UnknownToken {
                    symbol,
                    position: Position::new(c, r),
                });
            }
        }
        grid.extend(row);
        height += 1;
    }
    Ok(Level {
        width: width.unwrap_or(0),
        height,
        grid,
        alphabet,
    })
}

pub fn serialize_level(level: &Level) -> String {
    let mut out = String::with_capacity((level.width + 1) * level.height);
    for r in 0..level.height {
        out.extend(level.row(r));
        out.push('\n');
    }
    out
}

/// 0/1 grid: 0 marks empty space, 1 marks structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinarySketch {
    width: usize,
    height: usize,
    cells: Vec<u8>,
}

impl BinarySketch {
    pub fn new(width: usize, height: usize, cells: Vec<u8>) -> Result<Self, LevelError> {
        if cells.len() != width * height {
            return Err(LevelError::DimensionMismatch(width, height, cells.len(), 1));
        }
        if cells.iter().any(|&c| c > 1) {
            return Err(LevelError::InvalidAlphabet(
                "sketch cells must be 0 or 1".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            cells,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            cells: vec![value.min(1); width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn get(&self, p: Position) -> u8 {
        self.cells[p.row * self.width + p.col]
    }

    pub fn set(&mut self, p: Position, v: u8) {
        let w = self.width;
        self.cells[p.row * w + p.col] = v.min(1);
    }

    pub fn ones(&self) -> usize {
        self.cells.iter().filter(|&&c| c == 1).count()
    }

    pub fn zeros(&self) -> usize {
        self.cells.len() - self.ones()
    }

    pub fn window(&self, origin: Position, w: usize, h: usize) -> BinarySketch {
        let mut cells = Vec::with_capacity(w * h);
        for r in origin.row..origin.row + h {
            let start = r * self.width + origin.col;
            cells.extend_from_slice(&self.cells[start..start + w]);
        }
        BinarySketch {
            width: w,
            height: h,
            cells,
        }
    }

    /// Rows of `0`/`1` characters, newline-terminated.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for r in 0..self.height {
            for c in 0..self.width {
                out.push(if self.cells[r * self.width + c] == 1 {
                    '1'
                } else {
                    '0'
                });
            }
            out.push('\n');
        }
        out
    }
}

pub fn binarize(level: &Level) -> BinarySketch {
    let empty = level.alphabet.empty();
    BinarySketch {
        width: level.width,
        height: level.height,
        cells: level.grid.iter().map(|&c| u8::from(c != empty)).collect(),
    }
}

/// Replaces every cell holding one of `threats` with the empty token.
pub fn strip_threats(level: &Level, threats: &BTreeSet<char>) -> Level {
    let empty = level.alphabet.empty();
    let mut out = level.clone();
    for c in out.grid.iter_mut() {
        if threats.contains(c) {
            *c = empty;
        }
    }
    out
}

/// Marks empty bottom-row cells with the alphabet's pit token.
pub fn preprocess_pits(level: &Level) -> Result<Level, LevelError> {
    let pit = level.alphabet.first_with(Category::Pit)?;
    let empty = level.alphabet.empty();
    let mut out = level.clone();
    let bottom = level.height - 1;
    for c in 0..level.width {
        let p = Position::new(c, bottom);
        if out.get(p) == empty {
            out.set(p, pit);
        }
    }
    Ok(out)
}
