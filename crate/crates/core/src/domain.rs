//! Domain definitions: alphabet, rules, knowledge kit, parameter ranges and
//! search budget, loaded from JSON.
//!
//! ```json
//! {
//!   "name": "dungeon",
//!   "alphabet": "alphabet.json",
//!   "rules": { "kind": "dungeon", "periods": { "1": 1, "2": 2, "3": 3 } },
//!   "kit": { "goals": [{ "hold": "+" }, { "reach": "g" }], ... },
//!   "ranges": { "t": [1, 2, 3], "s": [1, 2, 3, 4, 5], "e": [0, 0.25] },
//!   "budget": { "iterations_per_move": 200, "max_moves": 500 }
//! }
//! ```
//!
//! `alphabet` is either a path relative to the domain file or an inline
//! symbol-to-categories object.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{Game, GameError, Rules};
use crate::kit::{KitError, KnowledgeKit, ParamRanges};
use crate::level::{parse_level, preprocess_pits, Level, LevelError, TokenAlphabet};
use crate::mcts::SearchBudget;

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("domain definition: {0}")]
    Parse(String),
    #[error("unknown built-in domain {0:?}")]
    UnknownBuiltin(String),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Level(#[from] LevelError),
    #[error(transparent)]
    Kit(#[from] KitError),
    #[error(transparent)]
    Game(#[from] GameError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Dungeon,
    Platformer,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AlphabetRef {
    Path(String),
    Inline(serde_json::Value),
}

#[derive(Deserialize)]
struct RawDomain {
    name: String,
    alphabet: AlphabetRef,
    rules: Rules,
    kit: KnowledgeKit,
    ranges: ParamRanges,
    budget: SearchBudget,
    #[serde(default)]
    population: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Domain {
    pub name: String,
    pub alphabet: Arc<TokenAlphabet>,
    pub rules: Rules,
    pub kit: KnowledgeKit,
    pub ranges: ParamRanges,
    pub budget: SearchBudget,
    /// Default population size for batch runs.
    pub population: usize,
}

const DUNGEON_DOMAIN: &str = include_str!("../data/dungeon/domain.json");
const DUNGEON_ALPHABET: &str = include_str!("../data/dungeon/alphabet.json");
const PLATFORMER_DOMAIN: &str = include_str!("../data/platformer/domain.json");
const PLATFORMER_ALPHABET: &str = include_str!("../data/platformer/alphabet.json");

/// Bundled fixture levels, by `domain/name`.
pub fn builtin_level_text(name: &str) -> Option<&'static str> {
    match name {
        "dungeon/level1" => Some(include_str!("../data/dungeon/level1.lvl")),
        "dungeon/level2" => Some(include_str!("../data/dungeon/level2.lvl")),
        "platformer/level1" => Some(include_str!("../data/platformer/level1.lvl")),
        _ => None,
    }
}

impl Domain {
    pub fn builtin(name: &str) -> Result<Self, DomainError> {
        let (domain, alphabet) = match name {
            "dungeon" => (DUNGEON_DOMAIN, DUNGEON_ALPHABET),
            "platformer" => (PLATFORMER_DOMAIN, PLATFORMER_ALPHABET),
            other => return Err(DomainError::UnknownBuiltin(other.to_string())),
        };
        Self::from_json(domain, |_| Ok(alphabet.to_string()))
    }

    pub fn dungeon() -> Self {
        Self::builtin("dungeon").expect("bundled dungeon domain is valid")
    }

    pub fn platformer() -> Self {
        Self::builtin("platformer").expect("bundled platformer domain is valid")
    }

    /// Loads a domain file, resolving an alphabet path relative to it.
    pub fn load(path: &Path) -> Result<Self, DomainError> {
        let text = read(path)?;
        let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Self::from_json(&text, |rel| read(&dir.join(rel)))
    }

    /// Parses a domain definition; `resolve` maps an alphabet path to its text.
    pub fn from_json(
        text: &str,
        resolve: impl Fn(&str) -> Result<String, DomainError>,
    ) -> Result<Self, DomainError> {
        let raw: RawDomain =
            serde_json::from_str(text).map_err(|e| DomainError::Parse(e.to_string()))?;
        let alphabet = match raw.alphabet {
            AlphabetRef::Path(p) => TokenAlphabet::from_json(&resolve(&p)?)?,
            AlphabetRef::Inline(v) => TokenAlphabet::from_json(&v.to_string())?,
        };
        raw.kit.validate(&alphabet)?;
        raw.ranges.validate()?;
        raw.budget
            .validate()
            .map_err(|e| DomainError::Parse(e.to_string()))?;
        let population = match raw.rules {
            Rules::Dungeon(_) => raw.population.unwrap_or(50),
            Rules::Platformer(_) => raw.population.unwrap_or(100),
        };
        Ok(Self {
            name: raw.name,
            alphabet: Arc::new(alphabet),
            rules: raw.rules,
            kit: raw.kit,
            ranges: raw.ranges,
            budget: raw.budget,
            population,
        })
    }

    pub fn kind(&self) -> DomainKind {
        match self.rules {
            Rules::Dungeon(_) => DomainKind::Dungeon,
            Rules::Platformer(_) => DomainKind::Platformer,
        }
    }

    /// Parses level text with this domain's alphabet and applies domain
    /// preprocessing (pit marking for side-view levels).
    pub fn parse_level(&self, text: &str) -> Result<Level, DomainError> {
        let level = parse_level(text, self.alphabet.clone())?;
        self.prepare(&level)
    }

    pub fn load_level(&self, path: &Path) -> Result<Level, DomainError> {
        self.parse_level(&read(path)?)
    }

    pub fn builtin_level(&self, name: &str) -> Result<Level, DomainError> {
        let key = format!("{}/{}", self.name, name);
        let text = builtin_level_text(&key).ok_or(DomainError::UnknownBuiltin(key))?;
        self.parse_level(text)
    }

    pub fn prepare(&self, level: &Level) -> Result<Level, DomainError> {
        if self.rules.is_side_view() {
            Ok(preprocess_pits(level)?)
        } else {
            Ok(level.clone())
        }
    }

    pub fn game(&self, level: &Level) -> Result<Game, GameError> {
        self.game_with(level, &self.kit)
    }

    pub fn game_with(&self, level: &Level, kit: &KnowledgeKit) -> Result<Game, GameError> {
        Game::new(
            level,
            self.rules.clone(),
            kit.goals.clone(),
            kit.failures.clone(),
        )
    }
}

fn read(path: &Path) -> Result<String, DomainError> {
    std::fs::read_to_string(path).map_err(|source| DomainError::Io {
        path: path.display().to_string(),
        source,
    })
}
