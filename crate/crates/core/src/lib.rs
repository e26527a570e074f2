//! Tree-based reconstructive partitioning: a level generator that plays a
//! source level with Monte Carlo tree search, carves a binary sketch from
//! where the search went, fills it with best-matching pieces of the source
//! and puts threats back where the search died most.
//!
//! Also here: two tile-grid game domains (a top-down dungeon and a
//! side-view platformer), a Markov chain baseline and population metrics.

pub mod domain;
pub mod game;
pub mod kit;
pub mod level;
pub mod markov;
pub mod mcts;
pub mod metrics;
pub mod pipeline;
pub mod rng;

pub use domain::{Domain, DomainError, DomainKind};
pub use game::{
    Action, FailureEvent, FailurePredicate, FailureSpec, Game, GameError, GameState, GoalPredicate,
    GoalSpec, Rules, Status,
};
pub use kit::{KitError, KnowledgeKit, ParamRanges};
pub use level::{
    binarize, parse_level, serialize_level, BinarySketch, Category, Level, LevelError, Position,
    Token, TokenAlphabet,
};
pub use markov::{mc_generate, train, MarkovError, MarkovModel};
pub use mcts::{run_playthrough, PlaythroughRecord, SearchBudget, SearchError};
pub use metrics::{evaluate_population, MetricsError, MetricsReport};
pub use pipeline::{generate, Generation, PipelineError};
