//! The generator: sketch reconstruction from search records, example-driven
//! binary space partition fill, and relevance-ranked threat placement.

mod bsp;
mod generate;
mod sketch;
mod threats;

use thiserror::Error;

use crate::game::GameError;
use crate::kit::KitError;
use crate::mcts::SearchError;

pub use bsp::{
    binary_similarity, fill, match_segment, partition_sketch, FillResult, Placement, Segment,
    SegmentMatch,
};
pub use generate::{generate, repair_required_tokens, Generation};
pub use sketch::reconstruct_sketch;
pub use threats::{place_threats, rank_threats, threats_csv, ThreatCandidate};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("playthrough record visited no positions")]
    EmptyRecord,
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("segment {seg_w}x{seg_h} is larger than the {src_w}x{src_h} source")]
    SegmentLargerThanSource {
        seg_w: usize,
        seg_h: usize,
        src_w: usize,
        src_h: usize,
    },
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Kit(#[from] KitError),
}
