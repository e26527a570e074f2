//! The designer-authored knowledge kit: goals, failures, threat tokens and
//! the numeric dials for search and generation.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{FailureSpec, GoalSpec};
use crate::level::{Category, TokenAlphabet};
use crate::rng::{self, RandomStream};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KitError {
    #[error("invalid knowledge kit: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeKit {
    pub goals: GoalSpec,
    pub failures: FailureSpec,
    pub threats: BTreeSet<char>,
    /// UCT exploration constant.
    pub c: f64,
    /// Rollout depth cap; `None` runs rollouts to a terminal state.
    #[serde(default)]
    pub rollout_depth: Option<u32>,
    /// Playthroughs per generation.
    pub t: u32,
    /// Maximum segment side length.
    pub s: usize,
    /// Threat density dial in [0, 1].
    pub e: f64,
}

impl KnowledgeKit {
    pub fn validate(&self, alphabet: &TokenAlphabet) -> Result<(), KitError> {
        let bad = |m: String| Err(KitError::Invalid(m));
        if self.goals.is_empty() {
            return bad("goal sequence is empty".into());
        }
        if !(self.c >= 0.0 && self.c.is_finite()) {
            return bad(format!(
                "c = {} must be a finite non-negative number",
                self.c
            ));
        }
        if self.t < 1 {
            return bad("t must be at least 1".into());
        }
        if self.s < 1 {
            return bad("s must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.e) {
            return bad(format!("e = {} outside [0, 1]", self.e));
        }
        if self.rollout_depth == Some(0) {
            return bad("rollout depth must be positive".into());
        }
        for &t in &self.threats {
            if !alphabet.has(t, Category::Threat) {
                return bad(format!("threat token {t:?} is not threat-categorized"));
            }
        }
        for t in self.goals.tokens() {
            if !alphabet.contains(t) {
                return bad(format!("goal token {t:?} not in alphabet"));
            }
        }
        Ok(())
    }

    /// The same kit with generation parameters replaced.
    pub fn with_params(&self, t: u32, s: usize, e: f64) -> Self {
        Self {
            t,
            s,
            e,
            ..self.clone()
        }
    }
}

/// Choice sets for the varied-parameter regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRanges {
    pub t: Vec<u32>,
    pub s: Vec<usize>,
    pub e: Vec<f64>,
}

impl ParamRanges {
    pub fn singleton(t: u32, s: usize, e: f64) -> Self {
        Self {
            t: vec![t],
            s: vec![s],
            e: vec![e],
        }
    }

    pub fn validate(&self) -> Result<(), KitError> {
        if self.t.is_empty() || self.s.is_empty() || self.e.is_empty() {
            return Err(KitError::Invalid(
                "parameter ranges must be non-empty".into(),
            ));
        }
        if self.t.contains(&0) || self.s.contains(&0) {
            return Err(KitError::Invalid("t and s choices must be positive".into()));
        }
        if self.e.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(KitError::Invalid("e choices must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Independent uniform draws of `(t, s, e)`.
pub fn sample_params(ranges: &ParamRanges, rng: &mut RandomStream) -> (u32, usize, f64) {
    let t = ranges.t[rng::index(rng, ranges.t.len())];
    let s = ranges.s[rng::index(rng, ranges.s.len())];
    let e = ranges.e[rng::index(rng, ranges.e.len())];
    (t, s, e)
}
