use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::level::{Level, Position};
use crate::mcts::PlaythroughRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreatCandidate {
    pub position: Position,
    pub cause: char,
    /// Deaths at this position from this cause.
    pub deaths: usize,
    /// Share of all recorded deaths.
    pub relevance: f64,
}

/// Groups failures by position and cause, most relevant first. Ties are
/// ordered row-major, then by symbol.
pub fn rank_threats(record: &PlaythroughRecord) -> Vec<ThreatCandidate> {
    let total = record.failures.len();
    if total == 0 {
        return Vec::new();
    }
    let mut groups: BTreeMap<(Position, char), usize> = BTreeMap::new();
    for f in &record.failures {
        *groups.entry((f.position, f.cause)).or_default() += 1;
    }
    let mut out: Vec<ThreatCandidate> = groups
        .into_iter()
        .map(|((position, cause), deaths)| ThreatCandidate {
            position,
            cause,
            deaths,
            relevance: deaths as f64 / total as f64,
        })
        .collect();
    out.sort_by(|a, b| {
        b.deaths
            .cmp(&a.deaths)
            .then(a.position.row_major().cmp(&b.position.row_major()))
            .then(a.cause.cmp(&b.cause))
    });
    out
}

/// Places candidates in rank order until their cumulative relevance reaches
/// `e`. Cells that are not empty are skipped and do not count toward `e`.
pub fn place_threats(level: &Level, ranked: &[ThreatCandidate], e: f64) -> Level {
    let mut out = level.clone();
    if e <= 0.0 {
        return out;
    }
    let mut reached = 0.0;
    for cand in ranked {
        if reached >= e {
            break;
        }
        if !out.in_bounds(cand.position) || !out.is_empty_at(cand.position) {
            continue;
        }
        out.set(cand.position, cand.cause);
        reached += cand.relevance;
    }
    out
}

/// Render ranked candidates as CSV.
pub fn threats_csv(ranked: &[ThreatCandidate]) -> String {
    let mut s = String::from("col,row,cause,deaths,relevance\n");
    for c in ranked {
        s.push_str(&format!(
            "{},{},{},{},{:.6}\n",
            c.position.col, c.position.row, c.cause, c.deaths, c.relevance
        ));
    }
    s
}
