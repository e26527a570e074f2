//! Run configuration. A JSON file supplies defaults and command-line flags
//! override individual fields.
//!
//! ```json
//! {
//!   "domain": "platformer",
//!   "sources": ["levels/1-1.lvl"],
//!   "t": 2, "s": 9, "e": 0.67,
//!   "rollout_depth": 12,
//!   "population": 100,
//!   "seed": 0,
//!   "output": "out/platformer"
//! }
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use trp_core::{Domain, DomainError, Level, ParamRanges};

use crate::CliError;

/// Rollout depth cap as written in config files and flags: a step count or
/// `"unbounded"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DepthRepr", into = "DepthRepr")]
pub struct Depth(pub Option<u32>);

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DepthRepr {
    Steps(u32),
    Word(String),
}

impl TryFrom<DepthRepr> for Depth {
    type Error = String;

    fn try_from(r: DepthRepr) -> Result<Self, String> {
        match r {
            DepthRepr::Steps(n) => Ok(Depth(Some(n))),
            DepthRepr::Word(w) => w.parse(),
        }
    }
}

impl From<Depth> for DepthRepr {
    fn from(d: Depth) -> Self {
        match d.0 {
            Some(n) => DepthRepr::Steps(n),
            None => DepthRepr::Word("unbounded".into()),
        }
    }
}

impl FromStr for Depth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "unbounded" {
            return Ok(Depth(None));
        }
        s.parse()
            .map(|n| Depth(Some(n)))
            .map_err(|_| format!("rollout depth must be a number or \"unbounded\", got {s:?}"))
    }
}

impl fmt::Display for Depth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(n) => write!(f, "{n}"),
            None => f.write_str("unbounded"),
        }
    }
}

/// Every field is optional; unset fields fall back to the domain defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    /// Built-in domain name (`dungeon`, `platformer`) or a domain file path.
    pub domain: Option<String>,
    pub sources: Vec<PathBuf>,
    pub t: Option<u32>,
    pub s: Option<usize>,
    pub e: Option<f64>,
    pub c: Option<f64>,
    pub rollout_depth: Option<Depth>,
    pub ranges: Option<ParamRanges>,
    pub iterations_per_move: Option<u32>,
    pub max_moves: Option<u32>,
    pub population: Option<usize>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    /// Worker threads for batch generation; all cores when unset.
    pub jobs: Option<usize>,
    pub debug: Option<bool>,
}

impl ConfigFile {
    /// Reads a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: ConfigFile = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new(""));
        for p in &mut cfg.sources {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        if let Some(out) = &mut cfg.output {
            if out.is_relative() {
                *out = dir.join(&*out);
            }
        }
        if let Some(d) = &mut cfg.domain {
            if !is_builtin(d) && Path::new(d).is_relative() {
                *d = dir.join(&*d).to_string_lossy().into_owned();
            }
        }
        Ok(cfg)
    }

    /// Fields set in `top` win over fields set here.
    pub fn overlay(mut self, top: ConfigFile) -> ConfigFile {
        macro_rules! take {
            ($($f:ident),*) => {$(
                if top.$f.is_some() {
                    self.$f = top.$f;
                }
            )*};
        }
        take!(
            domain,
            t,
            s,
            e,
            c,
            rollout_depth,
            ranges,
            iterations_per_move,
            max_moves,
            population,
            seed,
            output,
            jobs,
            debug
        );
        if !top.sources.is_empty() {
            self.sources = top.sources;
        }
        self
    }

    pub fn domain(&self) -> Result<Domain, CliError> {
        let name = self
            .domain
            .as_deref()
            .ok_or_else(|| CliError::Config("no domain given (use --domain)".into()))?;
        if is_builtin(name) {
            Ok(Domain::builtin(name)?)
        } else {
            Ok(Domain::load(Path::new(name))?)
        }
    }

    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut domain = self.domain()?;
        let kit = &mut domain.kit;
        kit.t = self.t.unwrap_or(kit.t);
        kit.s = self.s.unwrap_or(kit.s);
        kit.e = self.e.unwrap_or(kit.e);
        kit.c = self.c.unwrap_or(kit.c);
        if let Some(d) = self.rollout_depth {
            kit.rollout_depth = d.0;
        }
        kit.validate(&domain.alphabet)?;
        if let Some(r) = &self.ranges {
            r.validate()?;
            domain.ranges = r.clone();
        }
        let budget = &mut domain.budget;
        budget.iterations_per_move = self
            .iterations_per_move
            .unwrap_or(budget.iterations_per_move);
        budget.max_moves = self.max_moves.unwrap_or(budget.max_moves);
        budget
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;

        let population = self.population.unwrap_or(domain.population);
        if population == 0 {
            return Err(CliError::Config(
                "population size must be at least 1".into(),
            ));
        }
        if self.jobs == Some(0) {
            return Err(CliError::Config("jobs must be at least 1".into()));
        }
        let sources = load_sources(&domain, &self.sources)?;
        Ok(RunConfig {
            domain,
            sources,
            population,
            seed: self.seed.unwrap_or(0),
            output: self.output.clone().unwrap_or_else(|| PathBuf::from("out")),
            jobs: self.jobs,
            debug: self.debug.unwrap_or(false),
        })
    }
}

fn is_builtin(name: &str) -> bool {
    matches!(name, "dungeon" | "platformer")
}

#[derive(Debug, Clone)]
pub struct Source {
    pub name: String,
    pub level: Level,
}

/// Falls back to the domain's bundled `level1` when no paths are given.
pub fn load_sources(domain: &Domain, paths: &[PathBuf]) -> Result<Vec<Source>, CliError> {
    if paths.is_empty() {
        let level = domain.builtin_level("level1")?;
        return Ok(vec![Source {
            name: format!("{}/level1", domain.name),
            level,
        }]);
    }
    paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            let level = domain
                .parse_level(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            Ok(Source {
                name: p.display().to_string(),
                level,
            })
        })
        .collect()
}

/// A fully resolved run: domain with overrides applied, loaded sources.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub domain: Domain,
    pub sources: Vec<Source>,
    pub population: usize,
    pub seed: u64,
    pub output: PathBuf,
    pub jobs: Option<usize>,
    pub debug: bool,
}

impl RunConfig {
    pub fn source_levels(&self) -> Vec<Level> {
        self.sources.iter().map(|s| s.level.clone()).collect()
    }
}

impl From<DomainError> for CliError {
    fn from(e: DomainError) -> Self {
        match e {
            DomainError::Io { path, source } => CliError::Io {
                path: path.into(),
                source,
            },
            other => CliError::Config(other.to_string()),
        }
    }
}
