use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use trp_core::kit::sample_params;
use trp_core::metrics::CSV_HEADER;
use trp_core::pipeline::threats_csv;
use trp_core::{
    evaluate_population, generate, mc_generate, rng, run_playthrough, serialize_level, train,
    Domain, Generation, Level, MetricsReport, PlaythroughRecord,
};

use crate::config::RunConfig;
use crate::render;
use crate::CliError;

const VARIETY_SALT: u64 = 0x7661_7269;
const MARKOV_SALT: u64 = 0x6d61_726b;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    TrpFixed,
    TrpVariety,
    Markov,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::TrpFixed, Method::TrpVariety, Method::Markov];

    pub fn label(self) -> &'static str {
        match self {
            Method::TrpFixed => "trp-fixed",
            Method::TrpVariety => "trp-variety",
            Method::Markov => "markov",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fixed" | "trp-fixed" => Ok(Method::TrpFixed),
            "variety" | "trp-variety" => Ok(Method::TrpVariety),
            "markov" => Ok(Method::Markov),
            other => Err(format!("unknown method {other:?} (fixed, variety, markov)")),
        }
    }
}

/// One member of a generated population.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub seed: u64,
    /// Index into the run's sources.
    pub source: usize,
    /// `(t, s, e)` used, for TRP methods.
    pub params: Option<(u32, usize, f64)>,
    pub level: Result<Level, String>,
    pub generation: Option<Box<Generation>>,
}

/// Generates `cfg.population` levels with seeds `cfg.seed + i`. TRP level
/// `i` is built from source `i mod n`; the Markov model trains on all
/// sources. Output order follows the seeds regardless of thread count.
pub fn generate_population(cfg: &RunConfig, method: Method) -> Result<Vec<Outcome>, CliError> {
    let model = match method {
        Method::Markov => {
            Some(train(&cfg.source_levels()).map_err(|e| CliError::Config(e.to_string()))?)
        }
        _ => None,
    };
    let d = &cfg.domain;
    let one = |i: usize| {
        let seed = cfg.seed.wrapping_add(i as u64);
        let source = i % cfg.sources.len();
        let src = &cfg.sources[source].level;
        match &model {
            Some(m) => {
                let mut r = rng::substream(seed, MARKOV_SALT);
                Outcome {
                    seed,
                    source,
                    params: None,
                    level: mc_generate(m, src.width(), src.height(), &mut r)
                        .map_err(|e| e.to_string()),
                    generation: None,
                }
            }
            None => {
                let kit = if method == Method::TrpVariety {
                    let (t, s, e) =
                        sample_params(&d.ranges, &mut rng::substream(seed, VARIETY_SALT));
                    d.kit.with_params(t, s, e)
                } else {
                    d.kit.clone()
                };
                let params = Some((kit.t, kit.s, kit.e));
                match generate(src, &d.rules, &kit, &d.budget, seed) {
                    Ok(g) => Outcome {
                        seed,
                        source,
                        params,
                        level: Ok(g.level.clone()),
                        generation: Some(Box::new(g)),
                    },
                    Err(e) => Outcome {
                        seed,
                        source,
                        params,
                        level: Err(e.to_string()),
                        generation: None,
                    },
                }
            }
        }
    };
    let run = || {
        (0..cfg.population)
            .into_par_iter()
            .map(one)
            .collect::<Vec<_>>()
    };
    match cfg.jobs {
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Internal(e.to_string()))?
            .install(run)),
        None => Ok(run()),
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    domain: &'a str,
    method: &'a str,
    levels: Vec<ManifestEntry<'a>>,
}

#[derive(Serialize)]
struct ManifestEntry<'a> {
    seed: u64,
    source: &'a str,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    s: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    e: Option<f64>,
}

pub fn level_file_name(seed: u64) -> String {
    format!("gen_{seed}.lvl")
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

/// Writes `gen_<seed>.lvl` for every successful member plus `manifest.json`,
/// and with `debug` the sketch and ranked threats of each TRP generation.
pub fn write_population(
    dir: &Path,
    cfg: &RunConfig,
    method: Method,
    outcomes: &[Outcome],
) -> Result<(), CliError> {
    create_dir(dir)?;
    let debug_dir = dir.join("debug");
    if cfg.debug {
        create_dir(&debug_dir)?;
    }
    let mut levels = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        let file = match &o.level {
            Ok(level) => {
                let name = level_file_name(o.seed);
                write(&dir.join(&name), serialize_level(level))?;
                Some(name)
            }
            Err(_) => None,
        };
        if let (true, Some(g)) = (cfg.debug, &o.generation) {
            write(
                &debug_dir.join(format!("sketch_{}.txt", o.seed)),
                g.sketch.to_text(),
            )?;
            write(
                &debug_dir.join(format!("threats_{}.csv", o.seed)),
                threats_csv(&g.ranked),
            )?;
        }
        levels.push(ManifestEntry {
            seed: o.seed,
            source: &cfg.sources[o.source].name,
            status: if file.is_some() { "ok" } else { "error" },
            file,
            error: o.level.as_ref().err().map(String::as_str),
            t: o.params.map(|p| p.0),
            s: o.params.map(|p| p.1),
            e: o.params.map(|p| p.2),
        });
    }
    let manifest = Manifest {
        domain: &cfg.domain.name,
        method: method.label(),
        levels,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write(&dir.join("manifest.json"), json + "\n")
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateSummary {
    pub ok: usize,
    pub failed: usize,
}

pub fn cmd_generate(cfg: &RunConfig, method: Method) -> Result<GenerateSummary, CliError> {
    let outcomes = generate_population(cfg, method)?;
    write_population(&cfg.output, cfg, method, &outcomes)?;
    let ok = outcomes.iter().filter(|o| o.level.is_ok()).count();
    if ok == 0 {
        let first = outcomes[0]
            .level
            .as_ref()
            .err()
            .cloned()
            .unwrap_or_default();
        return Err(CliError::Internal(format!("no level generated: {first}")));
    }
    Ok(GenerateSummary {
        ok,
        failed: outcomes.len() - ok,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PlayRun {
    pub seed: u64,
    pub success: bool,
    pub moves: usize,
    pub deaths: usize,
}

#[derive(Serialize)]
struct Trace<'a> {
    domain: &'a str,
    source: &'a str,
    runs: Vec<TraceRun<'a>>,
}

#[derive(Serialize)]
struct TraceRun<'a> {
    seed: u64,
    #[serde(flatten)]
    record: &'a PlaythroughRecord,
}

/// Plays the first source `kit.t` times with seeds `cfg.seed + i` and writes
/// `trace.json` and `overlay.txt`. A failed playthrough is reported, not an
/// error.
pub fn cmd_play(cfg: &RunConfig) -> Result<Vec<PlayRun>, CliError> {
    let d = &cfg.domain;
    let source = &cfg.sources[0];
    let game = d
        .game(&source.level)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut records = Vec::new();
    for i in 0..d.kit.t as u64 {
        let seed = cfg.seed.wrapping_add(i);
        let record = run_playthrough(&game, &d.kit, &d.budget, seed)
            .map_err(|e| CliError::Config(e.to_string()))?;
        records.push((seed, record));
    }

    create_dir(&cfg.output)?;
    let trace = Trace {
        domain: &d.name,
        source: &source.name,
        runs: records
            .iter()
            .map(|(seed, record)| TraceRun {
                seed: *seed,
                record,
            })
            .collect(),
    };
    let json = serde_json::to_string_pretty(&trace).expect("trace serializes");
    write(&cfg.output.join("trace.json"), json + "\n")?;
    let mut merged = PlaythroughRecord::default();
    for (_, r) in &records {
        merged.visited.extend(r.visited.iter().copied());
        merged.executed_path.extend(r.executed_path.iter().copied());
    }
    write(
        &cfg.output.join("overlay.txt"),
        render::overlay(&source.level, &merged),
    )?;

    Ok(records
        .iter()
        .map(|(seed, r)| PlayRun {
            seed: *seed,
            success: r.success,
            moves: r.executed_path.len().saturating_sub(1),
            deaths: r.failures.len(),
        })
        .collect())
}

/// Reads every `.lvl` file of `dir` in name order.
pub fn read_population(domain: &Domain, dir: &Path) -> Result<Vec<Level>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "lvl"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no .lvl files"),
        ));
    }
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            domain
                .parse_level(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        })
        .collect()
}

/// Report CSV with a leading `method` column.
pub fn results_csv(rows: &[(String, MetricsReport)]) -> String {
    let mut s = format!("method,{CSV_HEADER}\n");
    for (label, r) in rows {
        s.push_str(&format!("{label},{}\n", r.csv_row()));
    }
    s
}

/// Evaluates each population directory against the run's sources and writes
/// `report.csv` to the output directory. Rows are labelled by directory name.
pub fn cmd_evaluate(
    cfg: &RunConfig,
    dirs: &[PathBuf],
) -> Result<Vec<(String, MetricsReport)>, CliError> {
    let sources = cfg.source_levels();
    let mut rows = Vec::new();
    for dir in dirs {
        let levels = read_population(&cfg.domain, dir)?;
        let report = evaluate_population(&levels, &sources, cfg.domain.kind())?;
        let label = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| dir.display().to_string());
        rows.push((label, report));
    }
    create_dir(&cfg.output)?;
    write(&cfg.output.join("report.csv"), results_csv(&rows))?;
    Ok(rows)
}

#[derive(Serialize)]
struct ExperimentMeta<'a> {
    domain: &'a str,
    seed: u64,
    population: usize,
    sources: Vec<&'a str>,
    /// How plagiarism is aggregated when there are several sources.
    plagiarism: &'static str,
    methods: Vec<MethodMeta>,
}

#[derive(Serialize)]
struct MethodMeta {
    method: &'static str,
    generated: usize,
    failed: usize,
}

/// Generates and evaluates TRP-Fixed, TRP-Variety and Markov populations
/// under `output/<method>/`, then writes `results.csv`, `results.txt` and
/// `experiment.json`.
pub fn cmd_experiment(cfg: &RunConfig) -> Result<Vec<(String, MetricsReport)>, CliError> {
    let sources = cfg.source_levels();
    let mut rows = Vec::new();
    let mut methods = Vec::new();
    for method in Method::ALL {
        let outcomes = generate_population(cfg, method)?;
        write_population(&cfg.output.join(method.label()), cfg, method, &outcomes)?;
        let levels: Vec<Level> = outcomes
            .iter()
            .filter_map(|o| o.level.as_ref().ok().cloned())
            .collect();
        if levels.is_empty() {
            return Err(CliError::Internal(format!("{method}: no level generated")));
        }
        let report = evaluate_population(&levels, &sources, cfg.domain.kind())?;
        methods.push(MethodMeta {
            method: method.label(),
            generated: levels.len(),
            failed: outcomes.len() - levels.len(),
        });
        rows.push((method.label().to_string(), report));
    }

    write(&cfg.output.join("results.csv"), results_csv(&rows))?;
    write(&cfg.output.join("results.txt"), MetricsReport::table(&rows))?;
    let meta = ExperimentMeta {
        domain: &cfg.domain.name,
        seed: cfg.seed,
        population: cfg.population,
        sources: cfg.sources.iter().map(|s| s.name.as_str()).collect(),
        plagiarism: "max over sources",
        methods,
    };
    let json = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    write(&cfg.output.join("experiment.json"), json + "\n")?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ConfigFile;

    fn dungeon(population: usize, out: &Path) -> RunConfig {
        ConfigFile {
            domain: Some("dungeon".into()),
            population: Some(population),
            iterations_per_move: Some(60),
            output: Some(out.to_path_buf()),
            ..Default::default()
        }
        .resolve()
        .unwrap()
    }

    #[test]
    fn method_names_parse() {
        for m in Method::ALL {
            assert_eq!(m.label().parse::<Method>().unwrap(), m);
        }
        assert_eq!("fixed".parse::<Method>().unwrap(), Method::TrpFixed);
        assert!("wfc".parse::<Method>().is_err());
    }

    #[test]
    fn populations_ignore_thread_count() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = dungeon(4, dir.path());
        cfg.jobs = Some(1);
        let a = generate_population(&cfg, Method::TrpVariety).unwrap();
        cfg.jobs = Some(3);
        let b = generate_population(&cfg, Method::TrpVariety).unwrap();
        let seeds: Vec<u64> = a.iter().map(|o| o.seed).collect();
        assert_eq!(seeds, vec![0, 1, 2, 3]);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.level, y.level);
            assert_eq!(x.params, y.params);
        }
    }

    #[test]
    fn singleton_ranges_match_fixed_mode() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = dungeon(2, dir.path());
        let k = &cfg.domain.kit;
        cfg.domain.ranges = trp_core::ParamRanges::singleton(k.t, k.s, k.e);
        let fixed = generate_population(&cfg, Method::TrpFixed).unwrap();
        let variety = generate_population(&cfg, Method::TrpVariety).unwrap();
        for (x, y) in fixed.iter().zip(&variety) {
            assert_eq!(x.level, y.level);
        }
    }

    #[test]
    fn results_csv_has_a_method_column() {
        let r = MetricsReport {
            playable: 1.0,
            plagiarism_mean: 100.0,
            plagiarism_std: 0.0,
            selfsim_mean: None,
            selfsim_std: None,
            n: 1,
        };
        let csv = results_csv(&[("source".into(), r)]);
        assert_eq!(
            csv,
            "method,playable,plagiarism_mean,plagiarism_std,selfsim_mean,selfsim_std,n\n\
             source,1.0000,100.0000,0.0000,,,1\n"
        );
    }
}
