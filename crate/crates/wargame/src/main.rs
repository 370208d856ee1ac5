//! Command-line front end: run experiments, ingest human games, analyze
//! record sets, play interactively, and generate synthetic fixtures.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use wargame::catalog::GameMove;
use wargame::experiment::{
    emit_human_csv, ingest_human_csv, plan_games, run_experiment, ExperimentConfig,
};
use wargame::fixtures::{generate_records, GeneratorSpec};
use wargame::gateway::{
    Backend, EndpointConfig, Gateway, HttpBackend, ScriptedBackend, SyntheticBackend,
    TranscriptLog,
};
use wargame::parse::parse_selection;
use wargame::profile::ProfileDataset;
use wargame::report::{analyze, sha256_hex, summarize, AnalysisOptions};
use wargame::session::{
    run_game, Clock, FixedClock, GameRecord, HumanBackend, SessionIo, SystemClock,
};
use wargame::store::RecordStore;

#[derive(Parser)]
#[command(name = "wargame", version, about = "Two-move crisis wargame experiment engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run (or resume) the full teams-by-treatments experiment.
    Run {
        /// TOML config; defaults are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Append-only record store (JSONL), created if missing.
        #[arg(long)]
        records: PathBuf,
        /// Optional request/response transcript log (JSONL).
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
    /// Convert a human game CSV into the record format.
    Ingest {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        records: PathBuf,
    },
    /// Analyze a record store and print/emit the report bundle.
    Analyze {
        #[arg(long)]
        records: PathBuf,
        /// Optional human games, as a record store or human CSV.
        #[arg(long)]
        human: Option<PathBuf>,
        /// Write the full JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = wargame::stats::bootstrap::DEFAULT_RESAMPLES)]
        resamples: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Play one game interactively as the whole team.
    Play {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        records: PathBuf,
        /// Which planned game to play, e.g. `t00-lo-basic-rev`.
        #[arg(long)]
        game: String,
    },
    /// Parse a free-text answer and print the extracted selection.
    Parse {
        /// 1 or 2.
        #[arg(long = "move")]
        game_move: u8,
        /// File to read; stdin when omitted.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Generate synthetic record sets for pipeline testing.
    Fixtures {
        #[arg(long, value_enum, default_value_t = Pattern::Moderate)]
        pattern: Pattern,
        #[arg(long, default_value_t = 10)]
        teams: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write records here (JSONL).
        #[arg(long)]
        records: Option<PathBuf>,
        /// Also emit the human CSV form.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Pattern {
    Moderate,
    Model,
    Human,
}

/// On-disk configuration. Secrets never appear here: the HTTP backend only
/// stores the *name* of the environment variable holding the API key.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    experiment: Option<ExperimentConfig>,
    #[serde(default)]
    backend: Option<BackendConfig>,
    /// Optional profile dataset (JSON) for bootstrap team sampling.
    #[serde(default)]
    profiles: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum BackendConfig {
    Synthetic {
        #[serde(default)]
        seed: u64,
    },
    Scripted {
        script: PathBuf,
    },
    Http {
        #[serde(flatten)]
        endpoint: EndpointConfig,
    },
}

fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
        }
    }
}

fn build_backend(config: &Option<BackendConfig>) -> Result<Box<dyn Backend>> {
    Ok(match config {
        None | Some(BackendConfig::Synthetic { .. }) => {
            let seed = match config {
                Some(BackendConfig::Synthetic { seed }) => *seed,
                _ => 0,
            };
            Box::new(SyntheticBackend::new(seed))
        }
        Some(BackendConfig::Scripted { script }) => {
            let text = std::fs::read_to_string(script)
                .with_context(|| format!("reading script {}", script.display()))?;
            Box::new(ScriptedBackend::from_json(&text)?)
        }
        Some(BackendConfig::Http { endpoint }) => Box::new(HttpBackend::new(endpoint.clone())?),
    })
}

fn load_profiles(path: &Option<PathBuf>) -> Result<Option<ProfileDataset>> {
    match path {
        None => Ok(None),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading profiles {}", p.display()))?;
            Ok(Some(serde_json::from_str(&text)?))
        }
    }
}

fn clock_for(gateway: &Gateway) -> Box<dyn Clock> {
    if gateway.is_deterministic() {
        Box::new(FixedClock::epoch())
    } else {
        Box::new(SystemClock)
    }
}

fn load_records(path: &Path) -> Result<Vec<GameRecord>> {
    // Accept either a record store (JSONL) or a human CSV.
    if path.extension().and_then(|e| e.to_str()) == Some("csv") {
        let text = std::fs::read_to_string(path)?;
        Ok(ingest_human_csv(&text)?)
    } else {
        Ok(RecordStore::load(path)?.records)
    }
}

struct StdIo;

impl SessionIo for StdIo {
    fn show(&mut self, text: &str) {
        println!("\n{text}\n");
    }

    fn read_reply(&mut self) -> std::io::Result<String> {
        // Multi-line input terminated by a lone "." line.
        print!("> ");
        std::io::stdout().flush()?;
        let stdin = std::io::stdin();
        let mut lines = Vec::new();
        for line in stdin.lock().lines() {
            let line = line?;
            if line.trim() == "." {
                break;
            }
            lines.push(line);
        }
        Ok(lines.join("\n"))
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config, records, transcript } => {
            let file = load_config(config.as_deref())?;
            let experiment = file.experiment.clone().unwrap_or_default();
            let dataset = load_profiles(&file.profiles)?;
            let backend = build_backend(&file.backend)?;
            let transcript = transcript.map(TranscriptLog::open).transpose()?;
            let gateway = Gateway::new(backend, transcript);
            let clock = clock_for(&gateway);
            let script = wargame::scenario::ScenarioScript::builtin();
            let mut store = RecordStore::open(&records)?;
            if store.truncated_tail_on_open() {
                eprintln!("warning: dropped a torn trailing record; replaying that game");
            }
            let summary = run_experiment(
                &gateway,
                &script,
                &experiment,
                dataset.as_ref(),
                &mut store,
                clock.as_ref(),
                |r| {
                    let status = if r.is_completed() { "ok" } else { "FAILED" };
                    eprintln!("{} {status}", r.game_key);
                },
            )?;
            println!(
                "played {}, failed {}, skipped {} (already recorded)",
                summary.played, summary.failed, summary.skipped
            );
        }
        Command::Ingest { csv, records } => {
            let text = std::fs::read_to_string(&csv)
                .with_context(|| format!("reading {}", csv.display()))?;
            let parsed = ingest_human_csv(&text)?;
            let mut store = RecordStore::open(&records)?;
            let mut added = 0;
            for r in parsed {
                if !store.contains(&r.game_key) {
                    store.append(r)?;
                    added += 1;
                }
            }
            println!("ingested {added} games into {}", records.display());
        }
        Command::Analyze { records, human, out, resamples, seed } => {
            let model_records = load_records(&records)?;
            let human_records = human.as_ref().map(|p| load_records(p)).transpose()?;
            let mut hashes = BTreeMap::new();
            hashes.insert(
                records.display().to_string(),
                sha256_hex(&std::fs::read(&records)?),
            );
            if let Some(p) = &human {
                hashes.insert(p.display().to_string(), sha256_hex(&std::fs::read(p)?));
            }
            let report = analyze(
                &model_records,
                human_records.as_deref(),
                AnalysisOptions { resamples, seed },
                hashes,
            )?;
            print!("{}", summarize(&report));
            if let Some(out) = out {
                std::fs::write(&out, serde_json::to_vec_pretty(&report)?)?;
                println!("report written to {}", out.display());
            }
        }
        Command::Play { config, records, game } => {
            let file = load_config(config.as_deref())?;
            let experiment = file.experiment.clone().unwrap_or_default();
            let dataset = load_profiles(&file.profiles)?;
            let setups = plan_games(&experiment, dataset.as_ref())?;
            let Some(setup) = setups.into_iter().find(|s| s.game_key == game) else {
                bail!("unknown game {game:?}; keys look like t00-lo-basic-rev");
            };
            let gateway = Gateway::new(Box::new(HumanBackend::new(Box::new(StdIo))), None);
            let script = wargame::scenario::ScenarioScript::builtin();
            let record = run_game(&gateway, &script, &setup, &SystemClock)?;
            let mut store = RecordStore::open(&records)?;
            let completed = record.is_completed();
            store.append(record)?;
            println!(
                "game {game} recorded ({})",
                if completed { "completed" } else { "failed" }
            );
        }
        Command::Parse { game_move, file } => {
            let game_move = match game_move {
                1 => GameMove::Move1,
                2 => GameMove::Move2,
                other => bail!("--move must be 1 or 2, got {other}"),
            };
            let text = match file {
                Some(p) => std::fs::read_to_string(p)?,
                None => {
                    let mut buf = String::new();
                    std::io::Read::read_to_string(&mut std::io::stdin(), &mut buf)?;
                    buf
                }
            };
            let outcome = parse_selection(&text, game_move)?;
            println!("codes: {}", outcome.vector.codes(game_move).join(" "));
            println!("confidence: {:?}", outcome.confidence);
            for d in &outcome.diagnostics {
                println!("note: {d}");
            }
        }
        Command::Fixtures { pattern, teams, seed, records, csv } => {
            let mut spec = match pattern {
                Pattern::Moderate => GeneratorSpec::moderate(),
                Pattern::Model => GeneratorSpec::model_pattern(),
                Pattern::Human => GeneratorSpec::human_pattern(),
            };
            spec.teams = teams;
            spec.seed = seed;
            let generated = generate_records(&spec);
            if let Some(path) = records {
                let mut store = RecordStore::open(&path)?;
                for r in &generated {
                    if !store.contains(&r.game_key) {
                        store.append(r.clone())?;
                    }
                }
                println!("wrote {} records to {}", generated.len(), path.display());
            }
            if let Some(path) = csv {
                std::fs::write(&path, emit_human_csv(&generated)?)?;
                println!("wrote human csv to {}", path.display());
            }
        }
    }
    Ok(())
}
