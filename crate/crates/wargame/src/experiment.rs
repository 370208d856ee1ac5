//! The full factorial experiment: teams × treatments, resumable.
//!
//! Every game's randomness derives from one master seed: per-team sampling
//! seeds and per-game seeds are hashes of (master seed, role, indices), so a
//! run is reproducible from its config alone and a resumed run plays the
//! missing games exactly as the uninterrupted run would have.

use crate::gateway::Gateway;
use crate::profile::{sample_team, ProfileDataset, ProfileError, SamplingMode, TeamComposition};
use crate::response::Treatment;
use crate::scenario::{PromptVariant, ScenarioScript};
use crate::session::{run_game, Clock, GameOutcome, GameRecord, GameSetup, SessionError};
use crate::store::{RecordStore, StoreError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const DEFAULT_TEAMS: u32 = 10;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("human csv: {0}")]
    HumanCsv(String),
}

/// Everything needed to reproduce a run (except the player backend).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    #[serde(default = "default_teams")]
    pub teams: u32,
    #[serde(default = "default_variant")]
    pub variant: PromptVariant,
    #[serde(default = "default_sampling")]
    pub sampling: SamplingMode,
}

fn default_teams() -> u32 {
    DEFAULT_TEAMS
}
fn default_variant() -> PromptVariant {
    PromptVariant::default()
}
fn default_sampling() -> SamplingMode {
    SamplingMode::UniformRandom
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            master_seed: 0,
            teams: DEFAULT_TEAMS,
            variant: PromptVariant::default(),
            sampling: SamplingMode::UniformRandom,
        }
    }
}

fn derive_u64(parts: &[&[u8]]) -> u64 {
    let mut hasher = Sha256::new();
    for p in parts {
        hasher.update(p);
        hasher.update([0u8]); // domain separator between parts
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is long enough"))
}

/// Seed for one game, a hash of (master seed, team, treatment).
pub fn game_seed(master_seed: u64, team_index: u32, treatment: &Treatment) -> u64 {
    derive_u64(&[
        b"game",
        &master_seed.to_le_bytes(),
        &team_index.to_le_bytes(),
        treatment.label().as_bytes(),
    ])
}

/// Seed for sampling one team's roster.
pub fn team_seed(master_seed: u64, team_index: u32) -> u64 {
    derive_u64(&[b"team", &master_seed.to_le_bytes(), &team_index.to_le_bytes()])
}

/// Stable game key: `t03-lo-basic-rev`.
pub fn game_key(team_index: u32, treatment: &Treatment) -> String {
    format!("t{team_index:02}-{}", treatment.label())
}

/// Samples the team roster for one index. The same roster is reused across
/// all eight treatments, so treatment contrasts are within-team.
pub fn team_for_index(
    config: &ExperimentConfig,
    dataset: Option<&ProfileDataset>,
    team_index: u32,
) -> Result<TeamComposition, ProfileError> {
    let mut rng = ChaCha8Rng::seed_from_u64(team_seed(config.master_seed, team_index));
    sample_team(config.sampling, dataset, &mut rng)
}

/// The full run plan in its fixed execution order.
pub fn plan_games(
    config: &ExperimentConfig,
    dataset: Option<&ProfileDataset>,
) -> Result<Vec<GameSetup>, ProfileError> {
    let mut setups = Vec::with_capacity(config.teams as usize * 8);
    for team_index in 0..config.teams {
        let team = team_for_index(config, dataset, team_index)?;
        for treatment in Treatment::all() {
            setups.push(GameSetup {
                game_key: game_key(team_index, &treatment),
                team_index,
                treatment,
                seed: game_seed(config.master_seed, team_index, &treatment),
                team: team.clone(),
                variant: config.variant,
            });
        }
    }
    Ok(setups)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExperimentSummary {
    pub played: u32,
    pub skipped: u32,
    pub failed: u32,
}

/// Runs every game not already in the store, appending as it goes. Progress
/// is reported per game through `progress`.
pub fn run_experiment(
    gateway: &Gateway,
    script: &ScenarioScript,
    config: &ExperimentConfig,
    dataset: Option<&ProfileDataset>,
    store: &mut RecordStore,
    clock: &dyn Clock,
    mut progress: impl FnMut(&GameRecord),
) -> Result<ExperimentSummary, ExperimentError> {
    let mut summary = ExperimentSummary::default();
    for setup in plan_games(config, dataset)? {
        if store.contains(&setup.game_key) {
            summary.skipped += 1;
            continue;
        }
        let record = run_game(gateway, script, &setup, clock)?;
        match record.outcome {
            GameOutcome::Completed { .. } => summary.played += 1,
            GameOutcome::Failed { .. } => summary.failed += 1,
        }
        progress(&record);
        store.append(record)?;
    }
    Ok(summary)
}

// ---------------------------------------------------------------------------
// Human game ingest

/// CSV schema for externally played (human) games. One row per game:
///
/// `game_key, team_index, treatment, move1, move2, end_state1, course_plan2,
/// end_state2, played_at, team`
///
/// `treatment` is a treatment label (`lo-basic-rev`), `move1`/`move2` are
/// space-separated option codes (`b e`, `a a1 d`; empty for none), and
/// `team` is a JSON array of six player-profile objects.
#[derive(Debug, Serialize, Deserialize)]
struct HumanCsvRow {
    game_key: String,
    team_index: u32,
    treatment: String,
    move1: String,
    move2: String,
    end_state1: String,
    course_plan2: String,
    end_state2: String,
    played_at: String,
    team: String,
}

/// Parses a human game CSV into records. Every row is validated: unknown
/// treatment labels, malformed codes, or invalid rosters name the row and
/// field rather than producing a partial dataset.
pub fn ingest_human_csv(content: &str) -> Result<Vec<GameRecord>, ExperimentError> {
    use crate::catalog::GameMove;
    use crate::parse::Confidence;
    use crate::response::ResponseVector;
    use crate::session::RECORD_SCHEMA;

    let mut reader = csv::Reader::from_reader(content.as_bytes());
    let mut records = Vec::new();
    for (i, row) in reader.deserialize::<HumanCsvRow>().enumerate() {
        let line = i + 2; // 1-based, after the header
        let fail = |message: String| ExperimentError::HumanCsv(format!("row {line}: {message}"));
        let row = row.map_err(|e| ExperimentError::HumanCsv(format!("row {line}: {e}")))?;
        let treatment = Treatment::from_label(&row.treatment)
            .ok_or_else(|| fail(format!("unknown treatment label {:?}", row.treatment)))?;
        let team: TeamComposition = serde_json::from_str::<Vec<crate::profile::PlayerProfile>>(
            &row.team,
        )
        .map(|players| TeamComposition { players })
        .map_err(|e| fail(format!("bad team json: {e}")))?;
        team.validate().map_err(|e| fail(e.to_string()))?;

        let mut response = ResponseVector::new();
        for (mv, field) in [(GameMove::Move1, &row.move1), (GameMove::Move2, &row.move2)] {
            for code in field.split_whitespace() {
                response
                    .set_code(mv, code, true)
                    .map_err(|e| fail(e.to_string()))?;
            }
        }
        response.end_state1 = row.end_state1;
        response.end_state2 = row.end_state2;
        response.course_plan2 = row.course_plan2;

        records.push(GameRecord {
            schema: RECORD_SCHEMA.to_string(),
            game_key: row.game_key,
            team_index: row.team_index,
            treatment,
            seed: 0,
            team,
            variant: PromptVariant::default(),
            backend: "human:csv".to_string(),
            started_at: row.played_at.clone(),
            finished_at: row.played_at,
            outcome: GameOutcome::Completed {
                response,
                move1_confidence: Confidence::ExactLetters,
                move2_confidence: Confidence::ExactLetters,
                reelicits: 0,
                diagnostics: Vec::new(),
            },
        });
    }
    Ok(records)
}

/// Renders records back into the human CSV schema (used to publish synthetic
/// human-pattern datasets and to round-trip-test the ingest path).
pub fn emit_human_csv(records: &[GameRecord]) -> Result<String, ExperimentError> {
    use crate::catalog::GameMove;

    let mut writer = csv::Writer::from_writer(Vec::new());
    for r in records {
        let response = r
            .response()
            .ok_or_else(|| ExperimentError::HumanCsv("cannot emit a failed game".to_string()))?;
        writer
            .serialize(HumanCsvRow {
                game_key: r.game_key.clone(),
                team_index: r.team_index,
                treatment: r.treatment.label(),
                move1: response.codes(GameMove::Move1).join(" "),
                move2: response.codes(GameMove::Move2).join(" "),
                end_state1: response.end_state1.clone(),
                course_plan2: response.course_plan2.clone(),
                end_state2: response.end_state2.clone(),
                played_at: r.finished_at.clone(),
                team: serde_json::to_string(&r.team.players)
                    .map_err(|e| ExperimentError::HumanCsv(e.to_string()))?,
            })
            .map_err(|e| ExperimentError::HumanCsv(e.to_string()))?;
    }
    let bytes = writer.into_inner().map_err(|e| ExperimentError::HumanCsv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| ExperimentError::HumanCsv(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::SyntheticBackend;
    use crate::session::FixedClock;
    use std::collections::HashSet;

    fn gateway(seed: u64) -> Gateway {
        Gateway::new(Box::new(SyntheticBackend::new(seed)), None)
    }

    #[test]
    fn plan_covers_the_full_factorial() {
        let config = ExperimentConfig { teams: 10, ..Default::default() };
        let setups = plan_games(&config, None).unwrap();
        assert_eq!(setups.len(), 80);
        let keys: HashSet<_> = setups.iter().map(|s| s.game_key.clone()).collect();
        assert_eq!(keys.len(), 80);
        // Each team plays all 8 treatments with one shared roster.
        let team0: Vec<_> = setups.iter().filter(|s| s.team_index == 0).collect();
        assert_eq!(team0.len(), 8);
        assert!(team0.windows(2).all(|w| w[0].team == w[1].team));
        // Different teams get different rosters (overwhelmingly likely).
        assert_ne!(setups[0].team, setups[8].team);
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let t = Treatment::all();
        let mut seen = HashSet::new();
        for team in 0..10 {
            for tr in &t {
                assert!(seen.insert(game_seed(99, team, tr)));
                assert_eq!(game_seed(99, team, tr), game_seed(99, team, tr));
            }
        }
        assert_ne!(game_seed(99, 0, &t[0]), game_seed(100, 0, &t[0]));
    }

    #[test]
    fn experiment_runs_and_resumes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        let script = ScenarioScript::builtin();
        let config = ExperimentConfig { master_seed: 5, teams: 2, ..Default::default() };
        let clock = FixedClock::epoch();

        let mut store = RecordStore::open(&path).unwrap();
        let summary =
            run_experiment(&gateway(5), &script, &config, None, &mut store, &clock, |_| {})
                .unwrap();
        assert_eq!(summary.played + summary.failed, 16);
        assert_eq!(summary.skipped, 0);
        drop(store);

        // Resume: everything is already present.
        let mut store = RecordStore::open(&path).unwrap();
        let summary =
            run_experiment(&gateway(5), &script, &config, None, &mut store, &clock, |_| {})
                .unwrap();
        assert_eq!(summary.skipped, 16);
        assert_eq!(summary.played, 0);
    }

    #[test]
    fn resumed_run_matches_uninterrupted_run() {
        let dir = tempfile::tempdir().unwrap();
        let script = ScenarioScript::builtin();
        let config = ExperimentConfig { master_seed: 8, teams: 1, ..Default::default() };
        let clock = FixedClock::epoch();

        // Uninterrupted run.
        let full_path = dir.path().join("full.jsonl");
        let mut full = RecordStore::open(&full_path).unwrap();
        run_experiment(&gateway(8), &script, &config, None, &mut full, &clock, |_| {}).unwrap();

        // Interrupted after 3 games, then resumed.
        let part_path = dir.path().join("part.jsonl");
        let mut part = RecordStore::open(&part_path).unwrap();
        for setup in plan_games(&config, None).unwrap().into_iter().take(3) {
            let record = run_game(&gateway(8), &script, &setup, &clock).unwrap();
            part.append(record).unwrap();
        }
        run_experiment(&gateway(8), &script, &config, None, &mut part, &clock, |_| {}).unwrap();

        assert_eq!(
            serde_json::to_string(full.records()).unwrap(),
            serde_json::to_string(part.records()).unwrap()
        );
    }

    #[test]
    fn human_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        let script = ScenarioScript::builtin();
        let config = ExperimentConfig { master_seed: 2, teams: 1, ..Default::default() };
        let mut store = RecordStore::open(&path).unwrap();
        run_experiment(&gateway(2), &script, &config, None, &mut store, &FixedClock::epoch(), |_| {})
            .unwrap();
        let completed: Vec<_> =
            store.records().iter().filter(|r| r.is_completed()).cloned().collect();
        assert!(!completed.is_empty());

        let csv = emit_human_csv(&completed).unwrap();
        let back = ingest_human_csv(&csv).unwrap();
        assert_eq!(back.len(), completed.len());
        for (a, b) in back.iter().zip(&completed) {
            assert_eq!(a.game_key, b.game_key);
            assert_eq!(a.treatment, b.treatment);
            assert_eq!(a.response().unwrap().bit_string(), b.response().unwrap().bit_string());
            assert_eq!(a.team, b.team);
            assert_eq!(a.backend, "human:csv");
        }
    }

    #[test]
    fn human_csv_errors_name_the_row() {
        let header = "game_key,team_index,treatment,move1,move2,end_state1,course_plan2,end_state2,played_at,team";
        let team = serde_json::to_string(
            &(0..6)
                .map(|_| crate::profile::PlayerProfile {
                    age: 40,
                    gender: "female".to_string(),
                    education: "doctorate".to_string(),
                    expertise: "military".to_string(),
                    free_traits: None,
                })
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let quoted = format!("\"{}\"", team.replace('"', "\"\""));
        let bad_treatment = format!("{header}\ng1,0,bogus,b,d,x,y,z,,{quoted}\n");
        let err = ingest_human_csv(&bad_treatment).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
        assert!(err.to_string().contains("bogus"));

        let bad_code = format!("{header}\ng1,0,lo-basic-rev,z,d,x,y,z,,{quoted}\n");
        let err = ingest_human_csv(&bad_code).unwrap_err();
        assert!(err.to_string().contains("unknown action code"), "{err}");

        let good = format!("{header}\ng1,0,lo-basic-rev,b e,d f,x,y,z,2026-01-01,{quoted}\n");
        let records = ingest_human_csv(&good).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].response().unwrap().codes(crate::catalog::GameMove::Move1), ["b", "e"]);
    }
}
