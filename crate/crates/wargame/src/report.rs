//! The analysis report: one serializable bundle holding every table and
//! projection computed from a set of game records, plus a manifest that
//! pins the inputs by hash so a report can be traced back to its data.

use crate::catalog::{GameMove, ACTIONS_SCHEMA};
use crate::response::{AiAccuracy, ChinaPosture, CrewTraining};
use crate::session::{GameRecord, RECORD_SCHEMA};
use crate::stats::bootstrap::DEFAULT_RESAMPLES;
use crate::stats::consistency::{consistency_table, ConsistencyTable};
use crate::stats::curves::{
    action_profile, aggressiveness_summary, ActionProfile, AggressivenessSummary,
};
use crate::stats::effect::{treatment_effect_table, TreatmentEffectRow};
use crate::stats::lda::{lda_projection, LdaError, LdaInput, LdaProjection};
use crate::stats::random::random_baseline;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use thiserror::Error;

pub const REPORT_SCHEMA: &str = "report-v1";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no completed games to analyze")]
    NoCompletedGames,
    #[error(transparent)]
    Lda(#[from] LdaError),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub resamples: u32,
    pub seed: u64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions { resamples: DEFAULT_RESAMPLES, seed: 0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameCounts {
    pub total: usize,
    pub completed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportBundle {
    pub schema: String,
    pub actions_schema: String,
    pub record_schema: String,
    pub options: AnalysisOptions,
    /// sha256 of each input file, keyed by a caller-chosen name.
    pub input_hashes: BTreeMap<String, String>,
    pub model_games: GameCounts,
    pub human_games: Option<GameCounts>,
    pub effects: Vec<TreatmentEffectRow>,
    pub profiles: Vec<ActionProfile>,
    pub aggressiveness: Vec<AggressivenessSummary>,
    pub consistency: ConsistencyTable,
    pub human_consistency: Option<ConsistencyTable>,
    pub projection: LdaProjection,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex::encode(hasher.finalize())
}

fn counts(records: &[GameRecord]) -> GameCounts {
    let completed = records.iter().filter(|r| r.is_completed()).count();
    GameCounts { total: records.len(), completed, failed: records.len() - completed }
}

fn vectors_of(records: &[GameRecord]) -> Vec<[f64; crate::catalog::TOTAL_ACTIONS]> {
    records.iter().filter_map(|r| r.response()).map(|v| v.as_f64()).collect()
}

/// Runs the whole analysis pipeline over one model-game record set and an
/// optional human-game record set.
pub fn analyze(
    records: &[GameRecord],
    human: Option<&[GameRecord]>,
    options: AnalysisOptions,
    input_hashes: BTreeMap<String, String>,
) -> Result<ReportBundle, ReportError> {
    let model_games = counts(records);
    if model_games.completed == 0 {
        return Err(ReportError::NoCompletedGames);
    }
    let AnalysisOptions { resamples, seed } = options;

    let mut profiles = vec![action_profile(records, "all", resamples, seed, |_| true)];
    for (label, filter) in [
        ("accuracy-low", Box::new(|t: &crate::response::Treatment| t.ai_accuracy == AiAccuracy::Low)
            as Box<dyn Fn(&crate::response::Treatment) -> bool>),
        ("accuracy-high", Box::new(|t| t.ai_accuracy == AiAccuracy::High)),
        ("training-basic", Box::new(|t| t.crew_training == CrewTraining::Basic)),
        ("training-extensive", Box::new(|t| t.crew_training == CrewTraining::Extensive)),
        ("posture-revisionist", Box::new(|t| t.china_posture == ChinaPosture::Revisionist)),
        ("posture-statusquo", Box::new(|t| t.china_posture == ChinaPosture::StatusQuo)),
    ] {
        profiles.push(action_profile(records, label, resamples, seed, filter));
    }

    let aggressiveness = vec![
        aggressiveness_summary(records, "model", GameMove::Move1, resamples, seed),
        aggressiveness_summary(records, "model", GameMove::Move2, resamples, seed),
    ];

    let mut classes = vec![LdaInput { label: "model".to_string(), vectors: vectors_of(records) }];
    if let Some(h) = human {
        let hv = vectors_of(h);
        if !hv.is_empty() {
            classes.push(LdaInput { label: "human".to_string(), vectors: hv });
        }
    }
    let other_counts: Vec<usize> = classes.iter().map(|c| c.vectors.len()).collect();
    classes.push(random_baseline(&other_counts, seed ^ 0x72616e64));
    let projection = lda_projection(&classes)?;

    Ok(ReportBundle {
        schema: REPORT_SCHEMA.to_string(),
        actions_schema: ACTIONS_SCHEMA.to_string(),
        record_schema: RECORD_SCHEMA.to_string(),
        options,
        input_hashes,
        human_games: human.map(counts),
        effects: treatment_effect_table(records, resamples, seed),
        profiles,
        aggressiveness,
        consistency: consistency_table(records, resamples, seed),
        human_consistency: human.map(|h| consistency_table(h, resamples, seed)),
        projection,
        model_games,
    })
}

/// Human-readable digest of a report for terminal output.
pub fn summarize(report: &ReportBundle) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "games: {} completed, {} failed\n",
        report.model_games.completed, report.model_games.failed
    ));
    for row in &report.effects {
        let verdict = if row.has_effect { "Effect" } else { "No Effect" };
        let detail = if row.significant_actions.is_empty() {
            String::new()
        } else {
            let labels: Vec<&str> = row
                .significant_actions
                .iter()
                .map(|&i| row.effects[i].action_label.as_str())
                .collect();
            format!(" ({})", labels.join("; "))
        };
        out.push_str(&format!("{}: {verdict}{detail}\n", row.factor.name()));
    }
    let fmt_p = |p: &Option<crate::stats::bootstrap::BootstrapCi>| match p {
        Some(ci) => ci.format_offsets(),
        None => "n/a".to_string(),
    };
    out.push_str(&format!(
        "p(agg m2 | agg m1) = {}   p(agg m2 | de-esc m1) = {}   (neutral m1 excluded: {})\n",
        fmt_p(&report.consistency.p_agg2_given_agg1),
        fmt_p(&report.consistency.p_agg2_given_des1),
        report.consistency.excluded_neutral,
    ));
    for class in &report.projection.classes {
        out.push_str(&format!(
            "lda class {:12} n={:<4} mean=({:+.2}, {:+.2})\n",
            class.label,
            class.points.len(),
            class.mean[0],
            class.mean[1]
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{generate_records, GeneratorSpec};

    fn options() -> AnalysisOptions {
        AnalysisOptions { resamples: 200, seed: 3 }
    }

    #[test]
    fn full_report_on_generated_records() {
        let records =
            generate_records(&GeneratorSpec { teams: 6, seed: 1, ..GeneratorSpec::model_pattern() });
        let human =
            generate_records(&GeneratorSpec { teams: 4, seed: 2, ..GeneratorSpec::human_pattern() });
        let report = analyze(&records, Some(&human), options(), BTreeMap::new()).unwrap();
        assert_eq!(report.model_games.total, 48);
        assert_eq!(report.effects.len(), 3);
        assert_eq!(report.profiles.len(), 7);
        // model + human + random classes.
        assert_eq!(report.projection.classes.len(), 3);
        let random = report.projection.classes.iter().find(|c| c.label == "random").unwrap();
        // Rounded mean of 48 and 32.
        assert_eq!(random.points.len(), 40);
        let text = summarize(&report);
        assert!(text.contains("lda class"));
        assert!(text.contains("p(agg m2 | agg m1)"));
    }

    #[test]
    fn report_is_deterministic_and_serializable() {
        let records =
            generate_records(&GeneratorSpec { teams: 4, seed: 4, ..GeneratorSpec::moderate() });
        let a = analyze(&records, None, options(), BTreeMap::new()).unwrap();
        let b = analyze(&records, None, options(), BTreeMap::new()).unwrap();
        let ja = serde_json::to_string(&a).unwrap();
        assert_eq!(ja, serde_json::to_string(&b).unwrap());
        let back: ReportBundle = serde_json::from_str(&ja).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), ja);
    }

    #[test]
    fn no_completed_games_is_an_error() {
        let err = analyze(&[], None, options(), BTreeMap::new()).unwrap_err();
        assert!(matches!(err, ReportError::NoCompletedGames));
    }
}
