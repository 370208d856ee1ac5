//! Per-action selection profiles and aggressiveness summaries with
//! bootstrap confidence intervals.

use crate::catalog::{catalog, GameMove, TOTAL_ACTIONS};
use crate::response::Treatment;
use crate::session::GameRecord;
use crate::stats::bootstrap::{bootstrap_mean, BootstrapCi};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Selection probability of one action over a group of games.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionPoint {
    pub action_index: usize,
    pub action_label: String,
    pub probability: BootstrapCi,
}

/// A labeled profile: all 21 action probabilities for one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionProfile {
    pub label: String,
    pub games: usize,
    pub points: Vec<ActionPoint>,
}

fn sub_seed(seed: u64, label: &str, action_index: usize) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.update((action_index as u64).to_le_bytes());
    u64::from_le_bytes(hasher.finalize()[..8].try_into().unwrap())
}

/// Profile over the completed games matching `filter`.
pub fn action_profile(
    records: &[GameRecord],
    label: &str,
    resamples: u32,
    seed: u64,
    filter: impl Fn(&Treatment) -> bool,
) -> ActionProfile {
    let group: Vec<&GameRecord> =
        records.iter().filter(|r| r.is_completed() && filter(&r.treatment)).collect();
    assert!(!group.is_empty(), "empty profile group {label:?}");
    let cat = catalog();
    let points = (0..TOTAL_ACTIONS)
        .map(|i| {
            let bits: Vec<f64> =
                group.iter().map(|r| r.response().expect("completed").as_f64()[i]).collect();
            let a = cat.action(i);
            ActionPoint {
                action_index: i,
                action_label: format!("{} {}", a.label(), a.title),
                probability: bootstrap_mean(&bits, resamples, sub_seed(seed, label, i)),
            }
        })
        .collect();
    ActionProfile { label: label.to_string(), games: group.len(), points }
}

/// Mean aggressiveness index of one move over a group, with CI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggressivenessSummary {
    pub label: String,
    pub game_move: GameMove,
    pub games: usize,
    pub mean_index: BootstrapCi,
}

pub fn aggressiveness_summary(
    records: &[GameRecord],
    label: &str,
    game_move: GameMove,
    resamples: u32,
    seed: u64,
) -> AggressivenessSummary {
    let values: Vec<f64> = records
        .iter()
        .filter_map(|r| r.response())
        .map(|v| v.aggressiveness_index(game_move))
        .collect();
    assert!(!values.is_empty(), "empty aggressiveness group {label:?}");
    AggressivenessSummary {
        label: label.to_string(),
        game_move,
        games: values.len(),
        mean_index: bootstrap_mean(&values, resamples, sub_seed(seed, label, 1000 + game_move as usize)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{generate_records, GeneratorSpec};

    #[test]
    fn profile_matches_direct_frequency_count() {
        let spec = GeneratorSpec { teams: 8, seed: 2, ..GeneratorSpec::moderate() };
        let records = generate_records(&spec);
        let profile = action_profile(&records, "all", 100, 1, |_| true);
        assert_eq!(profile.games, records.len());
        for (i, p) in profile.points.iter().enumerate() {
            let oracle = records
                .iter()
                .filter(|r| r.response().unwrap().bit(i))
                .count() as f64
                / records.len() as f64;
            assert!((p.probability.estimate - oracle).abs() < 1e-12);
            assert!(p.probability.ci_low <= oracle && oracle <= p.probability.ci_high);
        }
    }

    #[test]
    fn filter_restricts_the_group() {
        let spec = GeneratorSpec { teams: 4, seed: 3, ..GeneratorSpec::moderate() };
        let records = generate_records(&spec);
        let low = action_profile(&records, "low", 50, 1, |t| {
            t.ai_accuracy == crate::response::AiAccuracy::Low
        });
        assert_eq!(low.games, records.len() / 2);
    }

    #[test]
    fn human_pattern_reads_as_deescalatory() {
        let spec = GeneratorSpec { teams: 12, seed: 5, ..GeneratorSpec::human_pattern() };
        let records = generate_records(&spec);
        let s = aggressiveness_summary(&records, "human", GameMove::Move1, 300, 2);
        assert!(s.mean_index.estimate < -0.2, "index {}", s.mean_index.estimate);
        assert!(s.mean_index.ci_high < 0.0);
    }
}
