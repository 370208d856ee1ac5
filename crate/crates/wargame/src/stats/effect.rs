//! Total causal effects of the three treatment factors on action selection.
//!
//! The effect of a factor on an action is the difference in per-game
//! selection probability between its two levels, pooling over the other two
//! factors (each level pairs with the same 4 combinations, so the contrast
//! is balanced by design). Uncertainty comes from an independent-group
//! bootstrap; an effect is significant when its 95% interval strictly
//! excludes zero.

use crate::catalog::{catalog, GameMove, TOTAL_ACTIONS};
use crate::response::{AiAccuracy, ChinaPosture, CrewTraining, Treatment};
use crate::session::GameRecord;
use crate::stats::bootstrap::{bootstrap_mean_diff, BootstrapCi};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// The three manipulated factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Factor {
    AiAccuracy,
    CrewTraining,
    ChinaPosture,
}

impl Factor {
    pub const ALL: [Factor; 3] = [Factor::AiAccuracy, Factor::CrewTraining, Factor::ChinaPosture];

    /// Is this treatment at the factor's "high" (second-listed) level?
    /// High/Extensive/StatusQuo are the high levels by convention.
    pub fn is_high(self, t: &Treatment) -> bool {
        match self {
            Factor::AiAccuracy => t.ai_accuracy == AiAccuracy::High,
            Factor::CrewTraining => t.crew_training == CrewTraining::Extensive,
            Factor::ChinaPosture => t.china_posture == ChinaPosture::StatusQuo,
        }
    }

    /// The move whose options this factor can plausibly shift: the accuracy
    /// and training inserts appear in the move-one briefing; the posture
    /// insert appears in the move-two briefing.
    pub fn relevant_move(self) -> GameMove {
        match self {
            Factor::AiAccuracy | Factor::CrewTraining => GameMove::Move1,
            Factor::ChinaPosture => GameMove::Move2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Factor::AiAccuracy => "ai_accuracy",
            Factor::CrewTraining => "crew_training",
            Factor::ChinaPosture => "china_posture",
        }
    }
}

/// Effect of one factor on one action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionEffect {
    pub action_index: usize,
    pub action_label: String,
    pub factor: Factor,
    pub high_mean: f64,
    pub low_mean: f64,
    pub effect: BootstrapCi,
    pub significant: bool,
}

/// Per-level selection probability of one action: the mean of its bit over
/// completed games in the group.
pub fn selection_probability(records: &[&GameRecord], action_index: usize) -> f64 {
    assert!(!records.is_empty(), "probability over an empty group");
    let sum: f64 = records
        .iter()
        .map(|r| r.response().expect("completed record").as_f64()[action_index])
        .sum();
    sum / records.len() as f64
}

/// Completed records only; failed games carry no response vector.
pub fn completed<'a>(records: &'a [GameRecord]) -> Vec<&'a GameRecord> {
    records.iter().filter(|r| r.is_completed()).collect()
}

fn effect_seed(seed: u64, factor: Factor, action_index: usize) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(factor.name().as_bytes());
    hasher.update((action_index as u64).to_le_bytes());
    u64::from_le_bytes(hasher.finalize()[..8].try_into().unwrap())
}

/// Total causal effect of `factor` on `action_index`.
pub fn total_effect(
    records: &[GameRecord],
    factor: Factor,
    action_index: usize,
    resamples: u32,
    seed: u64,
) -> ActionEffect {
    let completed = completed(records);
    let bit = |r: &&GameRecord| r.response().expect("completed").as_f64()[action_index];
    let high: Vec<f64> =
        completed.iter().filter(|r| factor.is_high(&r.treatment)).map(bit).collect();
    let low: Vec<f64> =
        completed.iter().filter(|r| !factor.is_high(&r.treatment)).map(bit).collect();
    assert!(!high.is_empty() && !low.is_empty(), "factor group is empty");
    let effect =
        bootstrap_mean_diff(&high, &low, resamples, effect_seed(seed, factor, action_index));
    let action = catalog().action(action_index);
    ActionEffect {
        action_index,
        action_label: format!("{} {}", action.label(), action.title),
        factor,
        high_mean: high.iter().sum::<f64>() / high.len() as f64,
        low_mean: low.iter().sum::<f64>() / low.len() as f64,
        significant: effect.excludes_zero(),
        effect,
    }
}

/// All 21 action effects for one factor.
pub fn factor_effects(
    records: &[GameRecord],
    factor: Factor,
    resamples: u32,
    seed: u64,
) -> Vec<ActionEffect> {
    (0..TOTAL_ACTIONS).map(|i| total_effect(records, factor, i, resamples, seed)).collect()
}

/// One row of the headline effect table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreatmentEffectRow {
    pub factor: Factor,
    pub relevant_move: GameMove,
    /// Indices of relevant-move actions whose effect is significant.
    pub significant_actions: Vec<usize>,
    /// "Effect" iff any relevant action is significant.
    pub has_effect: bool,
    pub effects: Vec<ActionEffect>,
}

/// The headline table: one verdict per factor, judged on the actions of the
/// move the factor's briefing insert belongs to.
pub fn treatment_effect_table(
    records: &[GameRecord],
    resamples: u32,
    seed: u64,
) -> Vec<TreatmentEffectRow> {
    Factor::ALL
        .iter()
        .map(|&factor| {
            let effects = factor_effects(records, factor, resamples, seed);
            let mv = factor.relevant_move();
            let significant_actions: Vec<usize> = mv
                .index_range()
                .filter(|&i| effects[i].significant)
                .collect();
            TreatmentEffectRow {
                factor,
                relevant_move: mv,
                has_effect: !significant_actions.is_empty(),
                significant_actions,
                effects,
            }
        })
        .collect()
}
