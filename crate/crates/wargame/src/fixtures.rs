//! Synthetic record generators for testing the statistics pipeline.
//!
//! The generator samples each action bit independently per game from a
//! per-action base rate, optionally shifted by injected treatment effects
//! (the shift is ±delta/2 at the factor's high/low level, so the injected
//! total effect equals `delta` exactly). It can also couple move-two stance
//! to move-one stance to give the consistency analysis structure to find.

use crate::catalog::{GameMove, Stance, TOTAL_ACTIONS};
use crate::experiment::{game_key, game_seed};
use crate::parse::Confidence;
use crate::profile::{sample_team, SamplingMode};
use crate::response::{MoveStanceLabel, ResponseVector, Treatment};
use crate::scenario::PromptVariant;
use crate::session::{GameOutcome, GameRecord, RECORD_SCHEMA};
use crate::stats::effect::Factor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One injected treatment effect: the factor's high level raises the
/// action's selection probability by `delta` relative to the low level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectSpec {
    pub action_index: usize,
    pub factor: Factor,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub base_rates: [f64; TOTAL_ACTIONS],
    pub effects: Vec<EffectSpec>,
    /// Shift applied to move-two action probabilities toward the move-one
    /// stance: aggressive move-one raises aggressive move-two actions (and
    /// lowers de-escalatory ones) by this much, and vice versa.
    pub stance_coupling: f64,
    pub teams: u32,
    pub seed: u64,
}

impl GeneratorSpec {
    /// Mid-range base rates, no effects: a null dataset with plenty of
    /// variation.
    pub fn moderate() -> Self {
        let mut base_rates = [0.0; TOTAL_ACTIONS];
        for (i, r) in base_rates.iter_mut().enumerate() {
            *r = 0.25 + 0.05 * ((i % 5) as f64); // 0.25..0.45, varied
        }
        GeneratorSpec {
            base_rates,
            effects: Vec::new(),
            stance_coupling: 0.0,
            teams: 10,
            seed: 0,
        }
    }

    /// Sparse, extreme marginals imitating the human pattern: a
    /// near-universal restrained move one and a diplomacy-heavy move two,
    /// with no treatment effects. Move-one rates are deliberately pinned to
    /// 0.01/0.99 — human play was close to unanimous there, and the extreme
    /// rates keep null bootstrap tests on move-one actions conservative.
    pub fn human_pattern() -> Self {
        let mut base_rates = [0.01; TOTAL_ACTIONS];
        base_rates[1] = 0.99; // (b) hold fire unless fired upon
        base_rates[2] = 0.99; // (c) hold fire without presidential approval
        // Move two: diplomacy-led with routine intelligence collection.
        base_rates[13] = 0.90; // (d) Diplomacy
        base_rates[15] = 0.45; // (f) Economic Incentives
        base_rates[17] = 0.40; // (h) Information Operations
        base_rates[18] = 0.55; // (i) Conduct Foreign Intelligence
        GeneratorSpec {
            base_rates,
            effects: Vec::new(),
            stance_coupling: 0.0,
            teams: 10,
            seed: 0,
        }
    }

    /// A model-like pattern: broader selections, mildly aggressive, with a
    /// move-one/move-two stance coupling.
    pub fn model_pattern() -> Self {
        let mut spec = Self::moderate();
        spec.base_rates[0] = 0.30; // (a) fire at vessels
        spec.base_rates[1] = 0.70; // (b) hold fire unless fired upon
        spec.base_rates[4] = 0.70; // (e) AI targets / human fires
        spec.base_rates[7] = 0.55; // move two (a) Military Action
        spec.base_rates[13] = 0.75; // move two (d) Diplomacy
        spec.stance_coupling = 0.15;
        spec
    }
}

fn effect_shift(spec: &GeneratorSpec, treatment: &Treatment, action_index: usize) -> f64 {
    spec.effects
        .iter()
        .filter(|e| e.action_index == action_index)
        .map(|e| if e.factor.is_high(treatment) { e.delta / 2.0 } else { -e.delta / 2.0 })
        .sum()
}

/// Generates one completed-game response under the spec.
pub fn generate_response(
    spec: &GeneratorSpec,
    treatment: &Treatment,
    rng: &mut ChaCha8Rng,
) -> ResponseVector {
    let mut v = ResponseVector::new();
    for i in GameMove::Move1.index_range() {
        let p = (spec.base_rates[i] + effect_shift(spec, treatment, i)).clamp(0.0, 1.0);
        v.set_bit(i, rng.gen_bool(p));
    }
    let stance_sign = match v.move_stance_label(GameMove::Move1) {
        MoveStanceLabel::Aggressive => 1.0,
        MoveStanceLabel::DeEscalatory => -1.0,
        MoveStanceLabel::Neutral => 0.0,
    };
    let cat = crate::catalog::catalog();
    for i in GameMove::Move2.index_range() {
        let coupling = match cat.action(i).stance {
            Stance::Aggressive => spec.stance_coupling * stance_sign,
            Stance::DeEscalatory => -spec.stance_coupling * stance_sign,
        };
        let p = (spec.base_rates[i] + effect_shift(spec, treatment, i) + coupling).clamp(0.0, 1.0);
        v.set_bit(i, rng.gen_bool(p));
    }
    v.end_state1 = "Deterrence restored without escalation.".to_string();
    v.course_plan2 = "Hold the line militarily while pressing a diplomatic settlement.".to_string();
    v.end_state2 = "A negotiated return to the status quo ante.".to_string();
    v
}

/// Generates a full factorial of completed records (teams × 8 treatments).
pub fn generate_records(spec: &GeneratorSpec) -> Vec<GameRecord> {
    let mut records = Vec::with_capacity(spec.teams as usize * 8);
    for team_index in 0..spec.teams {
        let mut team_rng = ChaCha8Rng::seed_from_u64(
            game_seed(spec.seed, team_index, &Treatment::all()[0]) ^ 0x7465616d, // "team"
        );
        let team = sample_team(SamplingMode::UniformRandom, None, &mut team_rng)
            .expect("uniform sampling cannot fail");
        for treatment in Treatment::all() {
            let seed = game_seed(spec.seed, team_index, &treatment);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let response = generate_response(spec, &treatment, &mut rng);
            records.push(GameRecord {
                schema: RECORD_SCHEMA.to_string(),
                game_key: game_key(team_index, &treatment),
                team_index,
                treatment,
                seed,
                team: team.clone(),
                variant: PromptVariant::default(),
                backend: "fixture:generator".to_string(),
                started_at: "1970-01-01T00:00:00+00:00".to_string(),
                finished_at: "1970-01-01T00:00:00+00:00".to_string(),
                outcome: GameOutcome::Completed {
                    response,
                    move1_confidence: Confidence::ExactLetters,
                    move2_confidence: Confidence::ExactLetters,
                    reelicits: 0,
                    diagnostics: Vec::new(),
                },
            });
        }
    }
    records
}
