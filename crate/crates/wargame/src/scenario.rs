//! Assembly of every textual artifact sent to players.
//!
//! The scenario text lives in versioned data files (`data/scenario-v1/`),
//! one named block per file with a small front matter header. Blocks are
//! embedded at compile time and pinned by checksum fixtures so variants
//! cannot drift silently.

use crate::catalog::GameMove;
use crate::profile::{PersonaOverride, ProfileError, TeamComposition};
use crate::response::{AiAccuracy, ChinaPosture, CrewTraining, Treatment};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub const SCENARIO_VERSION: &str = "scenario-v1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("malformed scenario block: {0}")]
    MalformedBlock(String),
    #[error("unknown scenario block id {0:?}")]
    UnknownBlock(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("dialog chunk {index} out of range: variant has {chunks} chunks")]
    ChunkOutOfRange { index: u32, chunks: u32 },
}

/// One named scenario text block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioBlock {
    pub id: String,
    pub version: String,
    pub body: String,
}

/// Parses a block file: `---` front matter with `id:` and `version:` keys,
/// then the body.
pub fn parse_block(content: &str) -> Result<ScenarioBlock, ScenarioError> {
    let rest = content
        .strip_prefix("---\n")
        .ok_or_else(|| ScenarioError::MalformedBlock("missing front matter".to_string()))?;
    let (header, body) = rest
        .split_once("---\n")
        .ok_or_else(|| ScenarioError::MalformedBlock("unterminated front matter".to_string()))?;
    let mut id = None;
    let mut version = None;
    for line in header.lines() {
        if let Some(v) = line.strip_prefix("id:") {
            id = Some(v.trim().to_string());
        } else if let Some(v) = line.strip_prefix("version:") {
            version = Some(v.trim().to_string());
        }
    }
    Ok(ScenarioBlock {
        id: id.ok_or_else(|| ScenarioError::MalformedBlock("missing id".to_string()))?,
        version: version
            .ok_or_else(|| ScenarioError::MalformedBlock("missing version".to_string()))?,
        body: body.trim_end_matches('\n').to_string(),
    })
}

macro_rules! scenario_files {
    ($($name:literal),+ $(,)?) => {
        &[$(($name, include_str!(concat!("../data/scenario-v1/", $name, ".md")))),+]
    };
}

/// `(file stem, raw content)` for every block of the built-in scenario.
pub const RAW_BLOCKS: &[(&str, &str)] = scenario_files![
    "llm-instructions",
    "introduction",
    "incident",
    "roles",
    "forces",
    "new-technology",
    "priorities",
    "recommendation-scope",
    "accuracy-low",
    "accuracy-high",
    "training-basic",
    "training-extensive",
    "move1-question",
    "move2-transition",
    "move2-confirm",
    "move2-global-response",
    "posture-revisionist",
    "posture-statusquo",
    "move2-question",
    "dialog-instruction",
    "dialog-continue",
    "direct-answer",
    "elicit-end-state-1",
    "elicit-orders-1",
    "elicit-course-2",
    "elicit-actions-2",
    "elicit-end-state-2",
    "roleplay-emphasis",
    "disagreement-emphasis",
    "format-reminder",
];

/// The full set of ordered, named scenario text blocks.
#[derive(Debug, Clone)]
pub struct ScenarioScript {
    blocks: BTreeMap<String, ScenarioBlock>,
}

impl ScenarioScript {
    /// Loads the built-in `scenario-v1` script.
    pub fn builtin() -> ScenarioScript {
        let mut blocks = BTreeMap::new();
        for (stem, raw) in RAW_BLOCKS {
            let block = parse_block(raw).unwrap_or_else(|e| panic!("block {stem}: {e}"));
            assert_eq!(block.id, *stem, "block id must match file stem");
            assert_eq!(block.version, SCENARIO_VERSION);
            blocks.insert(block.id.clone(), block);
        }
        ScenarioScript { blocks }
    }

    pub fn block(&self, id: &str) -> Result<&str, ScenarioError> {
        self.blocks
            .get(id)
            .map(|b| b.body.as_str())
            .ok_or_else(|| ScenarioError::UnknownBlock(id.to_string()))
    }

    pub fn blocks(&self) -> impl Iterator<Item = &ScenarioBlock> {
        self.blocks.values()
    }

    fn join(&self, ids: &[&str]) -> String {
        ids.iter()
            .map(|id| self.block(id).expect("known block"))
            .collect::<Vec<_>>()
            .join("\n\n")
    }
}

/// Flags controlling the experiment prompt variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptVariant {
    /// Include the three presidential priorities in the briefing.
    pub include_priorities: bool,
    pub roleplay_emphasis: bool,
    pub disagreement_emphasis: bool,
    pub persona_override: PersonaOverride,
    /// Number of simulated dialog chunks per move; 0 means direct-answer mode.
    pub dialog_chunks: u32,
    /// Word budget per dialog chunk.
    pub chunk_words: u32,
}

impl Default for PromptVariant {
    fn default() -> Self {
        PromptVariant {
            include_priorities: true,
            roleplay_emphasis: false,
            disagreement_emphasis: false,
            persona_override: PersonaOverride::None,
            dialog_chunks: 3,
            chunk_words: 350,
        }
    }
}

/// Instruction text plus one background paragraph per player.
pub fn build_system_prompt(
    script: &ScenarioScript,
    team: &TeamComposition,
    variant: &PromptVariant,
) -> Result<String, ScenarioError> {
    team.validate()?;
    let mut parts = vec![script.block("llm-instructions")?.to_string()];
    if variant.roleplay_emphasis {
        parts.push(script.block("roleplay-emphasis")?.to_string());
    }
    if variant.disagreement_emphasis {
        parts.push(script.block("disagreement-emphasis")?.to_string());
    }
    parts.push("The team consists of the following players:".to_string());
    let trait_override = variant.persona_override.trait_phrase();
    for (i, player) in team.players.iter().enumerate() {
        parts.push(player.describe(i + 1, trait_override));
    }
    Ok(parts.join("\n\n"))
}

/// Full move-one briefing: scenario, treatment inserts, and the 7-option
/// question. The priorities block appears iff the variant includes it.
pub fn build_move1_prompt(
    script: &ScenarioScript,
    treatment: &Treatment,
    variant: &PromptVariant,
) -> String {
    let mut ids = vec!["introduction", "incident", "roles", "forces", "new-technology"];
    if variant.include_priorities {
        ids.push("priorities");
    }
    ids.push("recommendation-scope");
    ids.push(match treatment.ai_accuracy {
        AiAccuracy::Low => "accuracy-low",
        AiAccuracy::High => "accuracy-high",
    });
    ids.push(match treatment.crew_training {
        CrewTraining::Basic => "training-basic",
        CrewTraining::Extensive => "training-extensive",
    });
    ids.push("move1-question");
    script.join(&ids)
}

/// Move-two scenario brief for one China posture, ending with the 14-option
/// question. Never a function of move-one answers.
pub fn build_move2_prompt(script: &ScenarioScript, posture: ChinaPosture) -> String {
    let posture_block = match posture {
        ChinaPosture::Revisionist => "posture-revisionist",
        ChinaPosture::StatusQuo => "posture-statusquo",
    };
    script.join(&["move2-global-response", posture_block, "move2-question"])
}

/// Transition text plus readiness handshake issued before the move-two brief.
pub fn build_move2_transition(script: &ScenarioScript) -> String {
    script.join(&["move2-transition", "move2-confirm"])
}

/// Dialog-simulation instruction for one chunk. Chunk 0 quotes the move's
/// questions; later chunks only request continuation.
pub fn build_dialog_instruction(
    script: &ScenarioScript,
    game_move: GameMove,
    chunk_index: u32,
    variant: &PromptVariant,
) -> Result<String, ScenarioError> {
    if chunk_index >= variant.dialog_chunks {
        return Err(ScenarioError::ChunkOutOfRange {
            index: chunk_index,
            chunks: variant.dialog_chunks,
        });
    }
    if chunk_index == 0 {
        let question = match game_move {
            GameMove::Move1 => "move1-question",
            GameMove::Move2 => "move2-question",
        };
        Ok(script.join(&["dialog-instruction", question]))
    } else {
        Ok(script.block("dialog-continue")?.to_string())
    }
}

/// Final-selection elicitation in enumerated-letter form. In direct-answer
/// mode (no dialog chunks) it is prefixed with the direct-answer instruction.
pub fn build_answer_elicitation(
    script: &ScenarioScript,
    game_move: GameMove,
    variant: &PromptVariant,
) -> String {
    let elicit = match game_move {
        GameMove::Move1 => "elicit-orders-1",
        GameMove::Move2 => "elicit-actions-2",
    };
    if variant.dialog_chunks == 0 {
        script.join(&["direct-answer", elicit])
    } else {
        script.block(elicit).expect("known block").to_string()
    }
}

/// End-state (and, for move two, course-of-action) elicitation texts.
pub fn build_text_elicitation(
    script: &ScenarioScript,
    game_move: GameMove,
    kind: TextAnswerKind,
) -> String {
    let id = match (game_move, kind) {
        (GameMove::Move1, TextAnswerKind::EndState) => "elicit-end-state-1",
        (GameMove::Move2, TextAnswerKind::EndState) => "elicit-end-state-2",
        (_, TextAnswerKind::CoursePlan) => "elicit-course-2",
    };
    script.block(id).expect("known block").to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextAnswerKind {
    EndState,
    CoursePlan,
}

/// Stricter format reminder used when re-eliciting after a parse failure.
pub fn build_format_reminder(script: &ScenarioScript) -> String {
    script.block("format-reminder").expect("known block").to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{sample_team, PlayerProfile, SamplingMode, PACIFIST_TRAIT};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn team() -> TeamComposition {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        sample_team(SamplingMode::UniformRandom, None, &mut rng).unwrap()
    }

    fn variant() -> PromptVariant {
        PromptVariant::default()
    }

    #[test]
    fn builtin_script_loads_all_blocks() {
        let script = ScenarioScript::builtin();
        assert_eq!(script.blocks().count(), RAW_BLOCKS.len());
        for block in script.blocks() {
            assert!(!block.body.is_empty(), "{} empty", block.id);
            assert_eq!(block.version, SCENARIO_VERSION);
        }
    }

    #[test]
    fn system_prompt_contains_all_players() {
        let script = ScenarioScript::builtin();
        let text = build_system_prompt(&script, &team(), &variant()).unwrap();
        for i in 1..=6 {
            assert!(text.contains(&format!("Player {i}:")));
        }
        assert!(text.contains("You will help simulate a wargame"));
    }

    #[test]
    fn persona_override_rewrites_every_description() {
        let script = ScenarioScript::builtin();
        let mut v = variant();
        v.persona_override = PersonaOverride::StrictPacifists;
        let text = build_system_prompt(&script, &team(), &v).unwrap();
        assert_eq!(text.matches(PACIFIST_TRAIT).count(), 6);
    }

    #[test]
    fn wrong_team_size_rejected() {
        let script = ScenarioScript::builtin();
        let mut t = team();
        t.players.pop();
        let err = build_system_prompt(&script, &t, &variant()).unwrap_err();
        assert_eq!(err, ScenarioError::Profile(ProfileError::WrongTeamSize(5)));
    }

    #[test]
    fn malformed_profile_rejected_with_field_name() {
        let script = ScenarioScript::builtin();
        let mut t = team();
        t.players[2] = PlayerProfile {
            age: 40,
            gender: String::new(),
            education: "doctorate".to_string(),
            expertise: "military".to_string(),
            free_traits: None,
        };
        let err = build_system_prompt(&script, &t, &variant()).unwrap_err();
        assert_eq!(err, ScenarioError::Profile(ProfileError::InvalidField("gender")));
    }

    #[test]
    fn move1_prompt_treatment_inserts() {
        let script = ScenarioScript::builtin();
        let mut t = Treatment::all()[0];
        t.ai_accuracy = AiAccuracy::High;
        t.crew_training = CrewTraining::Basic;
        let text = build_move1_prompt(&script, &t, &variant());
        assert!(text.contains("95-99%"));
        assert!(!text.contains("70-85%"));
        assert!(text.contains("baseline/computer-based training"));
        assert!(text.trim_end().ends_with("(g) Hold fire at all costs"));

        t.ai_accuracy = AiAccuracy::Low;
        t.crew_training = CrewTraining::Extensive;
        let text = build_move1_prompt(&script, &t, &variant());
        assert!(text.contains("70-85%"));
        assert!(text.contains("Crew is well-trained on the system"));
    }

    #[test]
    fn priorities_toggle_confined_to_priorities_block() {
        let script = ScenarioScript::builtin();
        let t = Treatment::all()[0];
        let with = build_move1_prompt(&script, &t, &variant());
        let mut v = variant();
        v.include_priorities = false;
        let without = build_move1_prompt(&script, &t, &v);
        assert!(with.contains("Protect the lives of U.S. service members"));
        assert!(!without.contains("Protect the lives of U.S. service members"));
        // The diff is exactly the priorities block plus its separator.
        let block = script.block("priorities").unwrap();
        let expected_with = without.replace(
            "* Your recommendation to the President",
            &format!("{block}\n\n* Your recommendation to the President"),
        );
        assert_eq!(with, expected_with);
    }

    #[test]
    fn move2_prompt_posture_blocks() {
        let script = ScenarioScript::builtin();
        let rev = build_move2_prompt(&script, ChinaPosture::Revisionist);
        assert!(rev.contains("the time is ripe to reunite the motherland"));
        let sq = build_move2_prompt(&script, ChinaPosture::StatusQuo);
        assert!(sq.contains("call for calm within the region"));
        for text in [&rev, &sq] {
            assert!(text.trim_end().ends_with("(3) Describe Your Desired End State:"));
        }
    }

    #[test]
    fn treatment_injectivity() {
        let script = ScenarioScript::builtin();
        let v = variant();
        let pairs: std::collections::HashSet<_> = Treatment::all()
            .iter()
            .map(|t| {
                (build_move1_prompt(&script, t, &v), build_move2_prompt(&script, t.china_posture))
            })
            .collect();
        assert_eq!(pairs.len(), 8);
    }

    #[test]
    fn prompt_idempotence() {
        let script = ScenarioScript::builtin();
        let t = team();
        let v = variant();
        let tr = Treatment::all()[3];
        assert_eq!(
            build_system_prompt(&script, &t, &v).unwrap(),
            build_system_prompt(&script, &t, &v).unwrap()
        );
        assert_eq!(build_move1_prompt(&script, &tr, &v), build_move1_prompt(&script, &tr, &v));
    }

    #[test]
    fn dialog_instruction_chunks() {
        let script = ScenarioScript::builtin();
        let v = variant();
        let first = build_dialog_instruction(&script, GameMove::Move1, 0, &v).unwrap();
        assert!(first.contains("Simulate a conversation/dialogue"));
        assert!(first.contains("(g) Hold fire at all costs"));
        let later = build_dialog_instruction(&script, GameMove::Move1, 2, &v).unwrap();
        assert!(later.contains("Continue the conversation"));
        assert!(!later.contains("(g) Hold fire at all costs"));
        assert!(matches!(
            build_dialog_instruction(&script, GameMove::Move1, 3, &v),
            Err(ScenarioError::ChunkOutOfRange { .. })
        ));
    }

    #[test]
    fn elicitation_texts() {
        let script = ScenarioScript::builtin();
        let v = variant();
        let m1 = build_answer_elicitation(&script, GameMove::Move1, &v);
        assert!(m1.contains("(a) Fire at Chinese vessels"));
        assert!(m1.contains("(g) Hold fire at all costs"));
        assert!(!m1.contains("Do not simulate"));
        let m2 = build_answer_elicitation(&script, GameMove::Move2, &v);
        assert!(m2.contains("(k) Cyber Operations"));
        let mut direct = v;
        direct.dialog_chunks = 0;
        let m1d = build_answer_elicitation(&script, GameMove::Move1, &direct);
        assert!(m1d.starts_with("Directly state the response"));
    }

    #[test]
    fn block_bodies_are_pinned_by_checksum() {
        // scenario-v1 is frozen: any edit to a block body must bump the
        // scenario version rather than silently change prompts under an
        // existing version tag.
        use sha2::{Digest, Sha256};
        let pinned: &[(&str, &str)] = &[
            ("accuracy-high", "74e8d9ae2f746cfaee25cb4caf2a2c10d189db6d25c792352fa02c78f29eca7a"),
            ("accuracy-low", "61875e38883e9666542a8650179d4a78249a6809483d17edc824ee76b7ddc73d"),
            ("dialog-continue", "ebbcb3d715ee7a044382b33c4691423a66f7abc614a178fdcb12a7d3aeb5ec17"),
            ("dialog-instruction", "2a3cfa8e27c97b8a46130c043f1a8210508245cf69cc2c63b1578ef5091aa87f"),
            ("direct-answer", "8b2ac8aebbaf9df874d47b65667a29334e175633c540d20d4f06cab9efcb31b1"),
            (
                "disagreement-emphasis",
                "5bd908be3c09ce6d3b60f203beb202ebf20a6415f44fe83e9905134737ac04da",
            ),
            ("elicit-actions-2", "531f32362d004c838c55c7fc40bed7f5dcdcacb4c9c9a8a2f3bea71d5e11daec"),
            ("elicit-course-2", "fb1f6dffeab5aaccae021f8b645f1147d0a4590c64352fccc7da8540b56c7eff"),
            ("elicit-end-state-1", "571e7536225f39684c28e285692ad0fa5b3bda4aa5c04db1d783bfac73ee19f6"),
            ("elicit-end-state-2", "f7f928ce78267dc298cb98e394f657e6f95c2e5cdbcb4178d8a0d07bb7c7f6cf"),
            ("elicit-orders-1", "197fad242bafed9dbbb71964ff9355e194cb8dbfeee2a2b4a671ad3b7f34990f"),
            ("forces", "ce08278c60afa190b5b486af76485bdf72bbfab449b39dc55df7f8b0749440cb"),
            ("format-reminder", "4667966494548bdced18f567ac1d27ba84479c9e54803c1ac8ec944515d18ce7"),
            ("incident", "6987346a771ec2fa27c842eceeec36fc0e224cbd4436bfbef6e34cfdb4b5f21f"),
            ("introduction", "06bf4f4799035047fa29d05cecd87790131fe0b25cc06d5e5b35ccc5aebe31c0"),
            ("llm-instructions", "162d394eec262045f04b13ef5494711f615a25088171f2cca3a33f0b64018876"),
            ("move1-question", "8dea491ec68082f92fea20f9ebe7f70485b87c0998117a2e2e0ab67efd075655"),
            ("move2-confirm", "fe19dabb2a484104df15d13f3f19aea845037264ddebe4292e3d70a961384341"),
            (
                "move2-global-response",
                "f7c69cd5316592005d45c77340775318127e1a7901f870f522258b0b90fb4d0b",
            ),
            ("move2-question", "7a47ee222a370b17ddd97d0d865a79d265ec43af114f43599e7dad0b63063cb3"),
            ("move2-transition", "75d896f2b48dd7d5e11f28a5d14d5e6ce002796985d44f65557d494e0f43f777"),
            ("new-technology", "9f1b156089073f696e1bd74bf06c6b2bff43c0b44236eac3eca82533d1ff3b19"),
            (
                "posture-revisionist",
                "73bb13f95ec34d633b530ad1f7510ef7b6870fff298bc097d20b9535879c689e",
            ),
            ("posture-statusquo", "f0bd0614e075a607415f811cddd3a685ec22d54aab69110cbc4d3e5f9381126e"),
            ("priorities", "92de3f63f7552be888a4c2a3c4e108063cc9ab610aabc040efdd1bb446dbda20"),
            (
                "recommendation-scope",
                "f30f73ed6f8a3fbd60aec916b8b141974bf73374082c2c8e6bc1b2e7ccb67e81",
            ),
            ("roleplay-emphasis", "b2dfdc3f28703989a91e5e1885cbdf0a2a5c22c7c49a38e37ef152f1d3d4b008"),
            ("roles", "ba93b0ee77e1cccc39544bd9c8199e8144b37b3da4ff2d317521628958cde9c9"),
            ("training-basic", "cb56ffdc0efbd4bdd13eb4d9fb0b654b690a6f27d0754a7f53cc5f222341e286"),
            (
                "training-extensive",
                "a5c9b3b76ee964776fd9a9cacadb5612695728dca78096127300b5911a614da3",
            ),
        ];
        let script = ScenarioScript::builtin();
        assert_eq!(script.blocks().count(), pinned.len());
        for (id, expected) in pinned {
            let body = script.block(id).unwrap();
            let digest = hex::encode(Sha256::digest(body.as_bytes()));
            assert_eq!(digest, *expected, "block {id} changed without a version bump");
        }
    }
}
