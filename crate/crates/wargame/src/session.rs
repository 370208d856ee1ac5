//! One game of the two-move crisis exercise, driven as a state machine.
//!
//! The phase sequence is fixed: briefing, move-one dialog, move-one answers,
//! the move-two transition handshake, move-two brief, move-two dialog,
//! move-two answers, done. A parse failure on a selection answer triggers up
//! to two re-elicitations with a stricter format reminder before the game is
//! recorded as failed. The same driver serves model-backed and human play;
//! a human team is just another [`Backend`].

use crate::catalog::GameMove;
use crate::gateway::{Backend, ChatTurn, Gateway, GatewayError};
use crate::parse::{parse_end_state, parse_selection, Confidence, ParseError};
use crate::profile::TeamComposition;
use crate::response::{ResponseVector, Treatment};
use crate::scenario::{
    build_answer_elicitation, build_dialog_instruction, build_format_reminder,
    build_move1_prompt, build_move2_prompt, build_move2_transition, build_system_prompt,
    build_text_elicitation, PromptVariant, ScenarioError, ScenarioScript, TextAnswerKind,
};
use chrono::{DateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use std::sync::Mutex;
use thiserror::Error;

pub const RECORD_SCHEMA: &str = "record-v1";

/// Maximum re-elicitations after a selection answer fails to parse.
pub const MAX_REELICITS: u32 = 2;

/// Word budget for a final-answer or acknowledgment turn.
pub const ANSWER_BUDGET_WORDS: u32 = 150;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// Wall-clock abstraction so offline runs can stamp records deterministically.
pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Fixed timestamp source for bit-identical offline runs.
pub struct FixedClock(pub DateTime<Utc>);

impl FixedClock {
    pub fn epoch() -> Self {
        FixedClock(Utc.timestamp_opt(0, 0).single().expect("valid epoch"))
    }
}

impl Clock for FixedClock {
    fn now(&self) -> DateTime<Utc> {
        self.0
    }
}

/// Phases, in order. Recorded on failure so a failed game names where it died.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SessionPhase {
    Briefing,
    Move1Dialog,
    Move1Answer,
    Move2Brief,
    Move2Dialog,
    Move2Answer,
    Complete,
}

/// Everything the experiment knows about one game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub schema: String,
    pub game_key: String,
    pub team_index: u32,
    pub treatment: Treatment,
    pub seed: u64,
    pub team: TeamComposition,
    pub variant: PromptVariant,
    pub backend: String,
    pub started_at: String,
    pub finished_at: String,
    pub outcome: GameOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GameOutcome {
    Completed {
        response: ResponseVector,
        move1_confidence: Confidence,
        move2_confidence: Confidence,
        reelicits: u32,
        diagnostics: Vec<String>,
    },
    Failed {
        phase: SessionPhase,
        error: String,
    },
}

impl GameRecord {
    pub fn response(&self) -> Option<&ResponseVector> {
        match &self.outcome {
            GameOutcome::Completed { response, .. } => Some(response),
            GameOutcome::Failed { .. } => None,
        }
    }

    pub fn is_completed(&self) -> bool {
        matches!(self.outcome, GameOutcome::Completed { .. })
    }
}

/// Inputs identifying one game within an experiment.
#[derive(Debug, Clone)]
pub struct GameSetup {
    pub game_key: String,
    pub team_index: u32,
    pub treatment: Treatment,
    pub seed: u64,
    pub team: TeamComposition,
    pub variant: PromptVariant,
}

struct Session<'a> {
    gateway: &'a Gateway,
    game_key: &'a str,
    history: Vec<ChatTurn>,
    turn_index: u32,
}

impl<'a> Session<'a> {
    fn exchange(&mut self, prompt: String, budget_words: u32) -> Result<String, GatewayError> {
        self.history.push(ChatTurn::user(prompt));
        let reply =
            self.gateway.complete(self.game_key, self.turn_index, &self.history, budget_words)?;
        self.turn_index += 1;
        self.history.push(ChatTurn::assistant(reply.clone()));
        Ok(reply)
    }
}

struct SelectionAnswer {
    vector: ResponseVector,
    confidence: Confidence,
    reelicits: u32,
    diagnostics: Vec<String>,
}

fn elicit_selection(
    session: &mut Session,
    script: &ScenarioScript,
    game_move: GameMove,
    variant: &PromptVariant,
) -> Result<Result<SelectionAnswer, ParseError>, GatewayError> {
    // Direct-answer mode grants the whole dialog budget to the single answer.
    let budget = if variant.dialog_chunks == 0 {
        variant.chunk_words.max(1) * 3
    } else {
        ANSWER_BUDGET_WORDS
    };
    let mut prompt = build_answer_elicitation(script, game_move, variant);
    let mut last_err = None;
    for attempt in 0..=MAX_REELICITS {
        let reply = session.exchange(prompt.clone(), budget)?;
        match parse_selection(&reply, game_move) {
            Ok(outcome) => {
                let mut diagnostics = outcome.diagnostics;
                if let Some(err) = &last_err {
                    diagnostics
                        .push(format!("{game_move} answer re-elicited after: {err}"));
                }
                return Ok(Ok(SelectionAnswer {
                    vector: outcome.vector,
                    confidence: outcome.confidence,
                    reelicits: attempt,
                    diagnostics,
                }));
            }
            Err(err) => {
                last_err = Some(err);
                prompt = build_format_reminder(script);
            }
        }
    }
    Ok(Err(last_err.expect("at least one failed attempt")))
}

fn merge_move(target: &mut ResponseVector, source: &ResponseVector, game_move: GameMove) {
    for i in game_move.index_range() {
        target.set_bit(i, source.bit(i));
    }
}

/// Runs one game end to end and always returns a record; player-side and
/// parse failures become `Failed` outcomes, infrastructure failures are
/// returned as errors so the experiment can retry or halt.
pub fn run_game(
    gateway: &Gateway,
    script: &ScenarioScript,
    setup: &GameSetup,
    clock: &dyn Clock,
) -> Result<GameRecord, SessionError> {
    let started_at = clock.now().to_rfc3339();
    let variant = &setup.variant;
    let system = build_system_prompt(script, &setup.team, variant)?;
    let mut session = Session {
        gateway,
        game_key: &setup.game_key,
        history: vec![ChatTurn::system(system)],
        turn_index: 0,
    };

    let finish = |outcome: GameOutcome, session: &Session| GameRecord {
        schema: RECORD_SCHEMA.to_string(),
        game_key: setup.game_key.clone(),
        team_index: setup.team_index,
        treatment: setup.treatment,
        seed: setup.seed,
        team: setup.team.clone(),
        variant: *variant,
        backend: session.gateway.descriptor(),
        started_at: started_at.clone(),
        finished_at: clock.now().to_rfc3339(),
        outcome,
    };

    let mut response = ResponseVector::new();
    let mut diagnostics = Vec::new();

    // Briefing: scenario plus treatment inserts; the acknowledgment reply is
    // kept in history but carries no data.
    session.exchange(build_move1_prompt(script, &setup.treatment, variant), ANSWER_BUDGET_WORDS)?;

    for chunk in 0..variant.dialog_chunks {
        let prompt = build_dialog_instruction(script, GameMove::Move1, chunk, variant)?;
        session.exchange(prompt, variant.chunk_words)?;
    }

    let move1 = match elicit_selection(&mut session, script, GameMove::Move1, variant)? {
        Ok(answer) => answer,
        Err(err) => {
            return Ok(finish(
                GameOutcome::Failed { phase: SessionPhase::Move1Answer, error: err.to_string() },
                &session,
            ));
        }
    };
    merge_move(&mut response, &move1.vector, GameMove::Move1);
    diagnostics.extend(move1.diagnostics);

    let reply = session.exchange(
        build_text_elicitation(script, GameMove::Move1, TextAnswerKind::EndState),
        ANSWER_BUDGET_WORDS,
    )?;
    let (end_state1, ds) = parse_end_state(&reply);
    response.end_state1 = end_state1;
    diagnostics.extend(ds);

    // Transition handshake; the confirmation reply is deliberately discarded.
    session.exchange(build_move2_transition(script), ANSWER_BUDGET_WORDS)?;
    // Move-two brief depends only on the posture, never on move-one answers.
    session.exchange(
        build_move2_prompt(script, setup.treatment.china_posture),
        ANSWER_BUDGET_WORDS,
    )?;

    for chunk in 0..variant.dialog_chunks {
        let prompt = build_dialog_instruction(script, GameMove::Move2, chunk, variant)?;
        session.exchange(prompt, variant.chunk_words)?;
    }

    let reply = session.exchange(
        build_text_elicitation(script, GameMove::Move2, TextAnswerKind::CoursePlan),
        ANSWER_BUDGET_WORDS,
    )?;
    response.course_plan2 = reply.trim().to_string();

    let move2 = match elicit_selection(&mut session, script, GameMove::Move2, variant)? {
        Ok(answer) => answer,
        Err(err) => {
            return Ok(finish(
                GameOutcome::Failed { phase: SessionPhase::Move2Answer, error: err.to_string() },
                &session,
            ));
        }
    };
    merge_move(&mut response, &move2.vector, GameMove::Move2);
    diagnostics.extend(move2.diagnostics);

    let reply = session.exchange(
        build_text_elicitation(script, GameMove::Move2, TextAnswerKind::EndState),
        ANSWER_BUDGET_WORDS,
    )?;
    let (end_state2, ds) = parse_end_state(&reply);
    response.end_state2 = end_state2;
    diagnostics.extend(ds);

    Ok(finish(
        GameOutcome::Completed {
            response,
            move1_confidence: move1.confidence,
            move2_confidence: move2.confidence,
            reelicits: move1.reelicits + move2.reelicits,
            diagnostics,
        },
        &session,
    ))
}

// ---------------------------------------------------------------------------
// Human play

/// Terminal-style I/O used when a human team plays a game.
pub trait SessionIo: Send {
    fn show(&mut self, text: &str);
    fn read_reply(&mut self) -> std::io::Result<String>;
}

/// Adapts a [`SessionIo`] into a [`Backend`]: every prompt is shown, every
/// reply is typed. The system prompt is shown once, before the first turn.
pub struct HumanBackend {
    io: Mutex<Box<dyn SessionIo>>,
}

impl HumanBackend {
    pub fn new(io: Box<dyn SessionIo>) -> Self {
        HumanBackend { io: Mutex::new(io) }
    }
}

impl Backend for HumanBackend {
    fn complete(
        &self,
        _game_key: &str,
        turn_index: u32,
        history: &[ChatTurn],
        _budget_words: u32,
    ) -> Result<String, GatewayError> {
        let mut io = self.io.lock().expect("session io lock");
        if turn_index == 0 {
            io.show(&history[0].content);
        }
        let prompt = history.last().expect("non-empty history");
        io.show(&prompt.content);
        io.read_reply().map_err(|e| GatewayError::Transport(e.to_string()))
    }

    fn descriptor(&self) -> String {
        "human:interactive".to_string()
    }
}
