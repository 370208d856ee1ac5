//! Response encoding and the escalation metrics computed from it.

use crate::catalog::{catalog, GameMove, Stance, ACTIONS_SCHEMA, TOTAL_ACTIONS};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ResponseError {
    #[error("bit string must be {TOTAL_ACTIONS} characters of 0/1, got {0:?}")]
    BadBitString(String),
    #[error("unknown action code {code:?} for {game_move}")]
    UnknownCode { game_move: GameMove, code: String },
}

/// The three experimental factors. The full factorial has 8 combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Treatment {
    pub ai_accuracy: AiAccuracy,
    pub crew_training: CrewTraining,
    pub china_posture: ChinaPosture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AiAccuracy {
    /// "70-85%" accuracy insert.
    Low,
    /// "95-99%" accuracy insert.
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CrewTraining {
    Basic,
    Extensive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChinaPosture {
    Revisionist,
    StatusQuo,
}

impl Treatment {
    /// All 8 factorial combinations, in a fixed enumeration order.
    pub fn all() -> Vec<Treatment> {
        let mut out = Vec::with_capacity(8);
        for ai_accuracy in [AiAccuracy::Low, AiAccuracy::High] {
            for crew_training in [CrewTraining::Basic, CrewTraining::Extensive] {
                for china_posture in [ChinaPosture::Revisionist, ChinaPosture::StatusQuo] {
                    out.push(Treatment { ai_accuracy, crew_training, china_posture });
                }
            }
        }
        out
    }

    /// Short stable label used in game ids and reports, e.g. `lo-basic-rev`.
    pub fn label(&self) -> String {
        let acc = match self.ai_accuracy {
            AiAccuracy::Low => "lo",
            AiAccuracy::High => "hi",
        };
        let tr = match self.crew_training {
            CrewTraining::Basic => "basic",
            CrewTraining::Extensive => "ext",
        };
        let post = match self.china_posture {
            ChinaPosture::Revisionist => "rev",
            ChinaPosture::StatusQuo => "sq",
        };
        format!("{acc}-{tr}-{post}")
    }

    pub fn from_label(label: &str) -> Option<Treatment> {
        Treatment::all().into_iter().find(|t| t.label() == label)
    }
}

/// Whole-move stance derived from the sign of the aggressiveness index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MoveStanceLabel {
    Aggressive,
    DeEscalatory,
    Neutral,
}

/// Per-move summary: bounded aggressiveness index and number of chosen actions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoveScore {
    pub aggressiveness: f64,
    pub chosen_count: usize,
}

/// 21 binary action selections for one game (7 move-one + 14 move-two bits,
/// in catalog order) plus the free-text answers collected alongside.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResponseVector {
    bits: [bool; TOTAL_ACTIONS],
    pub end_state1: String,
    pub end_state2: String,
    pub course_plan2: String,
}

impl ResponseVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from selected codes per move.
    pub fn from_codes(move1: &[&str], move2: &[&str]) -> Result<Self, ResponseError> {
        let mut v = Self::new();
        for code in move1 {
            v.set_code(GameMove::Move1, code, true)?;
        }
        for code in move2 {
            v.set_code(GameMove::Move2, code, true)?;
        }
        Ok(v)
    }

    pub fn bit(&self, index: usize) -> bool {
        self.bits[index]
    }

    pub fn set_bit(&mut self, index: usize, value: bool) {
        self.bits[index] = value;
    }

    pub fn set_code(
        &mut self,
        game_move: GameMove,
        code: &str,
        value: bool,
    ) -> Result<(), ResponseError> {
        let idx = catalog().index_of(game_move, code).ok_or_else(|| ResponseError::UnknownCode {
            game_move,
            code: code.to_string(),
        })?;
        self.bits[idx] = value;
        Ok(())
    }

    pub fn has_code(&self, game_move: GameMove, code: &str) -> bool {
        catalog()
            .index_of(game_move, code)
            .map(|i| self.bits[i])
            .unwrap_or(false)
    }

    /// Selected codes for one move, in catalog order.
    pub fn codes(&self, game_move: GameMove) -> Vec<&'static str> {
        let cat = catalog();
        game_move
            .index_range()
            .filter(|&i| self.bits[i])
            .map(|i| cat.action(i).code)
            .collect()
    }

    /// The canonical 21-character 0/1 string, in catalog order.
    pub fn bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_bit_string(s: &str) -> Result<Self, ResponseError> {
        if s.len() != TOTAL_ACTIONS || !s.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(ResponseError::BadBitString(s.to_string()));
        }
        let mut v = Self::new();
        for (i, b) in s.bytes().enumerate() {
            v.bits[i] = b == b'1';
        }
        Ok(v)
    }

    /// Number of set bits in one move.
    pub fn chosen_count(&self, game_move: GameMove) -> usize {
        game_move.index_range().filter(|&i| self.bits[i]).count()
    }

    /// (aggressive − de-escalatory) / chosen, over the move's selected
    /// actions; 0 when nothing is chosen. Always in [-1, 1].
    pub fn aggressiveness_index(&self, game_move: GameMove) -> f64 {
        let cat = catalog();
        let mut agg = 0i64;
        let mut des = 0i64;
        let mut chosen = 0i64;
        for i in game_move.index_range() {
            if self.bits[i] {
                chosen += 1;
                match cat.action(i).stance {
                    Stance::Aggressive => agg += 1,
                    Stance::DeEscalatory => des += 1,
                }
            }
        }
        if chosen == 0 {
            0.0
        } else {
            (agg - des) as f64 / chosen as f64
        }
    }

    /// Sign of the aggressiveness index; Neutral on 0 (including empty moves).
    pub fn move_stance_label(&self, game_move: GameMove) -> MoveStanceLabel {
        let idx = self.aggressiveness_index(game_move);
        if idx > 0.0 {
            MoveStanceLabel::Aggressive
        } else if idx < 0.0 {
            MoveStanceLabel::DeEscalatory
        } else {
            MoveStanceLabel::Neutral
        }
    }

    pub fn move_score(&self, game_move: GameMove) -> MoveScore {
        MoveScore {
            aggressiveness: self.aggressiveness_index(game_move),
            chosen_count: self.chosen_count(game_move),
        }
    }

    /// Bits as 0/1 floats in catalog order, for the statistics pipeline.
    pub fn as_f64(&self) -> [f64; TOTAL_ACTIONS] {
        let mut out = [0.0; TOTAL_ACTIONS];
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                out[i] = 1.0;
            }
        }
        out
    }
}

// Serialized form keeps the bits as the canonical 21-char string together
// with the action-order schema tag.
#[derive(Serialize, Deserialize)]
struct ResponseVectorRepr {
    schema: String,
    bits: String,
    end_state1: String,
    end_state2: String,
    course_plan2: String,
}

impl Serialize for ResponseVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ResponseVectorRepr {
            schema: ACTIONS_SCHEMA.to_string(),
            bits: self.bit_string(),
            end_state1: self.end_state1.clone(),
            end_state2: self.end_state2.clone(),
            course_plan2: self.course_plan2.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ResponseVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = ResponseVectorRepr::deserialize(deserializer)?;
        if repr.schema != ACTIONS_SCHEMA {
            return Err(serde::de::Error::custom(format!(
                "unsupported action schema {:?}, expected {ACTIONS_SCHEMA:?}",
                repr.schema
            )));
        }
        let mut v = ResponseVector::from_bit_string(&repr.bits)
            .map_err(|e| serde::de::Error::custom(e.to_string()))?;
        v.end_state1 = repr.end_state1;
        v.end_state2 = repr.end_state2;
        v.course_plan2 = repr.course_plan2;
        Ok(v)
    }
}
