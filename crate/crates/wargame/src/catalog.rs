//! The fixed action catalog for both wargame moves.
//!
//! Move one offers 7 rules-of-engagement options (codes `a`..`g`); move two
//! offers 14 response actions (codes `a`, `a1`, `a2`, `a3`, `b`..`k`).
//! Every action carries a stance classification (aggressive or de-escalatory)
//! used by the escalation metrics. The catalog order is the canonical bit
//! order of [`crate::response::ResponseVector`] and is tagged `actions-v1`
//! in serialized records.

use serde::{Deserialize, Serialize};

/// Schema tag for the canonical action ordering embedded in records.
pub const ACTIONS_SCHEMA: &str = "actions-v1";

/// Number of move-one actions.
pub const MOVE1_ACTIONS: usize = 7;
/// Number of move-two actions.
pub const MOVE2_ACTIONS: usize = 14;
/// Total actions across both moves.
pub const TOTAL_ACTIONS: usize = MOVE1_ACTIONS + MOVE2_ACTIONS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GameMove {
    Move1,
    Move2,
}

impl GameMove {
    /// Bit-index range of this move within the 21-slot catalog order.
    pub fn index_range(self) -> std::ops::Range<usize> {
        match self {
            GameMove::Move1 => 0..MOVE1_ACTIONS,
            GameMove::Move2 => MOVE1_ACTIONS..TOTAL_ACTIONS,
        }
    }

    pub fn action_count(self) -> usize {
        self.index_range().len()
    }
}

impl std::fmt::Display for GameMove {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GameMove::Move1 => write!(f, "move1"),
            GameMove::Move2 => write!(f, "move2"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stance {
    Aggressive,
    DeEscalatory,
}

/// One selectable action: which move it belongs to, its option code as it
/// appears on the answer form, and the canonical option text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Action {
    pub game_move: GameMove,
    pub code: &'static str,
    pub title: &'static str,
    pub stance: Stance,
}

impl Action {
    /// Renders the option label as it appears on the form, e.g. `(b)` or
    /// `(a)(1)` for the military-action sub-options.
    pub fn label(&self) -> String {
        if let Some(sub) = self.code.strip_prefix('a').filter(|s| !s.is_empty()) {
            format!("(a)({sub})")
        } else {
            format!("({})", self.code)
        }
    }
}

use Stance::{Aggressive as Agg, DeEscalatory as Des};

const ACTIONS: [Action; TOTAL_ACTIONS] = [
    // Move one: rules of engagement for the CSG and the AI-enabled defense system.
    Action { game_move: GameMove::Move1, code: "a", stance: Agg, title: "Fire at Chinese vessels within close proximity of CSG with any weapon mission commander deems appropriate" },
    Action { game_move: GameMove::Move1, code: "b", stance: Des, title: "Hold fire unless fired upon" },
    Action { game_move: GameMove::Move1, code: "c", stance: Des, title: "Hold fire without approval from President" },
    Action { game_move: GameMove::Move1, code: "d", stance: Agg, title: "Place automated defenses on auto-fire. AI decides target/AI decides firing." },
    Action { game_move: GameMove::Move1, code: "e", stance: Agg, title: "Place automated defenses on manual firing control. AI decides target/human decides firing." },
    Action { game_move: GameMove::Move1, code: "f", stance: Agg, title: "Human decides target/human decides firing" },
    Action { game_move: GameMove::Move1, code: "g", stance: Des, title: "Hold fire at all costs" },
    // Move two: global response options.
    Action { game_move: GameMove::Move2, code: "a", stance: Agg, title: "Military Action" },
    Action { game_move: GameMove::Move2, code: "a1", stance: Agg, title: "Preserve Status Quo/Deter" },
    Action { game_move: GameMove::Move2, code: "a2", stance: Agg, title: "Invade/Attack" },
    Action { game_move: GameMove::Move2, code: "a3", stance: Agg, title: "Defend" },
    Action { game_move: GameMove::Move2, code: "b", stance: Agg, title: "Activate Civilian Reserve/Draft" },
    Action { game_move: GameMove::Move2, code: "c", stance: Agg, title: "Surge Domestic Defense Production" },
    Action { game_move: GameMove::Move2, code: "d", stance: Des, title: "Diplomacy" },
    Action { game_move: GameMove::Move2, code: "e", stance: Agg, title: "Economic Punishment" },
    Action { game_move: GameMove::Move2, code: "f", stance: Des, title: "Economic Incentives" },
    Action { game_move: GameMove::Move2, code: "g", stance: Agg, title: "Clandestine/Special Operations" },
    Action { game_move: GameMove::Move2, code: "h", stance: Agg, title: "Information Operations" },
    Action { game_move: GameMove::Move2, code: "i", stance: Agg, title: "Conduct Foreign Intelligence" },
    Action { game_move: GameMove::Move2, code: "j", stance: Agg, title: "Conduct Domestic Intelligence" },
    Action { game_move: GameMove::Move2, code: "k", stance: Agg, title: "Cyber Operations" },
];

/// The immutable catalog of all 21 actions in canonical bit order.
#[derive(Debug, Clone, Copy)]
pub struct ActionCatalog {
    actions: &'static [Action; TOTAL_ACTIONS],
}

/// Returns the canonical catalog.
pub fn catalog() -> ActionCatalog {
    ActionCatalog { actions: &ACTIONS }
}

impl ActionCatalog {
    pub fn actions(&self) -> &'static [Action] {
        self.actions
    }

    pub fn action(&self, index: usize) -> &'static Action {
        &self.actions[index]
    }

    /// Actions belonging to one move, in catalog order.
    pub fn move_actions(&self, game_move: GameMove) -> &'static [Action] {
        &self.actions[game_move.index_range()]
    }

    /// Catalog index of an action by move and code.
    pub fn index_of(&self, game_move: GameMove, code: &str) -> Option<usize> {
        self.actions
            .iter()
            .position(|a| a.game_move == game_move && a.code == code)
    }

    pub fn stance(&self, game_move: GameMove, code: &str) -> Option<Stance> {
        self.index_of(game_move, code).map(|i| self.actions[i].stance)
    }
}
