//! Move-to-move stance consistency: does an aggressive first move predict an
//! aggressive second move?
//!
//! Games are labeled by the sign of each move's aggressiveness index.
//! Neutral first moves carry no stance signal and are excluded from the
//! conditioning; the two conditional probabilities are bootstrapped within
//! their conditioning group.

use crate::catalog::GameMove;
use crate::response::MoveStanceLabel;
use crate::session::GameRecord;
use crate::stats::bootstrap::{bootstrap_ci, BootstrapCi};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyTable {
    /// p(aggressive move 2 | aggressive move 1)
    pub p_agg2_given_agg1: Option<BootstrapCi>,
    /// p(aggressive move 2 | de-escalatory move 1)
    pub p_agg2_given_des1: Option<BootstrapCi>,
    pub n_agg1: usize,
    pub n_des1: usize,
    /// Neutral-move-one games excluded from the conditioning.
    pub excluded_neutral: usize,
}

fn conditional_p_agg2(group: &[bool], resamples: u32, seed: u64) -> Option<BootstrapCi> {
    if group.is_empty() {
        return None;
    }
    Some(bootstrap_ci(group, resamples, seed, |it| {
        let mut agg = 0usize;
        let mut n = 0usize;
        for &b in it {
            n += 1;
            if b {
                agg += 1;
            }
        }
        agg as f64 / n as f64
    }))
}

pub fn consistency_table(records: &[GameRecord], resamples: u32, seed: u64) -> ConsistencyTable {
    let mut agg1_group = Vec::new(); // move-2-aggressive flags, given agg move 1
    let mut des1_group = Vec::new();
    let mut excluded_neutral = 0usize;
    for r in records {
        let Some(v) = r.response() else { continue };
        let agg2 = v.move_stance_label(GameMove::Move2) == MoveStanceLabel::Aggressive;
        match v.move_stance_label(GameMove::Move1) {
            MoveStanceLabel::Aggressive => agg1_group.push(agg2),
            MoveStanceLabel::DeEscalatory => des1_group.push(agg2),
            MoveStanceLabel::Neutral => excluded_neutral += 1,
        }
    }
    ConsistencyTable {
        p_agg2_given_agg1: conditional_p_agg2(&agg1_group, resamples, seed ^ 0xa661),
        p_agg2_given_des1: conditional_p_agg2(&des1_group, resamples, seed ^ 0xde51),
        n_agg1: agg1_group.len(),
        n_des1: des1_group.len(),
        excluded_neutral,
    }
}
