//! Player profiles, demographic vocabularies, and team sampling.
//!
//! The category labels are artifact conventions, documented here and in the
//! CSV schema; ingested datasets must use them verbatim.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Paper-faithful team size.
pub const TEAM_SIZE: usize = 6;

pub const GENDER_VOCAB: &[&str] = &["female", "male", "non-binary", "prefer not to say"];
pub const EDUCATION_VOCAB: &[&str] =
    &["bachelor's degree", "master's degree", "doctorate", "professional degree"];
pub const EXPERTISE_VOCAB: &[&str] = &["academic", "intelligence", "military", "government"];
pub const MIN_AGE: u32 = 18;
pub const MAX_AGE: u32 = 100;

pub const PACIFIST_TRAIT: &str = "a strict pacifist";
pub const SOCIOPATH_TRAIT: &str = "an aggressive sociopath";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProfileError {
    #[error("profile field {0:?} is missing or outside its vocabulary")]
    InvalidField(&'static str),
    #[error("team must have exactly {TEAM_SIZE} players, got {0}")]
    WrongTeamSize(usize),
    #[error("bootstrap sampling requires a non-empty profile dataset")]
    EmptyDataset,
}

/// Demographic attributes of one simulated or real player.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerProfile {
    pub age: u32,
    pub gender: String,
    pub education: String,
    pub expertise: String,
    #[serde(default)]
    pub free_traits: Option<String>,
}

impl PlayerProfile {
    pub fn validate(&self) -> Result<(), ProfileError> {
        if !(MIN_AGE..=MAX_AGE).contains(&self.age) {
            return Err(ProfileError::InvalidField("age"));
        }
        if !GENDER_VOCAB.contains(&self.gender.as_str()) {
            return Err(ProfileError::InvalidField("gender"));
        }
        if !EDUCATION_VOCAB.contains(&self.education.as_str()) {
            return Err(ProfileError::InvalidField("education"));
        }
        if !EXPERTISE_VOCAB.contains(&self.expertise.as_str()) {
            return Err(ProfileError::InvalidField("expertise"));
        }
        Ok(())
    }

    /// One background paragraph for the system prompt. The trait sentence is
    /// replaced wholesale by a persona override when one is active.
    pub fn describe(&self, player_number: usize, trait_override: Option<&str>) -> String {
        let base = format!(
            "Player {player_number}: a {}-year-old ({}) with a {} and a background in {}.",
            self.age, self.gender, self.education, self.expertise
        );
        let traits = trait_override
            .map(str::to_string)
            .or_else(|| self.free_traits.clone());
        match traits {
            Some(t) => format!("{base} This player is {t}."),
            None => base,
        }
    }
}

/// A roster of players for one game. Paper-faithful teams have 6 members.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeamComposition {
    pub players: Vec<PlayerProfile>,
}

impl TeamComposition {
    pub fn validate(&self) -> Result<(), ProfileError> {
        if self.players.len() != TEAM_SIZE {
            return Err(ProfileError::WrongTeamSize(self.players.len()));
        }
        for p in &self.players {
            p.validate()?;
        }
        Ok(())
    }
}

/// A profile dataset used for bootstrap team sampling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileDataset {
    pub rows: Vec<PlayerProfile>,
    pub provenance: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PersonaOverride {
    None,
    StrictPacifists,
    AggressiveSociopaths,
}

impl PersonaOverride {
    pub fn trait_phrase(self) -> Option<&'static str> {
        match self {
            PersonaOverride::None => None,
            PersonaOverride::StrictPacifists => Some(PACIFIST_TRAIT),
            PersonaOverride::AggressiveSociopaths => Some(SOCIOPATH_TRAIT),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplingMode {
    /// Draw whole rows with replacement, preserving attribute correlations.
    BootstrapFromDataset,
    /// Draw each attribute independently from its vocabulary.
    UniformRandom,
    /// Uniform demographics with the persona trait assigned to all players.
    FixedPersona(PersonaOverride),
}

fn uniform_profile<R: Rng>(rng: &mut R) -> PlayerProfile {
    PlayerProfile {
        age: rng.gen_range(MIN_AGE..=MAX_AGE),
        gender: GENDER_VOCAB.choose(rng).unwrap().to_string(),
        education: EDUCATION_VOCAB.choose(rng).unwrap().to_string(),
        expertise: EXPERTISE_VOCAB.choose(rng).unwrap().to_string(),
        free_traits: None,
    }
}

/// Samples one team under the given mode.
pub fn sample_team<R: Rng>(
    mode: SamplingMode,
    dataset: Option<&ProfileDataset>,
    rng: &mut R,
) -> Result<TeamComposition, ProfileError> {
    let players = match mode {
        SamplingMode::BootstrapFromDataset => {
            let rows = dataset.map(|d| d.rows.as_slice()).unwrap_or(&[]);
            if rows.is_empty() {
                return Err(ProfileError::EmptyDataset);
            }
            (0..TEAM_SIZE).map(|_| rows.choose(rng).unwrap().clone()).collect()
        }
        SamplingMode::UniformRandom => (0..TEAM_SIZE).map(|_| uniform_profile(rng)).collect(),
        SamplingMode::FixedPersona(persona) => (0..TEAM_SIZE)
            .map(|_| {
                let mut p = uniform_profile(rng);
                p.free_traits = persona.trait_phrase().map(str::to_string);
                p
            })
            .collect(),
    };
    Ok(TeamComposition { players })
}
