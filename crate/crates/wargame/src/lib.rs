//! A two-move U.S.–China naval crisis wargame engine with LLM-backed,
//! scripted, or human players, and the statistical pipeline that turns the
//! recorded games into treatment-effect tables, consistency probabilities,
//! and a discriminant projection of response behavior.
//!
//! The crate is organized around one data spine:
//!
//! * [`catalog`] — the fixed 21-action menu and its stance classification
//! * [`scenario`] — versioned scenario text and prompt assembly
//! * [`profile`] — player demographics and team sampling
//! * [`gateway`] — player backends (HTTP endpoint, scripted replay,
//!   deterministic synthetic player) behind one trait
//! * [`session`] — the per-game state machine producing a [`session::GameRecord`]
//! * [`parse`] / [`response`] — free-text answer parsing and the 21-bit
//!   response encoding with its aggressiveness metrics
//! * [`store`] / [`experiment`] — the resumable record store and the
//!   teams-by-treatments factorial driver
//! * [`stats`] / [`report`] — bootstrap inference and the analysis bundle
//! * [`fixtures`] — synthetic record generators for pipeline testing

pub mod catalog;
pub mod experiment;
pub mod fixtures;
pub mod gateway;
pub mod parse;
pub mod profile;
pub mod report;
pub mod response;
pub mod scenario;
pub mod session;
pub mod stats;
pub mod store;
