//! Statistical analysis of game records: bootstrap intervals, treatment
//! effects, selection profiles, stance consistency, and the discriminant
//! projection with its random baseline.

pub mod bootstrap;
pub mod consistency;
pub mod curves;
pub mod effect;
pub mod lda;
pub mod random;
