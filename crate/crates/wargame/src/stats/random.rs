//! Uniform-random baseline population for the discriminant projection.
//!
//! Each baseline vector sets every one of the 21 bits independently with
//! probability 1/2; the class size is the rounded mean of the other class
//! sizes so it carries comparable weight in the fit.

use crate::catalog::TOTAL_ACTIONS;
use crate::stats::lda::LdaInput;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const RANDOM_BASELINE_LABEL: &str = "random";

/// Class size rule: rounded mean of the other class sizes (half-up).
pub fn baseline_count(other_counts: &[usize]) -> usize {
    assert!(!other_counts.is_empty(), "baseline needs at least one other class");
    let sum: usize = other_counts.iter().sum();
    ((sum as f64 / other_counts.len() as f64) + 0.5).floor() as usize
}

/// Generates the baseline class, deterministically from `seed`.
pub fn random_baseline(other_counts: &[usize], seed: u64) -> LdaInput {
    let n = baseline_count(other_counts);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    LdaInput {
        label: RANDOM_BASELINE_LABEL.to_string(),
        vectors: (0..n)
            .map(|_| {
                let mut v = [0.0; TOTAL_ACTIONS];
                for x in v.iter_mut() {
                    *x = f64::from(rng.gen_bool(0.5));
                }
                v
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_rule_oracle() {
        assert_eq!(baseline_count(&[80]), 80);
        assert_eq!(baseline_count(&[80, 40]), 60);
        assert_eq!(baseline_count(&[3, 4]), 4); // 3.5 rounds half-up
        assert_eq!(baseline_count(&[1, 2, 2]), 2); // 5/3 -> 1.67 -> 2
    }

    #[test]
    fn deterministic_and_roughly_balanced() {
        let a = random_baseline(&[200], 7);
        let b = random_baseline(&[200], 7);
        assert_eq!(a, b);
        assert_eq!(a.vectors.len(), 200);
        let ones: f64 = a.vectors.iter().flatten().sum();
        let total = (a.vectors.len() * TOTAL_ACTIONS) as f64;
        let rate = ones / total;
        assert!((rate - 0.5).abs() < 0.05, "bit rate {rate}");
        assert_ne!(random_baseline(&[200], 8), a);
    }
}
