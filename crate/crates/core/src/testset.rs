//! Seeded single-word removal for building evaluation sets.
//!
//! From each sentence of `m >= 3` tokens one token is removed, chosen
//! uniformly among positions `2..=m-1` (1-based), so the first and last
//! tokens always survive.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::GoldEdit;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestCase {
    pub damaged: Vec<String>,
    pub original: Vec<String>,
    pub edit: GoldEdit,
}

impl TestCase {
    /// 1-based index of the removed token in the original sentence.
    pub fn removed_index(&self) -> usize {
        self.edit.gap_index + 1
    }
}

pub struct TestSetGenerator {
    rng: ChaCha8Rng,
}

impl TestSetGenerator {
    pub fn new(seed: u64) -> Self {
        TestSetGenerator {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Removes one interior token, or returns `None` for sentences shorter
    /// than three tokens (no randomness is consumed for those).
    pub fn damage(&mut self, tokens: &[&str]) -> Option<TestCase> {
        let m = tokens.len();
        if m < 3 {
            return None;
        }
        let removed = self.rng.gen_range(2..=m - 1);
        let original: Vec<String> = tokens.iter().map(|t| t.to_string()).collect();
        let mut damaged = original.clone();
        let word = damaged.remove(removed - 1);
        Some(TestCase {
            damaged,
            original,
            edit: GoldEdit {
                gap_index: removed - 1,
                word,
            },
        })
    }
}
