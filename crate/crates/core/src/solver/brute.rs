//! Reference semantics by exhaustive enumeration, for testing only.
//!
//! Every interpretation is checked against the definition directly: it
//! must be a model, and no proper subset may model the reduct. Nothing here
//! shares code with the search in the parent module.

use alloc::vec::Vec;
use core::fmt;

use super::Interpretation;
use crate::ground::{AtomId, GroundProgram};

pub const BRUTE_FORCE_MAX_ATOMS: usize = 25;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteForceError {
    pub atoms: usize,
}

impl fmt::Display for BruteForceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "brute force limited to {BRUTE_FORCE_MAX_ATOMS} atoms, program has {}",
            self.atoms
        )
    }
}

struct MaskRule {
    head: u32,
    positive: u32,
    negative: u32,
}

fn mask(atoms: &[AtomId]) -> u32 {
    atoms.iter().fold(0, |m, a| m | (1 << a.0))
}

/// All answer sets of `g`, sorted.
pub fn brute_force_answer_sets(g: &GroundProgram) -> Result<Vec<Interpretation>, BruteForceError> {
    let n = g.atoms.len();
    if n > BRUTE_FORCE_MAX_ATOMS {
        return Err(BruteForceError { atoms: n });
    }
    let rules: Vec<MaskRule> = g
        .rules
        .iter()
        .map(|r| MaskRule {
            head: mask(&r.head),
            positive: mask(&r.positive),
            negative: mask(&r.negative),
        })
        .collect();
    let satisfies = |i: u32, rules: &[MaskRule]| {
        rules
            .iter()
            .all(|r| r.positive & !i != 0 || r.negative & i != 0 || r.head & i != 0)
    };

    let mut out = Vec::new();
    for i in 0u32..(1u32 << n) {
        if !satisfies(i, &rules) {
            continue;
        }
        // Reduct w.r.t. i: rules whose negative body is false under i,
        // without their negative literals.
        let reduct: Vec<MaskRule> = rules
            .iter()
            .filter(|r| r.negative & i == 0)
            .map(|r| MaskRule {
                head: r.head,
                positive: r.positive,
                negative: 0,
            })
            .collect();
        let mut minimal = true;
        // Proper subsets of i, largest first.
        let mut j = i;
        while j != 0 {
            j = (j - 1) & i;
            if satisfies(j, &reduct) {
                minimal = false;
                break;
            }
        }
        if minimal {
            out.push(
                (0..n)
                    .filter(|a| i & (1 << a) != 0)
                    .map(|a| AtomId(a as u32))
                    .collect(),
            );
        }
    }
    out.sort();
    Ok(out)
}
