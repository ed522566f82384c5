//! NPA moment-matrix relaxations for two parties with dichotomic settings.
//!
//! Each setting contributes the projector `Π` onto its +1 outcome, and the
//! observable is `A = 2Π − I`. Rows and columns of the moment matrix are
//! indexed by operator words `w`, with `M[i, j] = ⟨w_i† w_j⟩`. The relaxation
//! is real: `M` is real symmetric, so a word and its reverse share a class
//! (the real part of a Hermitian moment matrix is feasible whenever the
//! matrix itself is).

mod randomness;
mod relaxation;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::bell::BellError;
use crate::linalg::RealMatrix;
use crate::sdp::SdpStatus;

pub use randomness::{
    crossover_bracket, min_entropy_curve, randomness_at_value, randomness_point, refine_crossover,
    RandomnessPoint,
};
pub use relaxation::{
    max_guessing_probability, tsirelson_bound, GuessingReport, MomentRelaxation, ValueConstraint,
    ACCEPT_MERIT, EDGE_MARGIN, OVERSHOOT_TOL,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NpaError {
    #[error("unsupported NPA level {0:?}")]
    UnsupportedLevel(String),
    #[error("scenario needs at least one setting per party")]
    EmptyScenario,
    #[error("input pair ({x}, {y}) is outside a {k}x{l} scenario")]
    InputOutOfRange {
        x: usize,
        y: usize,
        k: usize,
        l: usize,
    },
    #[error("Bell value {value} lies outside the attainable range [{min}, {max}]")]
    InfeasibleValue { value: f64, min: f64, max: f64 },
    #[error("SDP solver stopped with {status:?} (relative gap {gap:e})")]
    Solver { status: SdpStatus, gap: f64 },
    #[error(transparent)]
    Bell(#[from] BellError),
}

/// Settings per party; every setting has two outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scenario {
    pub alice_settings: usize,
    pub bob_settings: usize,
}

impl Scenario {
    pub fn new(alice_settings: usize, bob_settings: usize) -> Result<Self, NpaError> {
        if alice_settings == 0 || bob_settings == 0 {
            return Err(NpaError::EmptyScenario);
        }
        Ok(Self {
            alice_settings,
            bob_settings,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NpaLevel {
    /// `{1, A_x, B_y}`.
    One,
    /// Level one plus the products `A_x B_y`.
    OneAB,
    /// Every word of length at most two.
    Two,
}

impl core::str::FromStr for NpaLevel {
    type Err = NpaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "one" | "q1" => Ok(NpaLevel::One),
            "1+ab" | "1ab" | "q1+ab" => Ok(NpaLevel::OneAB),
            "2" | "two" | "q2" => Ok(NpaLevel::Two),
            _ => Err(NpaError::UnsupportedLevel(s.into())),
        }
    }
}

impl fmt::Display for NpaLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NpaLevel::One => "1",
            NpaLevel::OneAB => "1+AB",
            NpaLevel::Two => "2",
        })
    }
}

/// A product of projectors, Alice's first (the parties commute), with no
/// symbol repeated back to back (`Π² = Π`). The identity is the empty word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial {
    pub alice: Vec<usize>,
    pub bob: Vec<usize>,
}

impl Monomial {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Builds a word from raw symbol sequences, collapsing repeats.
    pub fn new(mut alice: Vec<usize>, mut bob: Vec<usize>) -> Self {
        alice.dedup();
        bob.dedup();
        Self { alice, bob }
    }

    pub fn len(&self) -> usize {
        self.alice.len() + self.bob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    pub fn is_identity(&self) -> bool {
        self.alice.is_empty() && self.bob.is_empty()
    }

    /// `w†`: each party's word reversed.
    pub fn adjoint(&self) -> Self {
        Self {
            alice: self.alice.iter().rev().copied().collect(),
            bob: self.bob.iter().rev().copied().collect(),
        }
    }

    /// `self† · other`, reduced.
    pub fn adjoint_times(&self, other: &Self) -> Self {
        let mut alice: Vec<usize> = self.alice.iter().rev().copied().collect();
        alice.extend_from_slice(&other.alice);
        let mut bob: Vec<usize> = self.bob.iter().rev().copied().collect();
        bob.extend_from_slice(&other.bob);
        Self::new(alice, bob)
    }

    /// Representative shared by a word and its adjoint, whose expectation
    /// values coincide in a real relaxation.
    pub fn real_key(&self) -> Self {
        let adj = self.adjoint();
        if adj < *self {
            adj
        } else {
            self.clone()
        }
    }
}

impl fmt::Display for Monomial {
    /// One-based labels: `A1B2`, `A1A3`, `1` for the identity.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("1");
        }
        for x in &self.alice {
            write!(f, "A{}", x + 1)?;
        }
        for y in &self.bob {
            write!(f, "B{}", y + 1)?;
        }
        Ok(())
    }
}

/// Monomial basis and the partition of moment-matrix entries into classes
/// of provably equal expectation values.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentStructure {
    scenario: Scenario,
    level: NpaLevel,
    monomials: Vec<Monomial>,
    /// Row-major `m × m` class indices.
    class_of: Vec<usize>,
    /// Canonical word of each class, in order of first appearance.
    class_words: Vec<Monomial>,
    lookup: BTreeMap<Monomial, usize>,
}

pub fn build_moment_structure(scenario: Scenario, level: NpaLevel) -> MomentStructure {
    let (k, l) = (scenario.alice_settings, scenario.bob_settings);
    let mut monomials = alloc::vec![Monomial::identity()];
    monomials.extend((0..k).map(|x| Monomial::new(alloc::vec![x], alloc::vec![])));
    monomials.extend((0..l).map(|y| Monomial::new(alloc::vec![], alloc::vec![y])));
    if level == NpaLevel::Two {
        for x in 0..k {
            for x2 in (0..k).filter(|&x2| x2 != x) {
                monomials.push(Monomial::new(alloc::vec![x, x2], alloc::vec![]));
            }
        }
        for y in 0..l {
            for y2 in (0..l).filter(|&y2| y2 != y) {
                monomials.push(Monomial::new(alloc::vec![], alloc::vec![y, y2]));
            }
        }
    }
    if level >= NpaLevel::OneAB {
        for x in 0..k {
            for y in 0..l {
                monomials.push(Monomial::new(alloc::vec![x], alloc::vec![y]));
            }
        }
    }

    let m = monomials.len();
    let mut lookup = BTreeMap::new();
    let mut class_words = Vec::new();
    let mut class_of = alloc::vec![0; m * m];
    for i in 0..m {
        for j in i..m {
            let key = monomials[i].adjoint_times(&monomials[j]).real_key();
            let id = *lookup.entry(key.clone()).or_insert_with(|| {
                class_words.push(key);
                class_words.len() - 1
            });
            class_of[i * m + j] = id;
            class_of[j * m + i] = id;
        }
    }
    MomentStructure {
        scenario,
        level,
        monomials,
        class_of,
        class_words,
        lookup,
    }
}

impl MomentStructure {
    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn level(&self) -> NpaLevel {
        self.level
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    /// Side length of the moment matrix.
    pub fn size(&self) -> usize {
        self.monomials.len()
    }

    pub fn num_classes(&self) -> usize {
        self.class_words.len()
    }

    pub fn class_of(&self, i: usize, j: usize) -> usize {
        self.class_of[i * self.size() + j]
    }

    pub fn class_word(&self, class: usize) -> &Monomial {
        &self.class_words[class]
    }

    /// Class holding `⟨word⟩`, if the word occurs in the matrix.
    pub fn find_class(&self, word: &Monomial) -> Option<usize> {
        let reduced = Monomial::new(word.alice.clone(), word.bob.clone());
        self.lookup.get(&reduced.real_key()).copied()
    }

    /// Upper-triangle positions `(i, j)`, `i ≤ j`, grouped by class; the
    /// first position of every group is its representative.
    pub fn class_positions(&self) -> Vec<Vec<(usize, usize)>> {
        let m = self.size();
        let mut groups = alloc::vec![Vec::new(); self.num_classes()];
        for i in 0..m {
            for j in i..m {
                groups[self.class_of(i, j)].push((i, j));
            }
        }
        groups
    }

    /// Fills a moment matrix from one value per class.
    pub fn assemble(&self, class_values: &[f64]) -> RealMatrix {
        let m = self.size();
        RealMatrix::from_fn(m, m, |i, j| class_values[self.class_of(i, j)])
    }

    /// Per-class averages of a (near-)structured matrix.
    pub fn class_values(&self, matrix: &RealMatrix) -> Vec<f64> {
        let mut sums = alloc::vec![0.0; self.num_classes()];
        let mut counts = alloc::vec![0usize; self.num_classes()];
        for i in 0..self.size() {
            for j in 0..self.size() {
                let c = self.class_of(i, j);
                sums[c] += matrix[(i, j)];
                counts[c] += 1;
            }
        }
        sums.iter()
            .zip(&counts)
            .map(|(s, &c)| s / c as f64)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn count(k: usize, l: usize, level: NpaLevel) -> usize {
        build_moment_structure(Scenario::new(k, l).unwrap(), level).size()
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(count(2, 2, NpaLevel::One), 5);
        assert_eq!(count(3, 4, NpaLevel::One), 8);
        assert_eq!(count(3, 4, NpaLevel::OneAB), 20);
        assert_eq!(count(3, 4, NpaLevel::Two), 38);
        assert_eq!(count(2, 2, NpaLevel::Two), 13);
    }

    #[test]
    fn identity_first_and_pinned_class() {
        let s = build_moment_structure(Scenario::new(3, 4).unwrap(), NpaLevel::Two);
        assert!(s.monomials()[0].is_identity());
        assert_eq!(s.class_of(0, 0), 0);
        assert!(s.class_word(0).is_identity());
        assert_eq!(s.num_classes(), 302);
    }

    #[test]
    fn algebraic_identities() {
        let s = build_moment_structure(Scenario::new(2, 2).unwrap(), NpaLevel::Two);
        let idx = |w: Monomial| s.monomials().iter().position(|m| *m == w).unwrap();
        let a0 = idx(Monomial::new(alloc::vec![0], alloc::vec![]));
        let b1 = idx(Monomial::new(alloc::vec![], alloc::vec![1]));
        let a0b1 = idx(Monomial::new(alloc::vec![0], alloc::vec![1]));
        let a01 = idx(Monomial::new(alloc::vec![0, 1], alloc::vec![]));
        let a10 = idx(Monomial::new(alloc::vec![1, 0], alloc::vec![]));
        // Idempotence: ⟨A0 A0⟩ = ⟨A0⟩.
        assert_eq!(s.class_of(a0, a0), s.class_of(0, a0));
        // Commutation: ⟨A0 B1⟩ from (A0, B1) and (1, A0B1).
        assert_eq!(s.class_of(a0, b1), s.class_of(0, a0b1));
        // ⟨A0 · A0A1⟩ = ⟨A0A1⟩.
        assert_eq!(s.class_of(a0, a01), s.class_of(0, a01));
        // Reversal: ⟨A0A1⟩ and ⟨A1A0⟩ share a class in the real relaxation.
        assert_eq!(s.class_of(0, a01), s.class_of(0, a10));
        // ⟨A1A0 · A0A1⟩ = ⟨A1A0A1⟩, distinct from ⟨A0A1⟩.
        assert_ne!(s.class_of(a01, a01), s.class_of(0, a01));
        assert_eq!(
            s.find_class(&Monomial::new(alloc::vec![1, 0, 0, 1], alloc::vec![])),
            Some(s.class_of(a01, a01))
        );
    }

    #[test]
    fn display_is_one_based() {
        assert_eq!(
            Monomial::new(alloc::vec![0, 2], alloc::vec![1]).to_string(),
            "A1A3B2"
        );
        assert_eq!(Monomial::identity().to_string(), "1");
    }

    #[test]
    fn level_parsing() {
        assert_eq!("Q2".parse::<NpaLevel>(), Ok(NpaLevel::Two));
        assert_eq!("1+AB".parse::<NpaLevel>(), Ok(NpaLevel::OneAB));
        assert!(matches!(
            "3".parse::<NpaLevel>(),
            Err(NpaError::UnsupportedLevel(_))
        ));
    }
}
