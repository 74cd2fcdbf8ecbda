//! Word lengths over the generating sets `E|_n` and `S|_n`, balls of words,
//! and verifiers for contraction, separation, vanishing commutators and
//! the `γ₃` section table.

mod ball;
mod checks;
mod gamma3;
mod report;
mod structure;

pub use ball::{ball_words, e_alphabet, enumerate_ball, sample_ball, CheckMode, DEFAULT_WORD_CAP};
pub use checks::{
    contraction_check, depth_estimate, s_to_e_check, separation_check, vanishing_commutator_check, SeparationCase,
};
pub use gamma3::{gamma3_check, gamma3_sections, Gamma3Sections};
pub use report::{Report, Violation};
pub use structure::{fractality_check, max_orbit_check, order_check, transitivity_check};

use crate::error::{Error, Result};
use crate::treeauto::{GenLetter, Word};

/// Which generating set lengths are measured in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GenSetTag {
    /// `E|_n = ⟨b_n⟩ ∪ ⋃ ⟨e_i⟩`: a `b`-power costs 1, a rooted vector its number of nonzero coordinates.
    E(usize),
    /// `S|_n = ⟨b_n⟩^{X_n} ∪ X_n`: a conjugated `b`-power costs 1, any rooted vector costs 1.
    S(usize),
}

impl GenSetTag {
    pub fn level(&self) -> usize {
        match self {
            GenSetTag::E(n) | GenSetTag::S(n) => *n,
        }
    }
}

/// Length of the normalized representative of `w` in the tag alphabet.
///
/// An upper bound for the true word length; exact for rooted-only words
/// under `E`.
pub fn word_length(w: &Word, tag: GenSetTag) -> Result<u64> {
    if w.level() != tag.level() {
        return Err(Error::ShapeMismatch(format!("word of level {} measured in {:?}", w.level(), tag)));
    }
    let w = w.normalize();
    match tag {
        GenSetTag::E(_) => Ok(w
            .letters()
            .iter()
            .map(|l| match l {
                GenLetter::B { .. } => 1,
                GenLetter::Rooted { vector, .. } => vector.e_length(),
            })
            .sum()),
        GenSetTag::S(_) => Ok(w.conj_form()?.s_length()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{FpVector, TreeSignature};

    #[test]
    fn length_examples() {
        let sig = TreeSignature::growing(3).unwrap();
        let w = Word::parse(&sig, 2, "r2:[1,2,0,0]").unwrap();
        assert_eq!(word_length(&w, GenSetTag::E(2)).unwrap(), 2);
        let w = Word::parse(&sig, 0, "b0 r0:[1]").unwrap();
        assert_eq!(word_length(&w, GenSetTag::S(0)).unwrap(), 2);
        let x = FpVector::from_dense(3, &[1, 1, 0, 2]);
        let conj = Word::b(&sig, 2, 1).unwrap().conj(&Word::rooted(&sig, 2, x.clone()).unwrap()).unwrap();
        assert_eq!(word_length(&conj, GenSetTag::S(2)).unwrap(), 1);
        assert_eq!(word_length(&conj, GenSetTag::E(2)).unwrap(), 2 * x.e_length() + 1);
        assert!(word_length(&conj, GenSetTag::E(1)).is_err());
    }
}
