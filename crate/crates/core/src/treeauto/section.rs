use std::collections::HashMap;

use crate::alphabet::{FpVector, TreeSignature};
use crate::error::{Error, Result};

use super::word::{GenLetter, Vertex, Word};

/// Section of a single letter at the first-layer letter `x`.
///
/// Rooted letters have trivial sections; `b_n^k` has section `b_{n+1}^k` at
/// the identity, `e_x^k` at the letters `x` where `b_n` acts rootedly (the far
/// set for growing trees, the basis `V` for regular ones), and is trivial
/// elsewhere.
pub fn letter_section(sig: &TreeSignature, letter: &GenLetter, x: &FpVector) -> Result<Word> {
    let n = letter.level();
    let r = sig.rank_at(n)?;
    if x.rank() != r || x.p() != sig.p() {
        return Err(Error::ShapeMismatch(format!("letter {x} does not live in X_{n}")));
    }
    let letters = match letter {
        GenLetter::B { exp, .. } => b_section_letter(sig, n, *exp, x)?.into_iter().collect(),
        GenLetter::Rooted { .. } => Vec::new(),
    };
    Ok(Word::from_parts_unchecked(sig, n + 1, letters))
}

fn b_section_letter(sig: &TreeSignature, n: usize, exp: u32, x: &FpVector) -> Result<Option<GenLetter>> {
    if x.is_zero() {
        return Ok(Some(GenLetter::B { level: n + 1, exp }));
    }
    match sig.b_section_index(n, x)? {
        Some(i) => {
            let v = FpVector::unit(sig.p(), sig.rank_at(n + 1)?, i, exp)?;
            Ok((!v.is_zero()).then_some(GenLetter::Rooted { level: n + 1, vector: v }))
        }
        None => Ok(None),
    }
}

impl Word {
    /// Section `w|_x` at a first-layer letter, collected (unreduced `b` exponents).
    pub fn section_at_letter(&self, x: &FpVector) -> Result<Word> {
        let sig = self.sig();
        let n = self.level();
        let r = sig.rank_at(n)?;
        if x.rank() != r || x.p() != sig.p() {
            return Err(Error::ShapeMismatch(format!("letter {x} does not live in X_{n}")));
        }
        let mut v = x.clone();
        let mut letters = Vec::new();
        for l in self.letters() {
            match l {
                GenLetter::Rooted { vector, .. } => v = v.add(vector)?,
                GenLetter::B { exp, .. } => {
                    if let Some(s) = b_section_letter(sig, n, *exp, &v)? {
                        letters.push(s);
                    }
                }
            }
        }
        Ok(Word::from_parts_unchecked(sig, n + 1, letters).collect())
    }

    /// Section `w|_u`, via `(gh)|_u = g|_u h|_{u.g}` letter by letter.
    pub fn section(&self, u: &Vertex) -> Result<Word> {
        if u.base() != self.level() {
            return Err(Error::ShapeMismatch(format!("vertex below level {} for a word of level {}", u.base(), self.level())));
        }
        let mut w = self.collect();
        for x in u.letters() {
            w = w.section_at_letter(x)?;
        }
        Ok(w)
    }

    /// Image `u.w`.
    pub fn act(&self, u: &Vertex) -> Result<Vertex> {
        if u.base() != self.level() {
            return Err(Error::ShapeMismatch(format!("vertex below level {} for a word of level {}", u.base(), self.level())));
        }
        let mut w = self.collect();
        let mut out = Vec::with_capacity(u.len());
        for (i, x) in u.letters().enumerate() {
            out.push(match w.root_shift() {
                Some(s) => x.add(&s)?,
                None => x.clone(),
            });
            if i + 1 < u.len() {
                w = w.section_at_letter(x)?;
            }
        }
        Ok(Vertex::from_raw(u.base(), out))
    }

    /// The product form `∏ (b^{k_i})^{y_i} · tail`.
    pub fn conj_form(&self) -> Result<ConjForm> {
        let sig = self.sig();
        let mut s = sig.zero(self.level())?;
        let mut factors = Vec::new();
        for l in self.letters() {
            match l {
                GenLetter::Rooted { vector, .. } => s = s.add(vector)?,
                GenLetter::B { exp, .. } => factors.push(ConjFactor { offset: s.neg(), exp: *exp }),
            }
        }
        Ok(ConjForm { factors, tail: s })
    }
}

/// One factor `(b_n^exp)^offset` of a word in product form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjFactor {
    pub offset: FpVector,
    pub exp: u32,
}

/// A word rewritten as `∏ (b_n^{k_i})^{y_i} · tail`.
///
/// The section at `x` is `∏ b_n^{k_i}|_{x - y_i}`: only the offsets
/// themselves (the `b`-active letters) and the translates `y_i + F` can carry
/// nontrivial sections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjForm {
    pub factors: Vec<ConjFactor>,
    pub tail: FpVector,
}

impl ConjForm {
    /// Distinct offsets in order of first appearance.
    pub fn b_active(&self) -> Vec<FpVector> {
        let mut seen = std::collections::HashSet::new();
        self.factors
            .iter()
            .filter(|f| seen.insert(f.offset.clone()))
            .map(|f| f.offset.clone())
            .collect()
    }

    /// Total exponent `K(y)` per offset, reduced mod `p`, in order of first appearance.
    pub fn exponent_sums(&self, p: u32) -> Vec<(FpVector, u32)> {
        let mut order = Vec::new();
        let mut sums: HashMap<FpVector, u64> = HashMap::new();
        for f in &self.factors {
            let e = sums.entry(f.offset.clone()).or_insert_with(|| {
                order.push(f.offset.clone());
                0
            });
            *e += u64::from(f.exp);
        }
        order
            .into_iter()
            .map(|y| {
                let k = (sums[&y] % u64::from(p)) as u32;
                (y, k)
            })
            .collect()
    }

    /// Number of `b` factors after merging equal neighbours.
    pub fn s_length(&self) -> u64 {
        let mut count = 0u64;
        let mut last: Option<&FpVector> = None;
        for f in &self.factors {
            if last != Some(&f.offset) {
                count += 1;
            }
            last = Some(&f.offset);
        }
        count + u64::from(!self.tail.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g3() -> TreeSignature {
        TreeSignature::growing(3).unwrap()
    }

    fn v(p: u32, d: &[u32]) -> FpVector {
        FpVector::from_dense(p, d)
    }

    #[test]
    fn letter_sections_of_b() {
        let sig = g3();
        let b = GenLetter::B { level: 0, exp: 1 };
        assert_eq!(letter_section(&sig, &b, &v(3, &[0])).unwrap().to_string(), "b1");
        assert_eq!(letter_section(&sig, &b, &v(3, &[1])).unwrap().to_string(), "r1:[1,0]");
        assert_eq!(letter_section(&sig, &b, &v(3, &[2])).unwrap().to_string(), "r1:[0,1]");
        let r = GenLetter::Rooted { level: 0, vector: v(3, &[2]) };
        assert!(letter_section(&sig, &r, &v(3, &[1])).unwrap().is_empty());
        assert!(letter_section(&sig, &b, &v(3, &[1, 1])).is_err());
    }

    #[test]
    fn word_sections_and_actions() {
        let sig = g3();
        let w = Word::parse(&sig, 0, "r0:[1] b0").unwrap();
        let u = Vertex::parse(&sig, 0, "[0]").unwrap();
        assert_eq!(w.section(&u).unwrap().to_string(), "r1:[1,0]");
        assert_eq!(w.section(&Vertex::root(0)).unwrap(), w);

        let b0 = Word::parse(&sig, 0, "b0").unwrap();
        let u = Vertex::parse(&sig, 0, "[1][0,0]").unwrap();
        assert_eq!(b0.act(&u).unwrap().to_string(), "[1][1,0]");
        let r = Word::parse(&sig, 0, "r0:[1]").unwrap();
        assert_eq!(r.act(&Vertex::parse(&sig, 0, "[1]").unwrap()).unwrap().to_string(), "[2]");
        assert_eq!(Word::empty(&sig, 0).act(&u).unwrap(), u);

        let cube = Word::parse(&sig, 0, "b0^3").unwrap();
        let s = cube.section(&Vertex::parse(&sig, 0, "[0]").unwrap()).unwrap();
        assert_eq!(s.to_string(), "b1^3");
        assert!(s.normalize().is_empty());
    }

    #[test]
    fn conjugated_b_is_active_at_its_offset() {
        let sig = g3();
        let w = Word::parse(&sig, 0, "r0:[2] b0 r0:[1]").unwrap();
        let cf = w.conj_form().unwrap();
        assert_eq!(cf.b_active(), vec![v(3, &[1])]);
        assert!(cf.tail.is_zero());
        assert_eq!(w.section_at_letter(&v(3, &[1])).unwrap().to_string(), "b1");
        assert_eq!(cf.s_length(), 1);
    }

    #[test]
    fn regular_b_sections_follow_basis() {
        let sig = TreeSignature::regular(3, 2).unwrap();
        let basis = sig.basis_v().unwrap().to_vec();
        let b = Word::b(&sig, 0, 1).unwrap();
        for (i, vi) in basis.iter().enumerate() {
            let s = b.section_at_letter(vi).unwrap();
            let mut e = vec![0; 2];
            e[i] = 1;
            assert_eq!(s, Word::rooted(&sig, 1, v(3, &e)).unwrap());
        }
        assert_eq!(b.section_at_letter(&v(3, &[0, 0])).unwrap().to_string(), "b1");
        assert!(b.section_at_letter(&v(3, &[1, 0])).unwrap().is_empty());
    }
}
