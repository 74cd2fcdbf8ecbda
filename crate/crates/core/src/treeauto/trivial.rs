use std::collections::{HashSet, VecDeque};
use std::fmt;

use crate::alphabet::FpVector;
use crate::error::Result;

use super::section::ConjForm;
use super::word::{GenLetter, Vertex, Word};

/// Outcome of [`prove_trivial`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TrivialityVerdict {
    /// A closed set of sections was found; the word is the identity.
    Proven,
    /// The word moves the witness vertex.
    RefutedAt(Vertex),
    /// Every layer up to `d` is fixed, but the search stopped at the depth cap.
    TrivialToDepth { d: usize },
    /// The closure budget ran out (or a level was too large to represent).
    Unknown { reason: String },
}

impl fmt::Display for TrivialityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrivialityVerdict::Proven => write!(f, "proven"),
            TrivialityVerdict::RefutedAt(u) => write!(f, "refuted at {u}"),
            TrivialityVerdict::TrivialToDepth { d } => write!(f, "trivial to depth {d}"),
            TrivialityVerdict::Unknown { reason } => write!(f, "unknown ({reason})"),
        }
    }
}

/// Finds a letter `x` outside `exclude` lying in a translate `y + S` with
/// `K(y) ≢ 0`; the section there is a nonzero rooted letter.
fn class_witness(w: &Word, cf: &ConjForm, exclude: &HashSet<FpVector>) -> Result<Option<FpVector>> {
    let sig = w.sig();
    let n = w.level();
    for (y, k) in cf.exponent_sums(sig.p()) {
        if k == 0 {
            continue;
        }
        // distinct special letters give distinct translates, so this many suffice
        let needed = exclude.len() + 1;
        for f in sig.special_letters(n)?.take(needed) {
            let x = y.add(&f)?;
            if !exclude.contains(&x) {
                return Ok(Some(x));
            }
        }
    }
    Ok(None)
}

/// Whether the section at the `b`-active letter `x` has a zero root shift,
/// decided from the offsets alone (no level-`n+1` vectors are built).
fn section_root_shift_vanishes(w: &Word, cf: &ConjForm, x: &FpVector) -> Result<bool> {
    let sig = w.sig();
    for (y, k) in cf.exponent_sums(sig.p()) {
        if k != 0 && y != *x && sig.is_special(w.level(), &x.sub(&y)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn has_b(w: &Word) -> bool {
    w.letters().iter().any(|l| matches!(l, GenLetter::B { .. }))
}

/// For a word made of `b`-letters only, their exponent sum mod `p`.
///
/// Such words appear deep in section recursions, at levels whose rank may
/// not even fit a machine word, so they are decided without building vectors.
fn pure_b_exponent(w: &Word) -> Option<u64> {
    let mut k = 0u64;
    for l in w.letters() {
        match l {
            GenLetter::B { exp, .. } => k += u64::from(*exp),
            GenLetter::Rooted { .. } => return None,
        }
    }
    Some(k % u64::from(w.sig().p()))
}

fn trivial_rec(w: &Word, d: usize) -> Result<bool> {
    if d == 0 {
        return Ok(true);
    }
    if w.root_shift().is_some_and(|s| !s.is_zero()) {
        return Ok(false);
    }
    if d == 1 || !has_b(w) {
        return Ok(true);
    }
    if let Some(k) = pure_b_exponent(w) {
        return Ok(k == 0);
    }
    sections_trivial(w, &HashSet::new(), d - 1)
}

/// All first-layer sections at letters outside `exclude` are trivial to depth `d`.
fn sections_trivial(w: &Word, exclude: &HashSet<FpVector>, d: usize) -> Result<bool> {
    if d == 0 || !has_b(w) {
        return Ok(true);
    }
    if let Some(k) = pure_b_exponent(w) {
        if k == 0 {
            return Ok(true);
        }
        // b^k has a nonzero rooted section at every special letter
        let specials = w.sig().special_count(w.level()).unwrap_or(u64::MAX);
        if specials > exclude.len() as u64 {
            return Ok(false);
        }
    }
    let cf = w.conj_form()?;
    let active: Vec<FpVector> = cf.b_active().into_iter().filter(|x| !exclude.contains(x)).collect();
    let mut skip: HashSet<FpVector> = exclude.clone();
    skip.extend(cf.b_active());
    if class_witness(w, &cf, &skip)?.is_some() {
        return Ok(false);
    }
    for x in &active {
        let ok = if d == 1 {
            section_root_shift_vanishes(w, &cf, x)?
        } else {
            trivial_rec(&w.section_at_letter(x)?, d)?
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether `w` fixes every vertex of layers `1..=d` (relative to its level).
///
/// Uses the `b`-active/translate partition of each layer; alphabets are
/// never enumerated.
pub fn is_trivial_to_depth(w: &Word, d: usize) -> Result<bool> {
    trivial_rec(&w.collect(), d)
}

/// `g` and `h` agree modulo the stabiliser of layer `d`.
pub fn equal_to_depth(g: &Word, h: &Word, d: usize) -> Result<bool> {
    is_trivial_to_depth(&g.concat(&h.inverse())?, d)
}

/// Whether every first-layer section of `w` at a letter outside `exclude`
/// is trivial to depth `d`.
pub fn trivial_outside_to_depth(w: &Word, exclude: &[FpVector], d: usize) -> Result<bool> {
    let exclude: HashSet<FpVector> = exclude.iter().cloned().collect();
    sections_trivial(&w.collect(), &exclude, d)
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum KeyLetter {
    R(FpVector),
    B(u32),
}

fn closure_key(w: &Word) -> (Option<usize>, Vec<KeyLetter>) {
    // regular trees have identical alphabets on every level, so sections of
    // different levels may be identified
    let level = (!w.sig().is_regular()).then_some(w.level());
    let letters = w
        .letters()
        .iter()
        .map(|l| match l {
            GenLetter::Rooted { vector, .. } => KeyLetter::R(vector.clone()),
            GenLetter::B { exp, .. } => KeyLetter::B(*exp),
        })
        .collect();
    (level, letters)
}

/// Attempts to decide whether `w` is the identity.
///
/// Explores the set of sections reachable through `b`-active letters; if it
/// closes up with every member fixing its first layer and every translate
/// class vanishing, the word is trivial. `budget` bounds the number of
/// distinct sections, `depth_cap` the exploration depth.
pub fn prove_trivial(w: &Word, budget: usize, depth_cap: usize) -> TrivialityVerdict {
    match prove_inner(w, budget, depth_cap) {
        Ok(v) => v,
        Err(e) => TrivialityVerdict::Unknown { reason: e.to_string() },
    }
}

fn prove_inner(w: &Word, budget: usize, depth_cap: usize) -> Result<TrivialityVerdict> {
    let sig = w.sig().clone();
    let start = w.collect();
    let mut seen = HashSet::new();
    seen.insert(closure_key(&start));
    let mut queue = VecDeque::new();
    queue.push_back((start, Vertex::root(w.level()), 0usize));
    let mut capped = false;
    while let Some((cur, path, depth)) = queue.pop_front() {
        if cur.root_shift().is_some_and(|s| !s.is_zero()) {
            return Ok(TrivialityVerdict::RefutedAt(path.push(sig.zero(cur.level())?)));
        }
        if !has_b(&cur) {
            continue;
        }
        let cf = cur.conj_form()?;
        let active = cf.b_active();
        let skip: HashSet<FpVector> = active.iter().cloned().collect();
        if let Some(x) = class_witness(&cur, &cf, &skip)? {
            let z = sig.zero(cur.level() + 1)?;
            return Ok(TrivialityVerdict::RefutedAt(path.push(x).push(z)));
        }
        for x in active {
            let sec = cur.section_at_letter(&x)?;
            if !seen.insert(closure_key(&sec)) {
                continue;
            }
            if depth >= depth_cap {
                capped = true;
                continue;
            }
            if seen.len() > budget {
                return Ok(TrivialityVerdict::Unknown { reason: format!("closure exceeded {budget} sections") });
            }
            queue.push_back((sec, path.push(x), depth + 1));
        }
    }
    Ok(if capped { TrivialityVerdict::TrivialToDepth { d: depth_cap + 1 } } else { TrivialityVerdict::Proven })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::TreeSignature;

    fn word(sig: &TreeSignature, s: &str) -> Word {
        Word::parse(sig, 0, s).unwrap()
    }

    #[test]
    fn order_p_on_growing_trees() {
        let sig = TreeSignature::growing(3).unwrap();
        assert!(is_trivial_to_depth(&word(&sig, "b0^3"), 6).unwrap());
        assert!(!is_trivial_to_depth(&word(&sig, "b0^2"), 2).unwrap());
        let sig2 = TreeSignature::growing(2).unwrap();
        assert!(is_trivial_to_depth(&word(&sig2, "b0^2"), 6).unwrap());
        assert!(!is_trivial_to_depth(&word(&sig2, "b0"), 2).unwrap());
    }

    #[test]
    fn b_fixes_first_layer_only() {
        let sig = TreeSignature::growing(3).unwrap();
        let b = word(&sig, "b0");
        assert!(is_trivial_to_depth(&b, 1).unwrap());
        assert!(!is_trivial_to_depth(&b, 2).unwrap());
        assert!(is_trivial_to_depth(&b, 0).unwrap());
        let g = word(&sig, "b0 r0:[1] b0 r0:[1] r0:[1]");
        assert!(equal_to_depth(&g, &g.normalize(), 5).unwrap());
    }

    #[test]
    fn closure_proofs_on_regular_trees() {
        for r in [2, 5, 8] {
            let sig = TreeSignature::regular(3, r).unwrap();
            assert_eq!(prove_trivial(&word(&sig, "b0^3"), 1000, 50), TrivialityVerdict::Proven);
        }
        let sig = TreeSignature::regular(3, 5).unwrap();
        match prove_trivial(&word(&sig, "b0"), 1000, 50) {
            TrivialityVerdict::RefutedAt(u) => {
                assert_eq!(u.len(), 2);
                let b = word(&sig, "b0");
                assert_ne!(b.act(&u).unwrap(), u);
            }
            other => panic!("unexpected {other}"),
        }
        assert_eq!(prove_trivial(&Word::empty(&sig, 0), 10, 10), TrivialityVerdict::Proven);
    }

    #[test]
    fn growing_closure_hits_depth_cap() {
        let sig = TreeSignature::growing(3).unwrap();
        assert_eq!(prove_trivial(&word(&sig, "b0^3"), 1000, 3), TrivialityVerdict::TrivialToDepth { d: 4 });
    }

    #[test]
    fn refutation_witness_moves() {
        let sig = TreeSignature::growing(3).unwrap();
        let g = word(&sig, "b0 r0:[1] b0 r0:[2]");
        match prove_trivial(&g, 100, 5) {
            TrivialityVerdict::RefutedAt(u) => assert_ne!(g.act(&u).unwrap(), u),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn trivial_outside_excluded_letters() {
        let sig = TreeSignature::growing(3).unwrap();
        let g = word(&sig, "b0");
        assert!(!trivial_outside_to_depth(&g, &[], 1).unwrap());
        let zero = FpVector::from_dense(3, &[0]);
        let one = FpVector::from_dense(3, &[1]);
        let two = FpVector::from_dense(3, &[2]);
        assert!(trivial_outside_to_depth(&g, &[zero, one, two], 4).unwrap());
    }
}
