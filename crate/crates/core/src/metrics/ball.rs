use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alphabet::{FpVector, TreeSignature};
use crate::error::{Error, Result};
use crate::treeauto::{GenLetter, Word};

use super::GenSetTag;

/// Word count above which [`CheckMode::Auto`] switches to sampling.
pub const DEFAULT_WORD_CAP: u128 = 1_000_000;

/// How a verifier chooses the words it quantifies over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    Exhaustive,
    Sampled { count: usize, seed: u64 },
    /// Exhaustive when the ball has at most `cap` raw products, sampled otherwise.
    Auto { cap: u128, count: usize, seed: u64 },
}

fn e_alphabet_size(sig: &TreeSignature, n: usize) -> Result<u64> {
    let p = u64::from(sig.p());
    let r = sig.rank_at(n)?;
    r.checked_add(1).and_then(|x| x.checked_mul(p - 1)).ok_or(Error::Overflow("alphabet size"))
}

fn e_letter(sig: &TreeSignature, n: usize, idx: u64) -> Result<GenLetter> {
    let p = sig.p();
    let per = u64::from(p - 1);
    if idx < per {
        return Ok(GenLetter::B { level: n, exp: idx as u32 + 1 });
    }
    let rest = idx - per;
    let v = FpVector::unit(p, sig.rank_at(n)?, rest / per, (rest % per) as u32 + 1)?;
    Ok(GenLetter::Rooted { level: n, vector: v })
}

/// The letters of `E|_n`: `b_n^k` and `e_i^k` for every axis, `k ∈ [1, p-1]`.
pub fn e_alphabet(sig: &TreeSignature, n: usize) -> Result<Vec<Word>> {
    let size = e_alphabet_size(sig, n)?;
    (0..size).map(|i| Word::from_letters(sig, n, vec![e_letter(sig, n, i)?])).collect()
}

fn all_vectors(sig: &TreeSignature, n: usize) -> Result<Vec<FpVector>> {
    let p = sig.p();
    let r = sig.rank_at(n)?;
    let size = sig.alphabet_size(n)?;
    let mut out = Vec::with_capacity(size as usize);
    for mut code in 0..size {
        let mut dense = Vec::with_capacity(r as usize);
        for _ in 0..r {
            dense.push((code % u64::from(p)) as u32);
            code /= u64::from(p);
        }
        out.push(FpVector::from_dense(p, &dense));
    }
    Ok(out)
}

fn s_alphabet(sig: &TreeSignature, n: usize) -> Result<Vec<Word>> {
    let mut out = Vec::new();
    for x in all_vectors(sig, n)? {
        for k in 1..sig.p() {
            out.push(Word::b(sig, n, k)?.conj(&Word::rooted(sig, n, x.clone())?)?);
        }
        if !x.is_zero() {
            out.push(Word::rooted(sig, n, x)?);
        }
    }
    Ok(out)
}

fn raw_ball_size(alphabet: u128, t: u64) -> u128 {
    let mut total: u128 = 1;
    let mut layer: u128 = 1;
    for _ in 0..t {
        layer = layer.saturating_mul(alphabet);
        total = total.saturating_add(layer);
    }
    total
}

fn alphabet_count(sig: &TreeSignature, tag: GenSetTag) -> Result<u128> {
    let n = tag.level();
    match tag {
        GenSetTag::E(_) => Ok(u128::from(e_alphabet_size(sig, n)?)),
        GenSetTag::S(_) => {
            let size = u128::from(sig.alphabet_size(n)?);
            Ok(size * u128::from(sig.p()) - 1)
        }
    }
}

/// All normalized words of tag-length at most `t`, in breadth-first order.
///
/// Fails with `CapExceeded` when the number of raw products exceeds `cap`.
pub fn enumerate_ball(sig: &TreeSignature, tag: GenSetTag, t: u64, cap: u128) -> Result<Vec<Word>> {
    let needed = raw_ball_size(alphabet_count(sig, tag)?, t);
    if needed > cap {
        return Err(Error::CapExceeded { needed, cap });
    }
    let n = tag.level();
    let alphabet = match tag {
        GenSetTag::E(_) => e_alphabet(sig, n)?,
        GenSetTag::S(_) => s_alphabet(sig, n)?,
    };
    let empty = Word::empty(sig, n);
    let mut seen: HashSet<Word> = HashSet::from([empty.clone()]);
    let mut out = vec![empty.clone()];
    let mut frontier = vec![empty];
    for _ in 0..t {
        let mut next = Vec::new();
        for w in &frontier {
            for a in &alphabet {
                let prod = w.mul(a)?;
                if seen.insert(prod.clone()) {
                    out.push(prod.clone());
                    next.push(prod);
                }
            }
        }
        frontier = next;
    }
    Ok(out)
}

fn random_vector(rng: &mut ChaCha8Rng, p: u32, rank: u64) -> FpVector {
    let entries: Vec<(u64, u32)> = (0..rank).map(|i| (i, rng.gen_range(0..p))).collect();
    FpVector::from_sparse(p, rank, entries).expect("indices below rank")
}

/// `count` words drawn with a length uniform in `[0, t]` and letters uniform
/// in the tag alphabet, from a seeded generator.
///
/// For `S|_n`, a letter is a conjugated `b`-power with probability `(p-1)/p`
/// (conjugator uniform in `X_n`) and a uniform nonzero rooted vector otherwise.
pub fn sample_ball(sig: &TreeSignature, tag: GenSetTag, t: u64, count: usize, seed: u64) -> Result<Vec<Word>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = tag.level();
    let p = sig.p();
    let rank = sig.rank_at(n)?;
    let e_size = e_alphabet_size(sig, n)?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let len = rng.gen_range(0..=t);
        let mut w = Word::empty(sig, n);
        for _ in 0..len {
            let letter = match tag {
                GenSetTag::E(_) => Word::from_letters(sig, n, vec![e_letter(sig, n, rng.gen_range(0..e_size))?])?,
                GenSetTag::S(_) => {
                    let u = rng.gen_range(0..p);
                    if u < p - 1 {
                        let x = random_vector(&mut rng, p, rank);
                        Word::b(sig, n, u + 1)?.conj(&Word::rooted(sig, n, x)?)?
                    } else {
                        let mut x = random_vector(&mut rng, p, rank);
                        while x.is_zero() {
                            x = random_vector(&mut rng, p, rank);
                        }
                        Word::rooted(sig, n, x)?
                    }
                }
            };
            w = w.mul(&letter)?;
        }
        out.push(w);
    }
    Ok(out)
}

/// Resolves a [`CheckMode`] into a word list plus the mode label and seed for reports.
pub fn ball_words(sig: &TreeSignature, tag: GenSetTag, t: u64, mode: CheckMode) -> Result<(Vec<Word>, &'static str, Option<u64>)> {
    match mode {
        CheckMode::Exhaustive => Ok((enumerate_ball(sig, tag, t, u128::MAX)?, "exhaustive", None)),
        CheckMode::Sampled { count, seed } => Ok((sample_ball(sig, tag, t, count, seed)?, "sampled", Some(seed))),
        CheckMode::Auto { cap, count, seed } => match enumerate_ball(sig, tag, t, cap) {
            Ok(words) => Ok((words, "exhaustive", None)),
            Err(Error::CapExceeded { .. }) => Ok((sample_ball(sig, tag, t, count, seed)?, "sampled", Some(seed))),
            Err(e) => Err(e),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::word_length;

    #[test]
    fn small_balls() {
        let sig = TreeSignature::growing(3).unwrap();
        assert_eq!(enumerate_ball(&sig, GenSetTag::E(2), 1, 1000).unwrap().len(), 11);
        assert_eq!(enumerate_ball(&sig, GenSetTag::E(2), 0, 1000).unwrap().len(), 1);
        assert!(matches!(enumerate_ball(&sig, GenSetTag::E(3), 5, 1000), Err(Error::CapExceeded { .. })));
        // S|_0 for p = 3: two conjugates of each b-power and two rooted letters
        assert_eq!(enumerate_ball(&sig, GenSetTag::S(0), 1, 1000).unwrap().len(), 1 + 6 + 2);
    }

    #[test]
    fn balls_are_nested_and_short() {
        let sig = TreeSignature::growing(3).unwrap();
        let b1: HashSet<Word> = enumerate_ball(&sig, GenSetTag::E(1), 1, 10_000).unwrap().into_iter().collect();
        let b2 = enumerate_ball(&sig, GenSetTag::E(1), 2, 10_000).unwrap();
        let b2set: HashSet<Word> = b2.iter().cloned().collect();
        assert!(b1.is_subset(&b2set));
        assert!(b2.iter().all(|w| word_length(w, GenSetTag::E(1)).unwrap() <= 2));
    }

    #[test]
    fn sampling_is_seeded() {
        let sig = TreeSignature::growing(3).unwrap();
        let a = sample_ball(&sig, GenSetTag::E(3), 16, 20, 7).unwrap();
        let b = sample_ball(&sig, GenSetTag::E(3), 16, 20, 7).unwrap();
        let c = sample_ball(&sig, GenSetTag::E(3), 16, 20, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|w| word_length(w, GenSetTag::E(3)).unwrap() <= 16));
        let s = sample_ball(&sig, GenSetTag::S(1), 3, 20, 1).unwrap();
        assert!(s.iter().all(|w| word_length(w, GenSetTag::S(1)).unwrap() <= 3));
    }

    #[test]
    fn auto_mode_switches() {
        let sig = TreeSignature::growing(3).unwrap();
        let (_, mode, _) = ball_words(&sig, GenSetTag::E(2), 2, CheckMode::Auto { cap: 1000, count: 5, seed: 1 }).unwrap();
        assert_eq!(mode, "exhaustive");
        let (w, mode, seed) = ball_words(&sig, GenSetTag::E(2), 4, CheckMode::Auto { cap: 1000, count: 5, seed: 1 }).unwrap();
        assert_eq!((w.len(), mode, seed), (5, "sampled", Some(1)));
    }
}
