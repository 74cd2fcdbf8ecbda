use std::fmt;

use crate::alphabet::{FpVector, TreeSignature};
use crate::error::{Error, Result};
use crate::group::GroupOps;

/// A single generator power: a rooted letter `x ∈ X_n` or a power `b_n^k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GenLetter {
    Rooted { level: usize, vector: FpVector },
    B { level: usize, exp: u32 },
}

impl GenLetter {
    pub fn level(&self) -> usize {
        match self {
            GenLetter::Rooted { level, .. } | GenLetter::B { level, .. } => *level,
        }
    }

    fn inverse(&self, p: u32) -> Option<GenLetter> {
        match self {
            GenLetter::Rooted { level, vector } => Some(GenLetter::Rooted { level: *level, vector: vector.neg() }),
            GenLetter::B { level, exp } => {
                let e = (p - exp % p) % p;
                (e != 0).then_some(GenLetter::B { level: *level, exp: e })
            }
        }
    }
}

impl fmt::Display for GenLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenLetter::Rooted { level, vector } => write!(f, "r{level}:{vector}"),
            GenLetter::B { level, exp: 1 } => write!(f, "b{level}"),
            GenLetter::B { level, exp } => write!(f, "b{level}^{exp}"),
        }
    }
}

/// A product of generator letters, all living at the same base level.
///
/// Letters may carry unreduced `b` exponents until [`Word::normalize`] is
/// applied; [`Word::collect`] merges without reducing them, which keeps
/// order-`p` statements about `b_n` genuine checks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    sig: TreeSignature,
    level: usize,
    letters: Vec<GenLetter>,
}

impl Word {
    pub fn empty(sig: &TreeSignature, level: usize) -> Self {
        Word { sig: sig.clone(), level, letters: Vec::new() }
    }

    /// Builds a word after checking every letter's level and rank.
    pub fn from_letters(sig: &TreeSignature, level: usize, letters: Vec<GenLetter>) -> Result<Self> {
        for l in &letters {
            if l.level() != level {
                return Err(Error::ShapeMismatch(format!("letter {l} in a word of level {level}")));
            }
            match l {
                GenLetter::Rooted { vector, .. } => {
                    let r = sig.rank_at(level)?;
                    if vector.rank() != r || vector.p() != sig.p() {
                        return Err(Error::ShapeMismatch(format!("letter {l} does not live in X_{level} (rank {r})")));
                    }
                }
                GenLetter::B { .. } => {
                    if sig.depth_limit().is_some() {
                        return Err(Error::WrongFamily("explicit signatures have no b generator"));
                    }
                }
            }
        }
        Ok(Word { sig: sig.clone(), level, letters })
    }

    /// `b_level^exp`.
    pub fn b(sig: &TreeSignature, level: usize, exp: u32) -> Result<Self> {
        Word::from_letters(sig, level, vec![GenLetter::B { level, exp }])
    }

    /// The rooted automorphism `x ∈ X_level`.
    pub fn rooted(sig: &TreeSignature, level: usize, vector: FpVector) -> Result<Self> {
        Word::from_letters(sig, level, vec![GenLetter::Rooted { level, vector }])
    }

    pub(crate) fn from_parts_unchecked(sig: &TreeSignature, level: usize, letters: Vec<GenLetter>) -> Self {
        Word { sig: sig.clone(), level, letters }
    }

    pub fn sig(&self) -> &TreeSignature {
        &self.sig
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn letters(&self) -> &[GenLetter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    fn check_compatible(&self, other: &Word) -> Result<()> {
        if self.level != other.level || self.sig != other.sig {
            return Err(Error::ShapeMismatch(format!(
                "words at level {} and {} (or different trees)",
                self.level, other.level
            )));
        }
        Ok(())
    }

    /// Concatenation `self · other`, normalized.
    pub fn mul(&self, other: &Word) -> Result<Word> {
        self.check_compatible(other)?;
        let mut letters = self.letters.clone();
        letters.extend(other.letters.iter().cloned());
        Ok(Word { sig: self.sig.clone(), level: self.level, letters }.normalize())
    }

    /// Concatenation without any merging.
    pub fn concat(&self, other: &Word) -> Result<Word> {
        self.check_compatible(other)?;
        let mut letters = self.letters.clone();
        letters.extend(other.letters.iter().cloned());
        Ok(Word { sig: self.sig.clone(), level: self.level, letters })
    }

    pub fn inverse(&self) -> Word {
        let p = self.sig.p();
        let letters = self.letters.iter().rev().filter_map(|l| l.inverse(p)).collect();
        Word { sig: self.sig.clone(), level: self.level, letters }
    }

    /// `self^k` for `k ≥ 0`, normalized.
    pub fn pow(&self, k: u64) -> Word {
        let mut acc = Word::empty(&self.sig, self.level);
        let mut base = self.normalize();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base).expect("same level");
            }
            base = base.mul(&base).expect("same level");
            k >>= 1;
        }
        acc
    }

    /// `self^by = by⁻¹ · self · by`, normalized.
    pub fn conj(&self, by: &Word) -> Result<Word> {
        by.inverse().mul(self)?.mul(by)
    }

    /// `[a, b] = a⁻¹ b⁻¹ a b`, normalized.
    pub fn comm(a: &Word, b: &Word) -> Result<Word> {
        a.inverse().mul(&b.inverse())?.mul(a)?.mul(b)
    }

    /// Left-normed commutator `[a_1, a_2, ..., a_k]`.
    pub fn comm_n(parts: &[&Word]) -> Result<Word> {
        let (first, rest) = parts
            .split_first()
            .ok_or_else(|| Error::PreconditionViolated("empty commutator".into()))?;
        rest.iter().try_fold((*first).clone(), |acc, w| Word::comm(&acc, w))
    }

    fn merge(&self, reduce_b: bool) -> Word {
        let p = self.sig.p();
        let mut out: Vec<GenLetter> = Vec::with_capacity(self.letters.len());
        for letter in &self.letters {
            let letter = match letter {
                GenLetter::B { level, exp } if reduce_b => GenLetter::B { level: *level, exp: exp % p },
                other => other.clone(),
            };
            match letter {
                GenLetter::B { exp: 0, .. } => continue,
                GenLetter::Rooted { ref vector, .. } if vector.is_zero() => continue,
                _ => {}
            }
            let merged = match (out.last_mut(), &letter) {
                (Some(GenLetter::Rooted { vector: a, .. }), GenLetter::Rooted { vector: b, .. }) => {
                    *a = a.add(b).expect("letters of one level share a shape");
                    Some(a.is_zero())
                }
                (Some(GenLetter::B { exp: a, .. }), GenLetter::B { exp: b, .. }) => {
                    *a = if reduce_b { (*a + b) % p } else { *a + b };
                    Some(*a == 0)
                }
                _ => None,
            };
            match merged {
                Some(true) => {
                    out.pop();
                }
                Some(false) => {}
                None => out.push(letter),
            }
        }
        Word { sig: self.sig.clone(), level: self.level, letters: out }
    }

    /// Merges adjacent letters, drops trivial ones and reduces `b` exponents mod `p`.
    pub fn normalize(&self) -> Word {
        self.merge(true)
    }

    /// Like [`Word::normalize`] but keeps `b` exponents unreduced.
    pub fn collect(&self) -> Word {
        self.merge(false)
    }

    /// Sum of the rooted letters, or `None` when the word has none.
    pub fn root_shift(&self) -> Option<FpVector> {
        let mut acc: Option<FpVector> = None;
        for l in &self.letters {
            if let GenLetter::Rooted { vector, .. } = l {
                acc = Some(match acc {
                    None => vector.clone(),
                    Some(a) => a.add(vector).expect("letters of one level share a shape"),
                });
            }
        }
        acc
    }

    /// The translation by which the word acts on the first letter of every vertex.
    pub fn first_layer_vector(&self) -> Result<FpVector> {
        match self.root_shift() {
            Some(v) => Ok(v),
            None => self.sig.zero(self.level),
        }
    }

    /// Parses the word grammar `term (SP term)*` with
    /// `term := ('b' LEVEL | 'r' LEVEL ':' VEC) ('^' EXP)?`.
    ///
    /// `""` and `id` denote the empty word at `level`.
    pub fn parse(sig: &TreeSignature, level: usize, text: &str) -> Result<Word> {
        let text = text.trim();
        if text.is_empty() || text == "id" {
            return Ok(Word::empty(sig, level));
        }
        let p = sig.p();
        let mut letters = Vec::new();
        for term in text.split_whitespace() {
            let (body, exp) = match term.rsplit_once('^') {
                Some((b, e)) => {
                    let e: i64 = e.parse().map_err(|_| Error::Parse(format!("bad exponent in `{term}`")))?;
                    (b, Some(e))
                }
                None => (term, None),
            };
            let letter = if let Some(rest) = body.strip_prefix('b') {
                let lv: usize = rest.parse().map_err(|_| Error::Parse(format!("bad level in `{term}`")))?;
                let exp = match exp {
                    None => 1,
                    Some(e) if e >= 0 => u32::try_from(e).map_err(|_| Error::Parse(format!("exponent too large in `{term}`")))?,
                    Some(e) => e.rem_euclid(i64::from(p)) as u32,
                };
                GenLetter::B { level: lv, exp }
            } else if let Some(rest) = body.strip_prefix('r') {
                let (lv, vec) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("rooted letter `{term}` lacks `:`")))?;
                let lv: usize = lv.parse().map_err(|_| Error::Parse(format!("bad level in `{term}`")))?;
                let v = FpVector::parse(p, Some(sig.rank_at(lv)?), vec)?;
                let k = exp.unwrap_or(1).rem_euclid(i64::from(p)) as u32;
                GenLetter::Rooted { level: lv, vector: v.scale(k) }
            } else {
                return Err(Error::Parse(format!("bad term `{term}`")));
            };
            letters.push(letter);
        }
        Word::from_letters(sig, level, letters)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "id");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// A vertex `x_n x_{n+1} ... x_{n+m-1}` below a vertex of layer `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    base: usize,
    letters: Vec<FpVectorKey>,
}

/// Ordering wrapper so vertices sort by dense tuples.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct FpVectorKey(FpVector);

impl PartialOrd for FpVectorKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FpVectorKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.dense_cmp(&other.0)
    }
}

impl Vertex {
    pub fn root(base: usize) -> Self {
        Vertex { base, letters: Vec::new() }
    }

    pub fn new(sig: &TreeSignature, base: usize, letters: Vec<FpVector>) -> Result<Self> {
        for (i, x) in letters.iter().enumerate() {
            let r = sig.rank_at(base + i)?;
            if x.rank() != r || x.p() != sig.p() {
                return Err(Error::ShapeMismatch(format!("letter {x} does not live in X_{} (rank {r})", base + i)));
            }
        }
        Ok(Vertex { base, letters: letters.into_iter().map(FpVectorKey).collect() })
    }

    /// The all-zero vertex of length `len`.
    pub fn zeros(sig: &TreeSignature, base: usize, len: usize) -> Result<Self> {
        let letters = (0..len).map(|i| sig.zero(base + i)).collect::<Result<Vec<_>>>()?;
        Vertex::new(sig, base, letters)
    }

    pub fn base(&self) -> usize {
        self.base
    }

    /// Number of letters (the layer relative to the base level).
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letter(&self, i: usize) -> &FpVector {
        &self.letters[i].0
    }

    pub fn letters(&self) -> impl Iterator<Item = &FpVector> {
        self.letters.iter().map(|k| &k.0)
    }

    pub fn push(&self, x: FpVector) -> Vertex {
        let mut out = self.clone();
        out.letters.push(FpVectorKey(x));
        out
    }

    /// The vertex with the first letter removed, based one level lower in the tree.
    pub fn tail(&self) -> Vertex {
        Vertex { base: self.base + 1, letters: self.letters[1..].to_vec() }
    }

    pub(crate) fn from_raw(base: usize, letters: Vec<FpVector>) -> Vertex {
        Vertex { base, letters: letters.into_iter().map(FpVectorKey).collect() }
    }

    /// Parses concatenated vectors such as `[1][0,0]`.
    pub fn parse(sig: &TreeSignature, base: usize, text: &str) -> Result<Vertex> {
        let text = text.trim();
        let mut letters = Vec::new();
        let mut rest = text;
        while !rest.is_empty() {
            let close = match rest.chars().next() {
                Some('[') => rest.find(']'),
                Some('{') => rest.find('}'),
                _ => None,
            }
            .ok_or_else(|| Error::Parse(format!("bad vertex `{text}`")))?;
            let level = base + letters.len();
            letters.push(FpVector::parse(sig.p(), Some(sig.rank_at(level)?), &rest[..=close])?);
            rest = rest[close + 1..].trim_start();
        }
        Vertex::new(sig, base, letters)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "∅");
        }
        for x in &self.letters {
            write!(f, "{}", x.0)?;
        }
        Ok(())
    }
}

/// The group of words at a fixed level, with normalizing multiplication.
#[derive(Clone, Debug)]
pub struct WordGroup {
    pub sig: TreeSignature,
    pub level: usize,
}

impl WordGroup {
    pub fn new(sig: &TreeSignature, level: usize) -> Self {
        WordGroup { sig: sig.clone(), level }
    }
}

impl GroupOps for WordGroup {
    type Elem = Word;

    fn mul(&self, a: &Word, b: &Word) -> Word {
        a.mul(b).expect("words of one group share a level")
    }

    fn inv(&self, a: &Word) -> Word {
        a.inverse()
    }

    fn id(&self) -> Word {
        Word::empty(&self.sig, self.level)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g3() -> TreeSignature {
        TreeSignature::growing(3).unwrap()
    }

    #[test]
    fn parse_and_display_round_trip() {
        let sig = g3();
        let w = Word::parse(&sig, 0, "b0^2 r0:[1] b0").unwrap();
        assert_eq!(w.to_string(), "b0^2 r0:[1] b0");
        assert_eq!(w.len(), 3);
        assert_eq!(Word::parse(&sig, 0, "").unwrap().to_string(), "id");
        assert!(Word::parse(&sig, 0, "b1").is_err());
        assert!(Word::parse(&sig, 0, "r0:[1,1]").is_err());
        assert!(Word::parse(&sig, 0, "q0").is_err());
        let w = Word::parse(&sig, 1, "r1:[1,2]^2").unwrap();
        assert_eq!(w.to_string(), "r1:[2,1]");
    }

    #[test]
    fn normalize_examples() {
        let sig = g3();
        let n = |s: &str| Word::parse(&sig, 0, s).unwrap().normalize().to_string();
        assert_eq!(n("r0:[1] r0:[2]"), "id");
        assert_eq!(n("b0 b0^2"), "id");
        assert_eq!(n("b0 r0:[1] r0:[1]"), "b0 r0:[2]");
        assert_eq!(n("r0:[1] b0 b0^2 r0:[2]"), "id");
        assert_eq!(Word::parse(&sig, 0, "b0 b0^2").unwrap().collect().to_string(), "b0^3");
    }

    #[test]
    fn first_layer_vector_examples() {
        let sig = g3();
        let w = Word::parse(&sig, 0, "b0 r0:[1] b0^2 r0:[2]").unwrap();
        assert!(w.first_layer_vector().unwrap().is_zero());
        let sig2 = TreeSignature::growing(2).unwrap();
        let w = Word::parse(&sig2, 0, "r0:[1,1]").unwrap();
        assert_eq!(w.first_layer_vector().unwrap().to_dense(), vec![1, 1, 0, 0, 0]);
        assert!(Word::empty(&sig, 0).first_layer_vector().unwrap().is_zero());
    }

    #[test]
    fn inverse_and_commutator_shapes() {
        let sig = g3();
        let g = Word::parse(&sig, 0, "r0:[1]").unwrap();
        let h = Word::parse(&sig, 0, "b0").unwrap();
        assert_eq!(Word::comm(&g, &h).unwrap().to_string(), "r0:[2] b0^2 r0:[1] b0");
        assert!(g.mul(&g.inverse()).unwrap().is_empty());
        assert_eq!(h.pow(3).to_string(), "id");
        assert_eq!(h.pow(2).to_string(), "b0^2");
        assert_eq!(h.conj(&g).unwrap().to_string(), "r0:[2] b0 r0:[1]");
    }

    #[test]
    fn vertex_parsing() {
        let sig = g3();
        let u = Vertex::parse(&sig, 0, "[1][0,2]").unwrap();
        assert_eq!(u.len(), 2);
        assert_eq!(u.to_string(), "[1][0,2]");
        assert!(Vertex::parse(&sig, 0, "[1][0]").is_ok());
        assert!(Vertex::parse(&sig, 0, "[1,1]").is_err());
        assert_eq!(Vertex::root(0).to_string(), "∅");
    }
}
