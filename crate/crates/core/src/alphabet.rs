//! Level alphabets `X_n`: elementary abelian `p`-groups stored as sparse
//! coordinate maps, together with the rank sequences, far sets and length
//! functions that drive the tree constructions.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest rank for which a far set may be collected into memory.
pub const MAX_MATERIALIZED_RANK: u64 = 20;

/// `tetr(base, 0) = 1`, `tetr(base, m + 1) = base^tetr(base, m)`.
pub fn tetr(base: u64, m: u32) -> Result<u64> {
    let mut acc: u64 = 1;
    for _ in 0..m {
        let e = u32::try_from(acc).map_err(|_| Error::Overflow("tetration"))?;
        acc = base.checked_pow(e).ok_or(Error::Overflow("tetration"))?;
    }
    Ok(acc)
}

/// Binomial coefficient with overflow detection.
pub fn binomial(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul(u128::from(n - i))
            .ok_or(Error::Overflow("binomial"))?
            / u128::from(i + 1);
    }
    u64::try_from(acc).map_err(|_| Error::Overflow("binomial"))
}

/// `iter_binom(n0, m, 0) = n0`, `iter_binom(n0, m, k) = C(iter_binom(n0, m, k - 1), m)`.
pub fn iter_binom(n0: u64, m: u64, k: u32) -> Result<u64> {
    if m == 0 || n0 <= m {
        return Err(Error::PreconditionViolated(format!(
            "iterated binomial needs n0 > m >= 1 (got n0 = {n0}, m = {m})"
        )));
    }
    let mut acc = n0;
    for _ in 0..k {
        acc = binomial(acc, m)?;
    }
    Ok(acc)
}

/// An element of `C_p^rank`, stored as sorted `(index, value)` pairs with
/// values in `[1, p - 1]`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FpVector {
    p: u32,
    rank: u64,
    coords: Vec<(u64, u32)>,
}

impl FpVector {
    pub fn zero(p: u32, rank: u64) -> Self {
        FpVector { p, rank, coords: Vec::new() }
    }

    pub fn unit(p: u32, rank: u64, index: u64, value: u32) -> Result<Self> {
        Self::from_sparse(p, rank, [(index, value)])
    }

    /// Builds a vector from a dense coordinate list; entries are reduced mod `p`.
    pub fn from_dense(p: u32, dense: &[u32]) -> Self {
        let coords = dense
            .iter()
            .enumerate()
            .filter_map(|(i, &v)| {
                let v = v % p;
                (v != 0).then_some((i as u64, v))
            })
            .collect();
        FpVector { p, rank: dense.len() as u64, coords }
    }

    /// Builds a vector from `(index, value)` pairs in any order; repeated
    /// indices are summed and values reduced mod `p`.
    pub fn from_sparse(p: u32, rank: u64, entries: impl IntoIterator<Item = (u64, u32)>) -> Result<Self> {
        let mut coords: Vec<(u64, u32)> = Vec::new();
        for (i, v) in entries {
            if i >= rank {
                return Err(Error::ShapeMismatch(format!("index {i} outside rank {rank}")));
            }
            coords.push((i, v % p));
        }
        coords.sort_unstable_by_key(|&(i, _)| i);
        let mut merged: Vec<(u64, u32)> = Vec::with_capacity(coords.len());
        for (i, v) in coords {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 = (last.1 + v) % p,
                _ => merged.push((i, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0);
        Ok(FpVector { p, rank, coords: merged })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn rank(&self) -> u64 {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    /// Number of nonzero coordinates.
    pub fn nnz(&self) -> usize {
        self.coords.len()
    }

    pub fn get(&self, index: u64) -> u32 {
        self.coords
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|pos| self.coords[pos].1)
            .unwrap_or(0)
    }

    /// Nonzero entries in increasing index order.
    pub fn entries(&self) -> &[(u64, u32)] {
        &self.coords
    }

    pub fn to_dense(&self) -> Vec<u32> {
        let mut out = vec![0; self.rank as usize];
        for &(i, v) in &self.coords {
            out[i as usize] = v;
        }
        out
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.p != other.p || self.rank != other.rank {
            return Err(Error::ShapeMismatch(format!(
                "C_{}^{} vs C_{}^{}",
                self.p, self.rank, other.p, other.rank
            )));
        }
        Ok(())
    }

    /// `self + k * other`, merging the two sorted coordinate lists.
    fn axpy(&self, k: u32, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let p = self.p;
        let k = k % p;
        if k == 0 || other.is_zero() {
            return Ok(self.clone());
        }
        let (a, b) = (&self.coords, &other.coords);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let take = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) => x.0.cmp(&y.0),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            match take {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((b[j].0, (b[j].1 * k) % p));
                    j += 1;
                }
                Ordering::Equal => {
                    let v = (a[i].1 + b[j].1 * k) % p;
                    if v != 0 {
                        out.push((a[i].0, v));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(FpVector { p, rank: self.rank, coords: out })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(1, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(self.p - 1, other)
    }

    pub fn neg(&self) -> Self {
        self.scale(self.p - 1)
    }

    pub fn scale(&self, k: u32) -> Self {
        let k = k % self.p;
        if k == 0 {
            return FpVector::zero(self.p, self.rank);
        }
        let coords = self.coords.iter().map(|&(i, v)| (i, (v * k) % self.p)).collect();
        FpVector { p: self.p, rank: self.rank, coords }
    }

    /// Word length with respect to the minimal generating set `{e_1, ..., e_r}`.
    pub fn t_length(&self) -> u64 {
        self.coords.iter().map(|&(_, v)| u64::from(v.min(self.p - v))).sum()
    }

    /// Word length with respect to the coordinate axes `⋃ ⟨e_i⟩`.
    pub fn e_length(&self) -> u64 {
        self.coords.len() as u64
    }

    /// Lexicographic comparison of the dense coordinate tuples.
    pub fn dense_cmp(&self, other: &Self) -> Ordering {
        for (x, y) in self.coords.iter().zip(other.coords.iter()) {
            if x.0 != y.0 {
                // the vector with the earlier nonzero index is larger there
                return if x.0 < y.0 { Ordering::Greater } else { Ordering::Less };
            }
            if x.1 != y.1 {
                return x.1.cmp(&y.1);
            }
        }
        self.coords.len().cmp(&other.coords.len())
    }

    /// Parses `[c0,c1,...]` (dense) or `{i:v,...}` (sparse, needs `rank`).
    pub fn parse(p: u32, rank: Option<u64>, text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some(body) = text.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
            let dense = body
                .split(',')
                .map(|s| parse_residue(s, p))
                .collect::<Result<Vec<_>>>()?;
            let mut v = FpVector::from_dense(p, &dense);
            if let Some(r) = rank {
                // shorter dense lists are zero-padded to the level rank
                if v.rank > r {
                    return Err(Error::ShapeMismatch(format!("expected rank {r}, vector has {}", v.rank)));
                }
                v.rank = r;
            }
            Ok(v)
        } else if let Some(body) = text.strip_prefix('{').and_then(|t| t.strip_suffix('}')) {
            let rank = rank.ok_or_else(|| Error::Parse("sparse vector needs a known rank".into()))?;
            let mut entries = Vec::new();
            for item in body.split(',').filter(|s| !s.trim().is_empty()) {
                let (i, v) = item
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("bad sparse entry `{item}`")))?;
                let i: u64 = i.trim().parse().map_err(|_| Error::Parse(format!("bad index `{i}`")))?;
                entries.push((i, parse_residue(v, p)?));
            }
            FpVector::from_sparse(p, rank, entries)
        } else {
            Err(Error::Parse(format!("bad vector `{text}`")))
        }
    }
}

fn parse_residue(s: &str, p: u32) -> Result<u32> {
    let v: i64 = s.trim().parse().map_err(|_| Error::Parse(format!("bad coordinate `{s}`")))?;
    Ok(v.rem_euclid(i64::from(p)) as u32)
}

impl fmt::Display for FpVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rank <= 64 {
            let parts: Vec<String> = self.to_dense().iter().map(u32::to_string).collect();
            write!(f, "[{}]", parts.join(","))
        } else {
            let parts: Vec<String> = self.coords.iter().map(|(i, v)| format!("{i}:{v}")).collect();
            write!(f, "{{{}}}", parts.join(","))
        }
    }
}

/// Which tree a signature describes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// The growing-valency tree; level `n` has alphabet rank `tetr_2(n + shift)`
    /// (odd `p`) or `bin_{5,3}(n + shift)` (`p = 2`).
    Growing { p: u32, shift: usize },
    /// The `p^r`-regular tree.
    Regular { p: u32, r: u64 },
    /// A finite list of ranks (a truncated tree).
    Explicit { p: u32, ranks: Vec<u64> },
}

/// Descriptor of the level sequence `(X_n)`.
///
/// Regular signatures carry the chosen basis `V` of far elements that
/// defines the sections of `b`.
#[derive(Clone, Debug)]
pub struct TreeSignature {
    family: Family,
    basis_v: Option<Arc<Vec<FpVector>>>,
}

impl PartialEq for TreeSignature {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family
    }
}

impl Eq for TreeSignature {}

impl std::hash::Hash for TreeSignature {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.family.hash(state);
    }
}

impl TreeSignature {
    pub fn growing(p: u32) -> Result<Self> {
        check_prime(p)?;
        Ok(TreeSignature { family: Family::Growing { p, shift: 0 }, basis_v: None })
    }

    pub fn regular(p: u32, r: u64) -> Result<Self> {
        check_prime(p)?;
        if p == 2 || r == 0 {
            return Err(Error::PreconditionViolated("regular trees need an odd prime and r >= 1".into()));
        }
        let v = crate::treeauto::choose_basis_v(p, r)?;
        Ok(TreeSignature { family: Family::Regular { p, r }, basis_v: Some(Arc::new(v)) })
    }

    pub fn explicit(p: u32, ranks: Vec<u64>) -> Result<Self> {
        check_prime(p)?;
        if ranks.contains(&0) {
            return Err(Error::PreconditionViolated("explicit ranks must be >= 1".into()));
        }
        Ok(TreeSignature { family: Family::Explicit { p, ranks }, basis_v: None })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn p(&self) -> u32 {
        match self.family {
            Family::Growing { p, .. } | Family::Regular { p, .. } | Family::Explicit { p, .. } => p,
        }
    }

    pub fn is_growing(&self) -> bool {
        matches!(self.family, Family::Growing { .. })
    }

    pub fn is_regular(&self) -> bool {
        matches!(self.family, Family::Regular { .. })
    }

    /// Number of levels for truncated trees, `None` when infinite.
    pub fn depth_limit(&self) -> Option<usize> {
        match &self.family {
            Family::Explicit { ranks, .. } => Some(ranks.len()),
            _ => None,
        }
    }

    /// The basis `V` used by regular signatures.
    pub fn basis_v(&self) -> Option<&[FpVector]> {
        self.basis_v.as_deref().map(Vec::as_slice)
    }

    pub fn rank_at(&self, n: usize) -> Result<u64> {
        match &self.family {
            Family::Growing { p, shift } => {
                let level = u32::try_from(n + shift).map_err(|_| Error::Overflow("level"))?;
                if *p == 2 {
                    iter_binom(5, 3, level)
                } else {
                    tetr(2, level)
                }
            }
            Family::Regular { r, .. } => Ok(*r),
            Family::Explicit { ranks, .. } => ranks
                .get(n)
                .copied()
                .ok_or_else(|| Error::ShapeMismatch(format!("level {n} beyond truncated tree of depth {}", ranks.len()))),
        }
    }

    /// `|X_n| = p^rank`, if it fits.
    pub fn alphabet_size(&self, n: usize) -> Result<u64> {
        let r = u32::try_from(self.rank_at(n)?).map_err(|_| Error::Overflow("alphabet size"))?;
        u64::from(self.p()).checked_pow(r).ok_or(Error::Overflow("alphabet size"))
    }

    /// Number of vertices on layer `n`, if it fits.
    pub fn layer_size(&self, n: usize) -> Result<u64> {
        (0..n).try_fold(1u64, |acc, i| {
            acc.checked_mul(self.alphabet_size(i)?).ok_or(Error::Overflow("layer size"))
        })
    }

    pub fn zero(&self, n: usize) -> Result<FpVector> {
        Ok(FpVector::zero(self.p(), self.rank_at(n)?))
    }

    /// The `m`-fold shifted sequence `(X_n)_{n >= m}`.
    pub fn shift(&self, m: usize) -> TreeSignature {
        let family = match &self.family {
            Family::Growing { p, shift } => Family::Growing { p: *p, shift: shift + m },
            Family::Regular { .. } => return self.clone(),
            Family::Explicit { p, ranks } => Family::Explicit { p: *p, ranks: ranks.iter().skip(m).copied().collect() },
        };
        TreeSignature { family, basis_v: self.basis_v.clone() }
    }

    /// The length-`m` prefix sequence, as an explicit signature.
    pub fn truncate(&self, m: usize) -> Result<TreeSignature> {
        let ranks = (0..m).map(|n| self.rank_at(n)).collect::<Result<Vec<_>>>()?;
        Ok(TreeSignature { family: Family::Explicit { p: self.p(), ranks }, basis_v: None })
    }

    /// Size of the far set `F(n) ⊆ X_n`.
    pub fn far_set_size(&self, n: usize) -> Result<u64> {
        let r = self.rank_at(n)?;
        if self.p() == 2 {
            if r <= 3 {
                return Err(Error::RankTooSmall(r));
            }
            binomial(r, 3)
        } else {
            let e = u32::try_from(r).map_err(|_| Error::Overflow("far set size"))?;
            2u64.checked_pow(e).ok_or(Error::Overflow("far set size"))
        }
    }

    /// Lazily enumerates `F(n)` in lexicographic order of the dense tuples.
    pub fn far_set(&self, n: usize) -> Result<FarSetIter> {
        let r = self.rank_at(n)?;
        let p = self.p();
        if p == 2 {
            if r <= 3 {
                return Err(Error::RankTooSmall(r));
            }
            Ok(FarSetIter::Two { r, next: Some([0, 1, 2]) })
        } else {
            let rank = usize::try_from(r).map_err(|_| Error::Overflow("far set rank"))?;
            Ok(FarSetIter::Odd { p, d: (p - 1) / 2, state: Some(vec![false; rank]) })
        }
    }

    /// Collects `F(n)`; refused for ranks above [`MAX_MATERIALIZED_RANK`].
    pub fn far_set_vec(&self, n: usize) -> Result<Vec<FpVector>> {
        let r = self.rank_at(n)?;
        if r > MAX_MATERIALIZED_RANK {
            return Err(Error::CapExceeded { needed: u128::from(self.far_set_size(n).unwrap_or(u64::MAX)), cap: 1 << MAX_MATERIALIZED_RANK });
        }
        Ok(self.far_set(n)?.collect())
    }

    /// Position of `v` in the canonical ordering of `F(n)`, or `None` when
    /// `v` is not a far element.
    pub fn far_index(&self, n: usize, v: &FpVector) -> Result<Option<u64>> {
        let r = self.rank_at(n)?;
        if v.rank() != r || v.p() != self.p() {
            return Err(Error::ShapeMismatch(format!("vector of rank {} at level {n} (rank {r})", v.rank())));
        }
        let p = self.p();
        if p == 2 {
            if r <= 3 || v.nnz() as u64 != r - 3 {
                return Ok(None);
            }
            let zeros = missing_indices(v, 3);
            Ok(Some(rank_triple(r, zeros[0], zeros[1], zeros[2])?))
        } else {
            if v.nnz() as u64 != r {
                return Ok(None);
            }
            let d = (p - 1) / 2;
            if v.entries().iter().any(|&(_, c)| c != d && c != p - d) {
                return Ok(None);
            }
            if r > 63 {
                return Err(Error::Overflow("far set index"));
            }
            let index = v
                .entries()
                .iter()
                .fold(0u64, |acc, &(_, c)| (acc << 1) | u64::from(c == p - d));
            Ok(Some(index))
        }
    }

    /// Membership in `F(n)` without computing an index.
    pub fn is_far(&self, n: usize, v: &FpVector) -> Result<bool> {
        let r = self.rank_at(n)?;
        if v.rank() != r || v.p() != self.p() {
            return Err(Error::ShapeMismatch(format!("vector of rank {} at level {n} (rank {r})", v.rank())));
        }
        let p = self.p();
        if p == 2 {
            return Ok(r > 3 && v.nnz() as u64 == r - 3);
        }
        let d = (p - 1) / 2;
        Ok(v.nnz() as u64 == r && v.entries().iter().all(|&(_, c)| c == d || c == p - d))
    }

    /// The far element with the given canonical index.
    pub fn far_element(&self, n: usize, index: u64) -> Result<FpVector> {
        let r = self.rank_at(n)?;
        let size = self.far_set_size(n)?;
        if index >= size {
            return Err(Error::ShapeMismatch(format!("far index {index} >= {size}")));
        }
        let p = self.p();
        if p == 2 {
            let [a, b, c] = unrank_triple(r, index)?;
            let entries = (0..r).filter(|&i| i != a && i != b && i != c).map(|i| (i, 1));
            FpVector::from_sparse(2, r, entries)
        } else {
            let d = (p - 1) / 2;
            let entries = (0..r).map(|i| {
                let bit = (index >> (r - 1 - i)) & 1;
                (i, if bit == 1 { p - d } else { d })
            });
            FpVector::from_sparse(p, r, entries)
        }
    }

    /// `d(n)`: the `E|_n`-length shared by all far elements of level `n`.
    pub fn d_fn(&self, n: usize) -> Result<u64> {
        match self.family {
            Family::Growing { p, .. } => {
                let r = self.rank_at(n)?;
                Ok(if p == 2 { r - 3 } else { r })
            }
            _ => Err(Error::WrongFamily("d(n) is defined for growing signatures")),
        }
    }

    /// `g(0) = g(1) = 1`, `g(n) = ∏ d(i)` over `i ∈ [0, n-1]` with `i ≡ n (mod 2)`.
    pub fn g_fn(&self, n: usize) -> Result<u64> {
        if !self.is_growing() {
            return Err(Error::WrongFamily("g(n) is defined for growing signatures"));
        }
        if n < 2 {
            return Ok(1);
        }
        (0..n)
            .filter(|i| i % 2 == n % 2)
            .try_fold(1u64, |acc, i| acc.checked_mul(self.d_fn(i)?).ok_or(Error::Overflow("g(n)")))
    }

    /// For a `b`-letter at level `n` sitting over the letter `x`: the index of
    /// the basis vector `e_x` of `X_{n+1}` it acts as, if any.
    pub fn b_section_index(&self, n: usize, x: &FpVector) -> Result<Option<u64>> {
        match &self.family {
            Family::Growing { .. } => self.far_index(n, x),
            Family::Regular { .. } => {
                let v = self.basis_v.as_ref().expect("regular signatures carry V");
                Ok(v.iter().position(|vi| vi == x).map(|i| i as u64))
            }
            Family::Explicit { .. } => Err(Error::WrongFamily("explicit signatures have no b generator")),
        }
    }

    /// Whether `b_n` has a rooted section at `x`, without computing its index.
    pub fn is_special(&self, n: usize, x: &FpVector) -> Result<bool> {
        match &self.family {
            Family::Growing { .. } => self.is_far(n, x),
            _ => Ok(self.b_section_index(n, x)?.is_some()),
        }
    }

    /// Number of letters `x` at which `b_n` has a rooted section.
    pub fn special_count(&self, n: usize) -> Result<u64> {
        match &self.family {
            Family::Growing { .. } => self.far_set_size(n),
            Family::Regular { r, .. } => Ok(*r),
            Family::Explicit { .. } => Err(Error::WrongFamily("explicit signatures have no b generator")),
        }
    }

    /// Lazily enumerates the letters at which `b_n` has a rooted section
    /// (`F(n)` for growing trees, `V` for regular ones).
    pub fn special_letters(&self, n: usize) -> Result<Box<dyn Iterator<Item = FpVector> + '_>> {
        match &self.family {
            Family::Growing { .. } => Ok(Box::new(self.far_set(n)?)),
            Family::Regular { .. } => Ok(Box::new(self.basis_v().unwrap_or(&[]).iter().cloned())),
            Family::Explicit { .. } => Err(Error::WrongFamily("explicit signatures have no b generator")),
        }
    }
}

pub(crate) fn check_prime(p: u32) -> Result<()> {
    let prime = p >= 2 && (2..p).take_while(|i| i * i <= p).all(|i| !p.is_multiple_of(i));
    if prime && p < 1 << 15 {
        Ok(())
    } else {
        Err(Error::PreconditionViolated(format!("{p} is not a supported prime")))
    }
}

/// The first `count` indices absent from the support of `v`.
fn missing_indices(v: &FpVector, count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut expect = 0u64;
    for &(i, _) in v.entries() {
        while expect < i && out.len() < count {
            out.push(expect);
            expect += 1;
        }
        expect = i + 1;
    }
    while out.len() < count && expect < v.rank() {
        out.push(expect);
        expect += 1;
    }
    out
}

/// Rank of the 3-subset `{a < b < c}` of `[0, r)` in lexicographic order.
fn rank_triple(r: u64, a: u64, b: u64, c: u64) -> Result<u64> {
    let before_a = binomial(r, 3)? - binomial(r - a, 3)?;
    let before_b = binomial(r - 1 - a, 2)? - binomial(r - b, 2)?;
    Ok(before_a + before_b + (c - b - 1))
}

fn unrank_triple(r: u64, index: u64) -> Result<[u64; 3]> {
    let total = binomial(r, 3)?;
    // largest a with C(r,3) - C(r-a,3) <= index
    let (mut lo, mut hi) = (0u64, r - 3);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if total - binomial(r - mid, 3)? <= index {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let a = lo;
    let rest = index - (total - binomial(r - a, 3)?);
    let inner = binomial(r - 1 - a, 2)?;
    let (mut lo, mut hi) = (a + 1, r - 2);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if inner - binomial(r - mid, 2)? <= rest {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let b = lo;
    let c = b + 1 + (rest - (inner - binomial(r - b, 2)?));
    Ok([a, b, c])
}

/// Lazy stream over a far set.
pub enum FarSetIter {
    Odd { p: u32, d: u32, state: Option<Vec<bool>> },
    Two { r: u64, next: Option<[u64; 3]> },
}

impl Iterator for FarSetIter {
    type Item = FpVector;

    fn next(&mut self) -> Option<FpVector> {
        match self {
            FarSetIter::Odd { p, d, state } => {
                let bits = state.as_mut()?;
                let (p, d) = (*p, *d);
                let dense: Vec<u32> = bits.iter().map(|&b| if b { p - d } else { d }).collect();
                let out = FpVector::from_dense(p, &dense);
                // odometer: flip trailing `true`s, then the last `false`
                match bits.iter().rposition(|&b| !b) {
                    Some(pos) => {
                        bits[pos] = true;
                        bits[pos + 1..].iter_mut().for_each(|b| *b = false);
                    }
                    None => *state = None,
                }
                Some(out)
            }
            FarSetIter::Two { r, next } => {
                let [a, b, c] = (*next)?;
                let r = *r;
                let entries = (0..r).filter(|&i| i != a && i != b && i != c).map(|i| (i, 1));
                let out = FpVector::from_sparse(2, r, entries).expect("indices in range");
                *next = if c + 1 < r {
                    Some([a, b, c + 1])
                } else if b + 2 < r {
                    Some([a, b + 1, b + 2])
                } else if a + 3 < r {
                    Some([a + 1, a + 2, a + 3])
                } else {
                    None
                };
                Some(out)
            }
        }
    }
}

/// The basis of `X_n`, each index labelled by the far element of level
/// `n - 1` that defines it (or by `e_1 ... e_r` at the root and on regular trees).
#[derive(Clone, Debug)]
pub struct LevelBasis<'a> {
    sig: &'a TreeSignature,
    level: usize,
}

impl<'a> LevelBasis<'a> {
    pub fn new(sig: &'a TreeSignature, level: usize) -> Self {
        LevelBasis { sig, level }
    }

    pub fn len(&self) -> Result<u64> {
        self.sig.rank_at(self.level)
    }

    pub fn is_empty(&self) -> bool {
        self.len().map(|l| l == 0).unwrap_or(true)
    }

    /// The defining far element of basis index `i`, when the level is labelled by one.
    pub fn label(&self, i: u64) -> Result<Option<FpVector>> {
        if self.level == 0 || !self.sig.is_growing() {
            return Ok(None);
        }
        self.sig.far_element(self.level - 1, i).map(Some)
    }

    /// The basis index labelled by `f ∈ F(level - 1)`.
    pub fn index_of(&self, f: &FpVector) -> Result<Option<u64>> {
        if self.level == 0 || !self.sig.is_growing() {
            return Ok(None);
        }
        self.sig.far_index(self.level - 1, f)
    }
}

impl fmt::Display for TreeSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Growing { p, shift: 0 } => write!(f, "growing:p={p}"),
            Family::Growing { p, shift } => write!(f, "growing:p={p},shift={shift}"),
            Family::Regular { p, r } => write!(f, "regular:p={p},r={r}"),
            Family::Explicit { p, ranks } => {
                let ranks: Vec<String> = ranks.iter().map(u64::to_string).collect();
                write!(f, "explicit:p={p},ranks={}", ranks.join(","))
            }
        }
    }
}

impl FromStr for TreeSignature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("signature `{s}` lacks `kind:`")))?;
        let mut p = None;
        let mut r = None;
        let mut shift = 0usize;
        let mut ranks = Vec::new();
        let mut in_ranks = false;
        for item in rest.split(',') {
            let item = item.trim();
            if let Some((key, value)) = item.split_once('=') {
                in_ranks = false;
                let num = |v: &str| v.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad number `{v}`")));
                match key.trim() {
                    "p" => p = Some(num(value)? as u32),
                    "r" => r = Some(num(value)?),
                    "shift" => shift = num(value)? as usize,
                    "ranks" => {
                        in_ranks = true;
                        ranks.push(num(value)?);
                    }
                    other => return Err(Error::Parse(format!("unknown signature key `{other}`"))),
                }
            } else if in_ranks {
                ranks.push(item.parse().map_err(|_| Error::Parse(format!("bad rank `{item}`")))?);
            } else {
                return Err(Error::Parse(format!("bad signature item `{item}`")));
            }
        }
        let p = p.ok_or_else(|| Error::Parse("signature needs p=".into()))?;
        match kind.trim() {
            "growing" => Ok(TreeSignature::growing(p)?.shift(shift)),
            "regular" => TreeSignature::regular(p, r.ok_or_else(|| Error::Parse("regular needs r=".into()))?),
            "explicit" => TreeSignature::explicit(p, ranks),
            other => Err(Error::Parse(format!("unknown signature kind `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn growing(p: u32) -> TreeSignature {
        TreeSignature::growing(p).unwrap()
    }

    #[test]
    fn tetration_values() {
        assert_eq!(tetr(2, 0).unwrap(), 1);
        assert_eq!(tetr(2, 3).unwrap(), 16);
        assert_eq!(tetr(2, 4).unwrap(), 65536);
        assert_eq!(tetr(2, 5), Err(Error::Overflow("tetration")));
    }

    #[test]
    fn iterated_binomial_values() {
        assert_eq!(iter_binom(5, 3, 1).unwrap(), 10);
        assert_eq!(iter_binom(5, 3, 2).unwrap(), 120);
        // C(120, 3) by the product formula
        assert_eq!(iter_binom(5, 3, 3).unwrap(), 120 * 119 * 118 / 6);
        assert_eq!(iter_binom(5, 3, 3).unwrap(), 280840);
        assert!(iter_binom(5, 3, 5).is_err());
        assert!(iter_binom(3, 3, 1).is_err());
    }

    #[test]
    fn ranks_per_family() {
        assert_eq!(growing(3).rank_at(2).unwrap(), 4);
        assert_eq!(growing(2).rank_at(1).unwrap(), 10);
        let reg = TreeSignature::regular(3, 5).unwrap();
        assert_eq!(reg.rank_at(7).unwrap(), 5);
        assert!(growing(3).rank_at(5).is_err());
    }

    #[test]
    fn lengths() {
        let v = FpVector::from_dense(5, &[3, 0]);
        assert_eq!((v.t_length(), v.e_length()), (2, 1));
        let v = FpVector::from_dense(3, &[1, 2, 1]);
        assert_eq!((v.t_length(), v.e_length()), (3, 3));
        let z = FpVector::zero(7, 4);
        assert_eq!((z.t_length(), z.e_length()), (0, 0));
    }

    #[test]
    fn far_sets_small() {
        let f: Vec<_> = growing(3).far_set(1).unwrap().map(|v| v.to_dense()).collect();
        assert_eq!(f, vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]);
        assert_eq!(growing(3).far_set_size(1).unwrap(), 4);

        let f2: Vec<_> = growing(2).far_set(0).unwrap().collect();
        assert_eq!(f2.len(), 10);
        assert!(f2.iter().all(|v| v.e_length() == 2));
        assert_eq!(f2[0].to_dense(), vec![0, 0, 0, 1, 1]);
        assert!(f2.windows(2).all(|w| w[0].dense_cmp(&w[1]) == Ordering::Less));

        let reg = TreeSignature::regular(5, 2).unwrap();
        let f: Vec<_> = reg.far_set(3).unwrap().map(|v| v.to_dense()).collect();
        assert_eq!(f, vec![vec![2, 2], vec![2, 3], vec![3, 2], vec![3, 3]]);
    }

    #[test]
    fn far_set_needs_rank_above_three_for_two() {
        let sig = TreeSignature::explicit(2, vec![3, 5]).unwrap();
        assert_eq!(sig.far_set_size(0), Err(Error::RankTooSmall(3)));
        assert!(sig.far_set(0).is_err());
    }

    #[test]
    fn far_index_round_trips_in_lex_order() {
        for (sig, n) in [(growing(3), 2), (growing(2), 1), (growing(5), 2)] {
            for (i, f) in sig.far_set(n).unwrap().enumerate() {
                assert_eq!(sig.far_index(n, &f).unwrap(), Some(i as u64));
                assert_eq!(sig.far_element(n, i as u64).unwrap(), f);
            }
        }
        let sig = growing(3);
        assert_eq!(sig.far_index(1, &FpVector::from_dense(3, &[1, 0])).unwrap(), None);
    }

    #[test]
    fn unrank_large_p2_level() {
        let sig = growing(2);
        let size = sig.far_set_size(3).unwrap();
        for idx in [0, 1, 12345, size / 2, size - 1] {
            let f = sig.far_element(3, idx).unwrap();
            assert_eq!(f.e_length(), sig.d_fn(3).unwrap());
            assert_eq!(sig.far_index(3, &f).unwrap(), Some(idx));
        }
    }

    #[test]
    fn d_and_g() {
        let s3 = growing(3);
        let d: Vec<u64> = (0..4).map(|n| s3.d_fn(n).unwrap()).collect();
        assert_eq!(d, vec![1, 2, 4, 16]);
        let s2 = growing(2);
        let d: Vec<u64> = (0..3).map(|n| s2.d_fn(n).unwrap()).collect();
        assert_eq!(d, vec![2, 7, 117]);
        assert_eq!(s3.g_fn(4).unwrap(), 4);
        assert_eq!(s3.g_fn(5).unwrap(), 32);
        let reg = TreeSignature::regular(3, 5).unwrap();
        assert_eq!(reg.d_fn(0), Err(Error::WrongFamily("d(n) is defined for growing signatures")));
    }

    #[test]
    fn g_step_consistency() {
        for sig in [growing(3), growing(2)] {
            for n in 2..=4 {
                let lhs = sig.g_fn(n + 2);
                let rhs = sig.d_fn(n).and_then(|d| Ok(sig.g_fn(n)? * d));
                if let (Ok(l), Ok(r)) = (lhs, rhs) {
                    assert_eq!(l, r, "n = {n}");
                }
            }
        }
    }

    #[test]
    fn far_elements_share_lengths() {
        for sig in [growing(3), growing(2), growing(5)] {
            for n in 0..=2 {
                if sig.p() == 3 || n <= 1 {
                    let r = sig.rank_at(n).unwrap();
                    let diam_t = r * u64::from((sig.p() - 1).div_ceil(2));
                    for f in sig.far_set(n).unwrap() {
                        assert_eq!(f.e_length(), sig.d_fn(n).unwrap());
                        if sig.p() != 2 {
                            assert_eq!(f.t_length(), diam_t);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn far_set_size_is_next_rank() {
        for sig in [growing(3), growing(2)] {
            for n in 0..=3 {
                assert_eq!(sig.far_set_size(n).unwrap(), sig.rank_at(n + 1).unwrap());
            }
        }
    }

    #[test]
    fn vector_arithmetic_examples() {
        let a = FpVector::from_dense(3, &[1, 2]);
        let b = FpVector::from_dense(3, &[2, 1]);
        assert!(a.add(&b).unwrap().is_zero());
        assert_eq!(FpVector::from_dense(3, &[1, 0, 2]).neg().to_dense(), vec![2, 0, 1]);
        assert_eq!(FpVector::from_dense(5, &[1, 2]).scale(3).to_dense(), vec![3, 1]);
        let c = FpVector::from_dense(5, &[1, 2]);
        assert!(matches!(a.add(&c), Err(Error::ShapeMismatch(_))));
        assert!(matches!(a.add(&FpVector::zero(3, 3)), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn shift_and_truncate() {
        let s = growing(3);
        assert_eq!(s.shift(2).rank_at(0).unwrap(), 4);
        assert_eq!(s.truncate(2).unwrap(), TreeSignature::explicit(3, vec![1, 2]).unwrap());
        let reg = TreeSignature::regular(3, 5).unwrap();
        assert_eq!(reg.shift(9), reg);
        for m in 0..3 {
            for k in 0..2 {
                assert_eq!(s.shift(m).rank_at(k).unwrap(), s.rank_at(m + k).unwrap());
            }
        }
    }

    #[test]
    fn signature_text_round_trip() {
        for text in ["growing:p=3", "regular:p=3,r=5", "explicit:p=3,ranks=1,2,4", "growing:p=2,shift=1"] {
            let sig: TreeSignature = text.parse().unwrap();
            assert_eq!(sig.to_string(), text);
        }
        assert!("growing:p=4".parse::<TreeSignature>().is_err());
        assert!("regular:p=2,r=3".parse::<TreeSignature>().is_err());
    }

    #[test]
    fn vector_text_formats() {
        let v = FpVector::parse(3, None, "[1,0,2]").unwrap();
        assert_eq!(v.to_string(), "[1,0,2]");
        let w = FpVector::parse(3, Some(3), "{2:2,0:1}").unwrap();
        assert_eq!(v, w);
        assert!(FpVector::parse(3, Some(2), "[1,0,2]").is_err());
        assert_eq!(FpVector::parse(2, Some(5), "[1,1]").unwrap().to_dense(), vec![1, 1, 0, 0, 0]);
        assert!(FpVector::parse(3, None, "{0:1}").is_err());
    }

    fn arb_vec(p: u32, rank: u64) -> impl Strategy<Value = FpVector> {
        proptest::collection::vec((0..rank, 1..p), 0..6)
            .prop_map(move |e| FpVector::from_sparse(p, rank, e).unwrap())
    }

    proptest! {
        #[test]
        fn group_law(a in arb_vec(5, 40), b in arb_vec(5, 40), c in arb_vec(5, 40)) {
            prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
            prop_assert_eq!(a.add(&b).unwrap().add(&c).unwrap(), a.add(&b.add(&c).unwrap()).unwrap());
            prop_assert!(a.add(&a.neg()).unwrap().is_zero());
            prop_assert_eq!(a.sub(&b).unwrap(), a.add(&b.neg()).unwrap());
            prop_assert!(a.entries().iter().all(|&(i, v)| v != 0 && v < 5 && i < 40));
        }

        #[test]
        fn dense_order_matches_tuple_order(a in arb_vec(3, 6), b in arb_vec(3, 6)) {
            prop_assert_eq!(a.dense_cmp(&b), a.to_dense().cmp(&b.to_dense()));
        }
    }
}
