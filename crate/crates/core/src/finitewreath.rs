//! Dense arithmetic in finite iterated wreath products of elementary abelian
//! `p`-groups, and brute-force Engel-class oracles for them.

use std::fmt;
use std::str::FromStr;

use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::alphabet::{FpVector, TreeSignature};
use crate::error::{Error, Result};
use crate::group::GroupOps;
use crate::metrics::Report;
use crate::treeauto::{GenLetter, Vertex, Word};

/// Largest level alphabet stored densely.
const MAX_LEVEL_SIZE: u64 = 1 << 20;

/// `W_n = (...(W_0 ≀ A_0) ≀ ...) ≀ A_{n-1}` with `A_k = C_p^{ranks[k]}`.
///
/// `ranks[0]` is the innermost level and `ranks[n-1]` the top.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WreathSpec {
    p: u32,
    ranks: Vec<u32>,
    sizes: Vec<u64>,
}

impl WreathSpec {
    pub fn new(p: u32, ranks: Vec<u32>) -> Result<Self> {
        crate::alphabet::check_prime(p)?;
        let mut sizes = Vec::with_capacity(ranks.len());
        for &r in &ranks {
            if r == 0 {
                return Err(Error::PreconditionViolated("wreath levels need rank >= 1".into()));
            }
            let size = u64::from(p).checked_pow(r).filter(|s| *s <= MAX_LEVEL_SIZE);
            sizes.push(size.ok_or(Error::Overflow("wreath level size"))?);
        }
        Ok(WreathSpec { p, ranks, sizes })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    /// Number of levels `n`.
    pub fn depth(&self) -> usize {
        self.ranks.len()
    }

    /// `|A_k|`.
    pub fn level_size(&self, k: usize) -> u64 {
        self.sizes[k]
    }

    /// `|W_n|`, via `|W_{k+1}| = |W_k|^{|A_k|} · |A_k|`.
    pub fn order(&self) -> Option<u128> {
        self.sizes.iter().try_fold(1u128, |acc, &a| {
            let e = u32::try_from(a).ok()?;
            acc.checked_pow(e)?.checked_mul(u128::from(a))
        })
    }

    pub(crate) fn add(&self, k: usize, a: u64, b: u64) -> u64 {
        let p = u64::from(self.p);
        let (mut a, mut b, mut out, mut scale) = (a, b, 0, 1);
        for _ in 0..self.ranks[k] {
            out += ((a % p + b % p) % p) * scale;
            a /= p;
            b /= p;
            scale *= p;
        }
        out
    }

    pub(crate) fn neg(&self, k: usize, a: u64) -> u64 {
        let p = u64::from(self.p);
        let (mut a, mut out, mut scale) = (a, 0, 1);
        for _ in 0..self.ranks[k] {
            out += ((p - a % p) % p) * scale;
            a /= p;
            scale *= p;
        }
        out
    }
}

impl fmt::Display for WreathSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ranks: Vec<String> = self.ranks.iter().map(u32::to_string).collect();
        write!(f, "wreath:p={},ranks={}", self.p, ranks.join(","))
    }
}

impl FromStr for WreathSpec {
    type Err = Error;

    /// `wreath:p=3,ranks=1,1`
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().strip_prefix("wreath:").ok_or_else(|| Error::Parse(format!("expected wreath:..., got {s:?}")))?;
        let (p_part, ranks_part) = body
            .split_once(",ranks=")
            .ok_or_else(|| Error::Parse(format!("missing ranks in {s:?}")))?;
        let p = p_part
            .strip_prefix("p=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad prime in {s:?}")))?;
        let ranks = ranks_part
            .split(',')
            .filter(|r| !r.is_empty())
            .map(|r| r.parse().map_err(|_| Error::Parse(format!("bad rank {r:?}"))))
            .collect::<Result<Vec<u32>>>()?;
        WreathSpec::new(p, ranks)
    }
}

/// An element of `W_k`: trivial, or a base tuple over `A_{k-1}` with a top in `A_{k-1}`.
///
/// Tops are elements of `C_p^r` encoded base `p`, coordinate `i` as digit `i`.
/// Identity subtrees are always stored as `Leaf`, so equality is structural.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum WreathElem {
    Leaf,
    Node { base: Vec<WreathElem>, top: u64 },
}

impl WreathElem {
    fn node(base: Vec<WreathElem>, top: u64) -> WreathElem {
        if top == 0 && base.iter().all(|b| *b == WreathElem::Leaf) {
            WreathElem::Leaf
        } else {
            WreathElem::Node { base, top }
        }
    }

    pub fn is_id(&self) -> bool {
        *self == WreathElem::Leaf
    }

    /// The top component (0 for the identity).
    pub fn top(&self) -> u64 {
        match self {
            WreathElem::Leaf => 0,
            WreathElem::Node { top, .. } => *top,
        }
    }
}

impl Serialize for WreathElem {
    /// Nested lists: `[]` for the identity, `[top, [base...]]` otherwise.
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            WreathElem::Leaf => s.serialize_seq(Some(0))?.end(),
            WreathElem::Node { base, top } => {
                let mut seq = s.serialize_seq(Some(2))?;
                seq.serialize_element(top)?;
                seq.serialize_element(base)?;
                seq.end()
            }
        }
    }
}

fn base_at<'a>(spec: &WreathSpec, k: usize, base: &'a [WreathElem], x: u64) -> Result<&'a WreathElem> {
    if base.len() as u64 != spec.sizes[k] {
        return Err(Error::SpecMismatch(format!("base of length {} at a level of size {}", base.len(), spec.sizes[k])));
    }
    Ok(&base[x as usize])
}

fn mul_rec(spec: &WreathSpec, k: usize, a: &WreathElem, b: &WreathElem) -> Result<WreathElem> {
    match (a, b) {
        (WreathElem::Leaf, x) | (x, WreathElem::Leaf) => Ok(x.clone()),
        (WreathElem::Node { base: f, top: s }, WreathElem::Node { base: g, top: t }) => {
            if k == 0 {
                return Err(Error::SpecMismatch("element deeper than its spec".into()));
            }
            let level = k - 1;
            let mut base = Vec::with_capacity(f.len());
            for x in 0..spec.sizes[level] {
                let fx = base_at(spec, level, f, x)?;
                let gx = base_at(spec, level, g, spec.add(level, x, *s))?;
                base.push(mul_rec(spec, level, fx, gx)?);
            }
            Ok(WreathElem::node(base, spec.add(level, *s, *t)))
        }
    }
}

fn inv_rec(spec: &WreathSpec, k: usize, a: &WreathElem) -> Result<WreathElem> {
    match a {
        WreathElem::Leaf => Ok(WreathElem::Leaf),
        WreathElem::Node { base: f, top: s } => {
            if k == 0 {
                return Err(Error::SpecMismatch("element deeper than its spec".into()));
            }
            let level = k - 1;
            let back = spec.neg(level, *s);
            let mut base = Vec::with_capacity(f.len());
            for x in 0..spec.sizes[level] {
                base.push(inv_rec(spec, level, base_at(spec, level, f, spec.add(level, x, back))?)?);
            }
            Ok(WreathElem::node(base, back))
        }
    }
}

/// `(f, s)·(g, t) = (x ↦ f(x)·g(x + s), s + t)`.
pub fn w_mul(spec: &WreathSpec, a: &WreathElem, b: &WreathElem) -> Result<WreathElem> {
    mul_rec(spec, spec.depth(), a, b)
}

/// `(f, s)⁻¹ = (x ↦ f(x - s)⁻¹, -s)`.
pub fn w_inv(spec: &WreathSpec, a: &WreathElem) -> Result<WreathElem> {
    inv_rec(spec, spec.depth(), a)
}

pub fn w_id(_spec: &WreathSpec) -> WreathElem {
    WreathElem::Leaf
}

/// Image of a vertex (top-level letter first) under `e`.
pub fn w_act(spec: &WreathSpec, e: &WreathElem, path: &[u64]) -> Result<Vec<u64>> {
    let mut out = Vec::with_capacity(path.len());
    let mut cur = e;
    for (i, &x) in path.iter().enumerate() {
        let level = spec
            .depth()
            .checked_sub(i + 1)
            .ok_or_else(|| Error::SpecMismatch("vertex deeper than the spec".into()))?;
        match cur {
            WreathElem::Leaf => out.push(x),
            WreathElem::Node { base, top } => {
                out.push(spec.add(level, x, *top));
                cur = base_at(spec, level, base, x)?;
            }
        }
    }
    Ok(out)
}

/// The group `W_n` of a spec, for generic algorithms.
#[derive(Clone, Debug)]
pub struct WreathGroup {
    pub spec: WreathSpec,
}

impl GroupOps for WreathGroup {
    type Elem = WreathElem;

    fn mul(&self, a: &WreathElem, b: &WreathElem) -> WreathElem {
        w_mul(&self.spec, a, b).expect("elements built for this spec")
    }

    fn inv(&self, a: &WreathElem) -> WreathElem {
        w_inv(&self.spec, a).expect("elements built for this spec")
    }

    fn id(&self) -> WreathElem {
        WreathElem::Leaf
    }
}

fn enumerate_level(spec: &WreathSpec, k: usize) -> Vec<WreathElem> {
    if k == 0 {
        return vec![WreathElem::Leaf];
    }
    let inner = enumerate_level(spec, k - 1);
    let size = spec.sizes[k - 1] as usize;
    let mut out = Vec::new();
    for top in 0..spec.sizes[k - 1] {
        let mut idx = vec![0usize; size];
        loop {
            out.push(WreathElem::node(idx.iter().map(|&i| inner[i].clone()).collect(), top));
            // odometer over base tuples
            let mut pos = 0;
            while pos < size {
                idx[pos] += 1;
                if idx[pos] < inner.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == size {
                break;
            }
        }
    }
    out
}

/// Every element of `W_n` exactly once.
pub fn enumerate_group(spec: &WreathSpec, cap: u128) -> Result<Vec<WreathElem>> {
    let order = spec.order().unwrap_or(u128::MAX);
    if order > cap {
        return Err(Error::CapExceeded { needed: order, cap });
    }
    Ok(enumerate_level(spec, spec.depth()))
}

/// Least `k ∈ [1, limit]` with `[g,_k h] = id`.
pub fn engel_class_pair(spec: &WreathSpec, g: &WreathElem, h: &WreathElem, limit: u32) -> Result<Option<u32>> {
    let group = WreathGroup { spec: spec.clone() };
    let mut c = g.clone();
    for k in 1..=limit {
        c = w_mul(spec, &w_inv(spec, &c)?, &group.mul(&w_inv(spec, h)?, &group.mul(&c, h)))?;
        if c.is_id() {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// `(p^n - 1)/(p - 1)`.
pub fn engel_bound(p: u32, n: usize) -> Result<u32> {
    let n = u32::try_from(n).map_err(|_| Error::Overflow("Engel bound"))?;
    let pn = p.checked_pow(n).ok_or(Error::Overflow("Engel bound"))?;
    Ok((pn - 1) / (p - 1))
}

/// Checks exhaustively that `W_n` is `(p^n - 1)/(p - 1)`-Engel; the largest
/// class met is reported as `max_observed`.
pub fn verify_engel_bound(spec: &WreathSpec, cap: u128) -> Result<Report> {
    let elems = enumerate_group(spec, cap)?;
    let bound = engel_bound(spec.p, spec.depth())?;
    let mut report = Report::new("wreath_engel", spec.to_string(), spec.depth(), u64::from(bound), "exhaustive", None);
    for g in &elems {
        for h in &elems {
            match engel_class_pair(spec, g, h, bound)? {
                Some(k) => report.observe(u64::from(k)),
                None => report.violations.push(crate::metrics::Violation {
                    word: serde_json::to_string(&(g, h)).expect("elements serialize"),
                    vertex: String::new(),
                    measured: u64::from(bound) + 1,
                    detail: format!("[g,_k h] nontrivial for all k <= {bound}"),
                }),
            }
            report.tested += 1;
        }
    }
    Ok(report)
}

/// `G ≀ C_m` with `G = C_p^rank` abelian and `C_m = C_{p^r}` shifting `[0, m)` cyclically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicWreath {
    pub g: WreathSpec,
    pub m: u64,
}

/// Element `((g_x)_x, σ^top)` of a [`CyclicWreath`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicElem {
    pub base: Vec<u64>,
    pub top: u64,
}

impl CyclicWreath {
    pub fn new(p: u32, g_rank: u32, r: u32) -> Result<Self> {
        let m = u64::from(p).checked_pow(r).filter(|m| *m <= MAX_LEVEL_SIZE).ok_or(Error::Overflow("top order"))?;
        Ok(CyclicWreath { g: WreathSpec::new(p, vec![g_rank])?, m })
    }

    pub fn base_elem(&self, base: Vec<u64>) -> Result<CyclicElem> {
        if base.len() as u64 != self.m || base.iter().any(|&c| c >= self.g.level_size(0)) {
            return Err(Error::PreconditionViolated(format!("tuple of {} components for a top of order {}", base.len(), self.m)));
        }
        Ok(CyclicElem { base, top: 0 })
    }

    /// The shift `σ`.
    pub fn sigma(&self) -> CyclicElem {
        CyclicElem { base: vec![0; self.m as usize], top: 1 % self.m }
    }
}

impl GroupOps for CyclicWreath {
    type Elem = CyclicElem;

    fn mul(&self, a: &CyclicElem, b: &CyclicElem) -> CyclicElem {
        let m = self.m;
        let base = (0..m).map(|x| self.g.add(0, a.base[x as usize], b.base[((x + a.top) % m) as usize])).collect();
        CyclicElem { base, top: (a.top + b.top) % m }
    }

    fn inv(&self, a: &CyclicElem) -> CyclicElem {
        let m = self.m;
        let back = (m - a.top) % m;
        let base = (0..m).map(|x| self.g.neg(0, a.base[((x + back) % m) as usize])).collect();
        CyclicElem { base, top: back }
    }

    fn id(&self) -> CyclicElem {
        CyclicElem { base: vec![0; self.m as usize], top: 0 }
    }
}

/// Whether `[(g_x)_x,_m (h_x)_x σ]` is the identity, with `m = p^r`.
pub fn abelian_wreath_check(w: &CyclicWreath, g: &[u64], h: &[u64]) -> Result<bool> {
    let g = w.base_elem(g.to_vec())?;
    let h = w.mul(&w.base_elem(h.to_vec())?, &w.sigma());
    let mut c = g;
    for _ in 0..w.m {
        c = w.comm(&c, &h);
    }
    Ok(w.is_id(&c))
}

fn binomial_mod(n: u64, k: u64, p: u64) -> u64 {
    // Lucas
    let (mut n, mut k, mut acc) = (n, k, 1u64);
    while k > 0 || n > 0 {
        let (a, b) = (n % p, k % p);
        if b > a {
            return 0;
        }
        let mut c = 1u64;
        for i in 0..b {
            c = c * ((a - i) % p) % p;
        }
        let mut d = 1u64;
        for i in 1..=b {
            d = d * i % p;
        }
        // d is a unit mod p since b < p
        let mut inv = 1u64;
        let (mut base, mut e) = (d, p - 2);
        while e > 0 {
            if e & 1 == 1 {
                inv = inv * base % p;
            }
            base = base * base % p;
            e >>= 1;
        }
        acc = acc * (c * inv % p) % p;
        n /= p;
        k /= p;
    }
    acc
}

/// Exponent of `g` in component `x` of `[(g, id, ..., id),_n σ]`, from
/// `[f, σ](x) = f(x - 1) - f(x)`: the sum of `(-1)^{n-j} C(n, j)` over
/// `j ≤ n` with `j ≡ x (mod m)`, reduced mod `p`. Components are 0-indexed.
pub fn component_exponent(p: u32, m: u64, n: u64, x: u64) -> u64 {
    let p = u64::from(p);
    let mut e = 0u64;
    let mut j = x % m;
    while j <= n {
        let c = binomial_mod(n, j, p);
        e = if (n - j).is_multiple_of(2) { (e + c) % p } else { (e + p - c) % p };
        j += m;
    }
    e
}

/// Compares component `x` of `[(g, id, ..., id),_n σ]` computed directly in
/// `C_p ≀ C_{p^r}` with [`component_exponent`].
pub fn component_formula_check(p: u32, r: u32, g: u64, n: u64, x: u64) -> Result<bool> {
    let w = CyclicWreath::new(p, 1, r)?;
    if x >= w.m || g >= u64::from(p) {
        return Err(Error::PreconditionViolated(format!("component {x} or element {g} out of range")));
    }
    let mut base = vec![0; w.m as usize];
    base[0] = g;
    let mut c = w.base_elem(base)?;
    let sigma = w.sigma();
    for _ in 0..n {
        c = w.comm(&c, &sigma);
    }
    let expected = g * component_exponent(p, w.m, n, x) % u64::from(p);
    Ok(c.top == 0 && c.base[x as usize] == expected)
}

fn vector_code(v: &FpVector) -> u64 {
    let p = u64::from(v.p());
    v.entries().iter().map(|&(i, c)| u64::from(c) * p.pow(i as u32)).sum()
}

fn code_vector(p: u32, rank: u64, code: u64) -> FpVector {
    let mut c = code;
    let dense: Vec<u32> = (0..rank)
        .map(|_| {
            let d = (c % u64::from(p)) as u32;
            c /= u64::from(p);
            d
        })
        .collect();
    FpVector::from_dense(p, &dense)
}

/// The wreath spec of the depth-`d` quotient below level `m`:
/// ranks `rank(m + d - 1), ..., rank(m)`.
pub fn quotient_spec(sig: &TreeSignature, m: usize, d: usize) -> Result<WreathSpec> {
    let mut ranks = Vec::with_capacity(d);
    for i in (m..m + d).rev() {
        ranks.push(u32::try_from(sig.rank_at(i)?).map_err(|_| Error::Overflow("quotient rank"))?);
    }
    WreathSpec::new(sig.p(), ranks)
}

fn quotient_rec(spec: &WreathSpec, k: usize, w: &Word) -> Result<WreathElem> {
    if k == 0 || w.is_empty() {
        return Ok(WreathElem::Leaf);
    }
    let level = k - 1;
    let top = vector_code(&w.first_layer_vector()?);
    let size = spec.level_size(level);
    if !w.letters().iter().any(|l| matches!(l, GenLetter::B { .. })) {
        return Ok(WreathElem::node(vec![WreathElem::Leaf; size as usize], top));
    }
    let rank = u64::from(spec.ranks()[level]);
    let mut base = Vec::with_capacity(size as usize);
    for x in 0..size {
        let sec = w.section_at_letter(&code_vector(spec.p(), rank, x))?.normalize();
        base.push(quotient_rec(spec, level, &sec)?);
    }
    Ok(WreathElem::node(base, top))
}

/// Image of `w` in the depth-`d` congruence quotient, as an element of the
/// iterated wreath product of the level alphabets.
///
/// Fails with `CapExceeded` when layer `d` below the word's level has more
/// than `cap` vertices.
pub fn quotient_to_wreath(sig: &TreeSignature, d: usize, w: &Word, cap: u64) -> Result<(WreathSpec, WreathElem)> {
    let m = w.level();
    let layer = (m..m + d).try_fold(1u64, |acc, i| acc.checked_mul(sig.alphabet_size(i).ok()?));
    match layer {
        Some(l) if l <= cap => {}
        _ => return Err(Error::CapExceeded { needed: layer.map_or(u128::MAX, u128::from), cap: u128::from(cap) }),
    }
    let spec = quotient_spec(sig, m, d)?;
    let e = quotient_rec(&spec, d, &w.normalize())?;
    Ok((spec, e))
}

/// A vertex as wreath coordinates, top level first.
pub fn vertex_codes(u: &Vertex) -> Vec<u64> {
    u.letters().map(vector_code).collect()
}

/// `G ≀_X T` for `T` given by permutations of `X = [0, degree)`.
#[derive(Clone, Debug)]
pub struct PermWreath<G> {
    pub inner: G,
    pub degree: usize,
}

/// `((g_x)_x, t)` with `t[x] = x.t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermElem<E> {
    pub base: Vec<E>,
    pub top: Vec<usize>,
}

impl<G: GroupOps> PermWreath<G> {
    pub fn elem(&self, base: Vec<G::Elem>, top: Vec<usize>) -> Result<PermElem<G::Elem>> {
        let mut seen = vec![false; self.degree];
        let is_perm = top.len() == self.degree && top.iter().all(|&y| y < self.degree && !std::mem::replace(&mut seen[y], true));
        if base.len() != self.degree || !is_perm {
            return Err(Error::SpecMismatch(format!("element does not act on {} points", self.degree)));
        }
        Ok(PermElem { base, top })
    }
}

impl<G: GroupOps> GroupOps for PermWreath<G> {
    type Elem = PermElem<G::Elem>;

    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let base = (0..self.degree).map(|x| self.inner.mul(&a.base[x], &b.base[a.top[x]])).collect();
        let top = (0..self.degree).map(|x| b.top[a.top[x]]).collect();
        PermElem { base, top }
    }

    fn inv(&self, a: &Self::Elem) -> Self::Elem {
        let mut back = vec![0; self.degree];
        for (x, &y) in a.top.iter().enumerate() {
            back[y] = x;
        }
        let base = (0..self.degree).map(|x| self.inner.inv(&a.base[back[x]])).collect();
        PermElem { base, top: back }
    }

    fn id(&self) -> Self::Elem {
        PermElem { base: vec![self.inner.id(); self.degree], top: (0..self.degree).collect() }
    }
}

/// Splits `W_n = W_{n-1} ≀ A_{n-1}` at the top: the base tuple over `A_{n-1}`
/// and the top as a permutation of `A_{n-1}`.
pub fn peel_top(spec: &WreathSpec, e: &WreathElem) -> Result<(PermWreath<WreathGroup>, PermElem<WreathElem>)> {
    let top_level = spec
        .depth()
        .checked_sub(1)
        .ok_or_else(|| Error::PreconditionViolated("the trivial wreath product has no top".into()))?;
    let inner = WreathSpec::new(spec.p, spec.ranks[..top_level].to_vec())?;
    let size = spec.sizes[top_level];
    let wr = PermWreath { inner: WreathGroup { spec: inner }, degree: size as usize };
    let elem = match e {
        WreathElem::Leaf => wr.id(),
        WreathElem::Node { base, top } => {
            if base.len() as u64 != size {
                return Err(Error::SpecMismatch(format!("base of length {} at a level of size {size}", base.len())));
            }
            PermElem { base: base.clone(), top: (0..size).map(|x| spec.add(top_level, x, *top) as usize).collect() }
        }
    };
    Ok((wr, elem))
}

fn tuple_from_code(g_size: u64, m: u64, mut code: u128) -> Vec<u64> {
    (0..m)
        .map(|_| {
            let d = (code % u128::from(g_size)) as u64;
            code /= u128::from(g_size);
            d
        })
        .collect()
}

/// Runs [`abelian_wreath_check`] over all pairs of base tuples, or over
/// sampled pairs when the mode asks for it (or `Auto` exceeds its cap).
pub fn abelian_wreath_run(w: &CyclicWreath, mode: crate::metrics::CheckMode) -> Result<Report> {
    use crate::metrics::CheckMode;
    use rand::{Rng, SeedableRng};

    let g_size = w.g.level_size(0);
    let tuples = u128::from(g_size).checked_pow(w.m as u32);
    let pairs = tuples.and_then(|t| t.checked_mul(t));
    let sampled = match mode {
        CheckMode::Exhaustive => None,
        CheckMode::Sampled { count, seed } => Some((count, seed)),
        CheckMode::Auto { cap, count, seed } => (pairs.is_none_or(|n| n > cap)).then_some((count, seed)),
    };
    let name = format!("abelian:p={},g_rank={},m={}", w.g.p, w.g.ranks[0], w.m);
    let mut report = match sampled {
        None => Report::new("abelian_wreath", name, 0, w.m, "exhaustive", None),
        Some((_, seed)) => Report::new("abelian_wreath", name, 0, w.m, "sampled", Some(seed)),
    };
    let record = |report: &mut Report, g: Vec<u64>, h: Vec<u64>| -> Result<()> {
        if !abelian_wreath_check(w, &g, &h)? {
            report.violations.push(crate::metrics::Violation {
                word: format!("{g:?}"),
                vertex: format!("{h:?}"),
                measured: w.m,
                detail: "commutator nontrivial after p^r steps".into(),
            });
        }
        report.tested += 1;
        Ok(())
    };
    match sampled {
        None => {
            let tuples = tuples.ok_or(Error::Overflow("tuple count"))?;
            for a in 0..tuples {
                for b in 0..tuples {
                    record(&mut report, tuple_from_code(g_size, w.m, a), tuple_from_code(g_size, w.m, b))?;
                }
            }
        }
        Some((count, seed)) => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..count {
                let g = (0..w.m).map(|_| rng.gen_range(0..g_size)).collect();
                let h = (0..w.m).map(|_| rng.gen_range(0..g_size)).collect();
                record(&mut report, g, h)?;
            }
        }
    }
    Ok(report)
}
