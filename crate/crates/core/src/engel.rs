//! Iterated identities `w∘n`, Engel towers, orbit-restricted checking,
//! stabilised sections, Engel growth and the involution identity.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::alphabet::TreeSignature;
use crate::error::{Error, Result};
use crate::finitewreath::{peel_top, quotient_to_wreath, PermElem, PermWreath, WreathElem, WreathGroup};
use crate::group::GroupOps;
use crate::metrics::{e_alphabet, enumerate_ball, sample_ball, word_length, GenSetTag, Report, Violation};
use crate::treeauto::{is_trivial_to_depth, prove_trivial, TrivialityVerdict, Vertex, Word, WordGroup};

/// Largest quotient layer the tower and growth computations will build.
pub const DEFAULT_QUOTIENT_CAP: u64 = 1 << 16;

/// `x` (symbol 0) or `y_i` (symbol `i ≥ 1`), possibly inverted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FreeLetter {
    pub sym: usize,
    pub inv: bool,
}

/// A freely reduced word in `x, y_1, ..., y_k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FreeWord {
    letters: Vec<FreeLetter>,
    arity: usize,
}

impl FreeWord {
    /// Reduces `letters`; the arity is at least the largest `y` index used.
    pub fn new(letters: Vec<FreeLetter>, arity: usize) -> Self {
        let arity = letters.iter().map(|l| l.sym).max().unwrap_or(0).max(arity);
        let mut out: Vec<FreeLetter> = Vec::with_capacity(letters.len());
        for l in letters {
            match out.last() {
                Some(last) if last.sym == l.sym && last.inv != l.inv => {
                    out.pop();
                }
                _ => out.push(l),
            }
        }
        FreeWord { letters: out, arity }
    }

    pub fn x() -> Self {
        FreeWord::new(vec![FreeLetter { sym: 0, inv: false }], 0)
    }

    /// `[x, y_1] = x⁻¹ y_1⁻¹ x y_1`.
    pub fn commutator() -> Self {
        "X Y1 x y1".parse().expect("valid word")
    }

    /// `x^p`.
    pub fn power(p: usize) -> Self {
        FreeWord::new(vec![FreeLetter { sym: 0, inv: false }; p], 0)
    }

    pub fn letters(&self) -> &[FreeLetter] {
        &self.letters
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        let letters = self.letters.iter().rev().map(|l| FreeLetter { sym: l.sym, inv: !l.inv }).collect();
        FreeWord { letters, arity: self.arity }
    }

    /// Replaces `x` by `sub` (and `x⁻¹` by its inverse), keeping the `y_i`.
    pub fn substitute_x(&self, sub: &FreeWord) -> Self {
        let sub_inv = sub.inverse();
        let mut letters = Vec::new();
        for l in &self.letters {
            match (l.sym, l.inv) {
                (0, false) => letters.extend_from_slice(&sub.letters),
                (0, true) => letters.extend_from_slice(&sub_inv.letters),
                _ => letters.push(*l),
            }
        }
        FreeWord::new(letters, self.arity.max(sub.arity))
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .letters
            .iter()
            .map(|l| match (l.sym, l.inv) {
                (0, false) => "x".to_string(),
                (0, true) => "X".to_string(),
                (i, false) => format!("y{i}"),
                (i, true) => format!("Y{i}"),
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl FromStr for FreeWord {
    type Err = Error;

    /// Space-separated `x`, `X`, `y1`, `Y1`, ...; `1` or blank is the empty word.
    fn from_str(s: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            let letter = match tok {
                "1" => continue,
                "x" => FreeLetter { sym: 0, inv: false },
                "X" => FreeLetter { sym: 0, inv: true },
                _ => {
                    let (inv, rest) = match tok.strip_prefix('y') {
                        Some(rest) => (false, rest),
                        None => (true, tok.strip_prefix('Y').ok_or_else(|| Error::Parse(format!("bad letter {tok:?}")))?),
                    };
                    let sym: usize = rest.parse().map_err(|_| Error::Parse(format!("bad letter {tok:?}")))?;
                    if sym == 0 {
                        return Err(Error::Parse("y indices start at 1".into()));
                    }
                    FreeLetter { sym, inv }
                }
            };
            letters.push(letter);
        }
        Ok(FreeWord::new(letters, 0))
    }
}

/// `w∘0 = x`, `w∘(n+1) = w(w∘n, y_1, ..., y_k)`.
pub fn iterate_word(w: &FreeWord, n: usize) -> FreeWord {
    let mut cur = FreeWord::new(vec![FreeLetter { sym: 0, inv: false }], w.arity);
    for _ in 0..n {
        cur = w.substitute_x(&cur);
    }
    cur
}

/// `(a(w), [a_1(w), ..., a_k(w)])`, counting inverse letters too.
pub fn counts(w: &FreeWord) -> (u64, Vec<u64>) {
    let mut a = 0;
    let mut ai = vec![0; w.arity];
    for l in &w.letters {
        match l.sym {
            0 => a += 1,
            i => ai[i - 1] += 1,
        }
    }
    (a, ai)
}

/// `a^n ℓ(g) + Σ_{i=0}^{n} a^i · Σ_j a_j ℓ(h_j)` with `a = a(w)`, `a_j = a_j(w)`.
pub fn length_bound(w: &FreeWord, n: u32, len_g: u64, len_h: &[u64]) -> Result<u64> {
    if len_h.len() != w.arity {
        return Err(Error::ArityMismatch { expected: w.arity, got: len_h.len() });
    }
    const OVERFLOW: Error = Error::Overflow("length bound");
    let (a, ai) = counts(w);
    let s = ai
        .iter()
        .zip(len_h)
        .try_fold(0u64, |acc, (&c, &l)| acc.checked_add(c.checked_mul(l)?))
        .ok_or(OVERFLOW)?;
    let mut total = a.checked_pow(n).and_then(|an| an.checked_mul(len_g)).ok_or(OVERFLOW)?;
    let mut ai_pow = 1u64;
    for i in 0..=n {
        total = total.checked_add(ai_pow.checked_mul(s).ok_or(OVERFLOW)?).ok_or(OVERFLOW)?;
        if i < n {
            ai_pow = ai_pow.checked_mul(a).ok_or(OVERFLOW)?;
        }
    }
    Ok(total)
}

/// The word map of `w` at `(g, h_1, ..., h_k)`.
pub fn evaluate<G: GroupOps>(group: &G, w: &FreeWord, g: &G::Elem, hs: &[G::Elem]) -> Result<G::Elem> {
    if hs.len() != w.arity {
        return Err(Error::ArityMismatch { expected: w.arity, got: hs.len() });
    }
    let values: Vec<G::Elem> = std::iter::once(g.clone()).chain(hs.iter().cloned()).collect();
    let inverses: Vec<G::Elem> = values.iter().map(|v| group.inv(v)).collect();
    let mut acc = group.id();
    for l in &w.letters {
        acc = group.mul(&acc, if l.inv { &inverses[l.sym] } else { &values[l.sym] });
    }
    Ok(acc)
}

/// How a tower decides triviality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TowerMode {
    /// Trivial in the quotient by the stabiliser of layer `d`.
    QuotientDepth(usize),
    /// Trivial by a closed set of sections (`prove_trivial`).
    Closure { budget: usize, depth_cap: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TowerOutcome {
    Success(u32),
    NotFoundWithin { limit: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TowerStep {
    pub k: u32,
    pub verdict: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EngelTowerResult {
    pub outcome: TowerOutcome,
    pub mode: TowerMode,
    pub trace: Vec<TowerStep>,
}

/// The least `k ∈ [1, limit]` with `[g,_k h]` trivial in the given mode.
///
/// In quotient mode the commutators are computed on the images in the
/// finite iterated wreath product, which is an exact normal form there.
/// In closure mode they are words, renormalized after every step; a step
/// whose verdict is neither proven nor refuted is `BudgetExhausted`.
pub fn engel_tower(g: &Word, h: &Word, limit: u32, mode: TowerMode) -> Result<EngelTowerResult> {
    if g.level() != h.level() || g.sig() != h.sig() {
        return Err(Error::ShapeMismatch(format!("words at levels {} and {}", g.level(), h.level())));
    }
    let mut trace = Vec::new();
    match mode {
        TowerMode::QuotientDepth(d) => {
            let (spec, mut c) = quotient_to_wreath(g.sig(), d, g, DEFAULT_QUOTIENT_CAP)?;
            let (_, hq) = quotient_to_wreath(h.sig(), d, h, DEFAULT_QUOTIENT_CAP)?;
            let group = WreathGroup { spec };
            for k in 1..=limit {
                c = group.comm(&c, &hq);
                let trivial = c.is_id();
                trace.push(TowerStep { k, verdict: if trivial { "trivial" } else { "nontrivial" }.into() });
                if trivial {
                    return Ok(EngelTowerResult { outcome: TowerOutcome::Success(k), mode, trace });
                }
            }
        }
        TowerMode::Closure { budget, depth_cap } => {
            let group = WordGroup::new(g.sig(), g.level());
            let mut c = g.normalize();
            for k in 1..=limit {
                c = group.comm(&c, h).normalize();
                let verdict = prove_trivial(&c, budget, depth_cap);
                trace.push(TowerStep { k, verdict: verdict.to_string() });
                match verdict {
                    TrivialityVerdict::Proven => {
                        return Ok(EngelTowerResult { outcome: TowerOutcome::Success(k), mode, trace })
                    }
                    TrivialityVerdict::RefutedAt(_) => {}
                    other => return Err(Error::BudgetExhausted(format!("step {k}: {other}"))),
                }
            }
        }
    }
    Ok(EngelTowerResult { outcome: TowerOutcome::NotFoundWithin { limit }, mode, trace })
}

/// The orbits of `⟨t_1, ..., t_k⟩` on `[0, degree)`, each sorted, ordered by
/// least point.
pub fn orbits(degree: usize, tops: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; degree];
    let mut out = Vec::new();
    for start in 0..degree {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut orbit = vec![start];
        let mut i = 0;
        while i < orbit.len() {
            for t in tops {
                let y = t[orbit[i]];
                if !seen[y] {
                    seen[y] = true;
                    orbit.push(y);
                }
            }
            i += 1;
        }
        orbit.sort_unstable();
        out.push(orbit);
    }
    out
}

/// An orbit restriction: the smaller wreath product, `g` and the `h_i`.
pub type LocalInstance<G> = (PermWreath<G>, PermElem<<G as GroupOps>::Elem>, Vec<PermElem<<G as GroupOps>::Elem>>);

/// Restricts `g` (in the base group) and the `h_i` to `orbit`, relabelled
/// as `[0, |orbit|)` in increasing order.
pub fn local_decomposition<G: GroupOps + Clone>(
    wr: &PermWreath<G>,
    g: &PermElem<G::Elem>,
    hs: &[PermElem<G::Elem>],
    orbit: &[usize],
) -> Result<LocalInstance<G>> {
    if g.top.iter().enumerate().any(|(x, &y)| x != y) {
        return Err(Error::NotInBase);
    }
    let index: BTreeMap<usize, usize> = orbit.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let local = PermWreath { inner: wr.inner.clone(), degree: orbit.len() };
    let restrict = |e: &PermElem<G::Elem>| -> Result<PermElem<G::Elem>> {
        let base = orbit.iter().map(|&x| e.base[x].clone()).collect();
        let top = orbit
            .iter()
            .map(|&x| index.get(&e.top[x]).copied().ok_or_else(|| Error::PreconditionViolated(format!("{x} leaves its orbit"))))
            .collect::<Result<Vec<usize>>>()?;
        local.elem(base, top)
    };
    let g_local = restrict(g)?;
    let hs_local = hs.iter().map(restrict).collect::<Result<Vec<_>>>()?;
    Ok((local, g_local, hs_local))
}

/// `(global, local)`: whether `w∘m(g, h)` is trivial, and whether it is
/// trivial on every orbit restriction.
pub fn local_check<G: GroupOps + Clone>(
    wr: &PermWreath<G>,
    w: &FreeWord,
    m: usize,
    g: &PermElem<G::Elem>,
    hs: &[PermElem<G::Elem>],
) -> Result<(bool, bool)> {
    let wm = iterate_word(w, m);
    let global = wr.is_id(&evaluate(wr, &wm, g, hs)?);
    let tops: Vec<Vec<usize>> = hs.iter().map(|h| h.top.clone()).collect();
    let mut local = true;
    for orbit in orbits(wr.degree, &tops) {
        let (lw, lg, lh) = local_decomposition(wr, g, hs, &orbit)?;
        local &= lw.is_id(&evaluate(&lw, &wm, &lg, &lh)?);
    }
    Ok((global, local))
}

fn zero_top(w: &Word) -> Result<Word> {
    let v = w.first_layer_vector()?;
    w.mul(&Word::rooted(w.sig(), w.level(), v.neg())?)
}

/// Compares global and orbit-restricted verdicts on `count` random instances
/// in the depth-2 quotient below `level`: `g ∈ St(1)`, one or two `h`, and
/// `w` either `[x, y_1]∘m` (`m ≤ 2`) or `x^p`.
pub fn local_checking_check(sig: &TreeSignature, level: usize, count: usize, seed: u64) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = Report::new("local_checking", sig.to_string(), level, 2, "sampled", Some(seed));
    let tag = GenSetTag::E(level);
    let p = sig.p() as usize;
    let mut trivial_global = 0;
    for _ in 0..count {
        let mut words = sample_ball(sig, tag, 8, 3, rng.gen())?;
        let k = rng.gen_range(1..=2);
        let g = zero_top(&words[0])?;
        words.truncate(1 + k);
        let (w, m) = if rng.gen_bool(0.75) {
            (FreeWord::new(FreeWord::commutator().letters, k), rng.gen_range(1..=2))
        } else {
            (FreeWord::new(FreeWord::power(p).letters, k), 1)
        };
        let (spec, gq) = quotient_to_wreath(sig, 2, &g, DEFAULT_QUOTIENT_CAP)?;
        let (wr, gp) = peel_top(&spec, &gq)?;
        let mut hs = Vec::with_capacity(k);
        for h in &words[1..] {
            hs.push(peel_top(&spec, &quotient_to_wreath(sig, 2, h, DEFAULT_QUOTIENT_CAP)?.1)?.1);
        }
        let (global, local) = local_check(&wr, &w, m, &gp, &hs)?;
        trivial_global += usize::from(global);
        if global != local {
            report.violations.push(Violation {
                word: format!("g={} h={}", g, words[1..].iter().map(Word::to_string).collect::<Vec<_>>().join(",")),
                vertex: String::new(),
                measured: m as u64,
                detail: format!("w={w} global={global} local={local}"),
            });
        }
        report.tested += 1;
    }
    report.notes.push(format!("{trivial_global} instances trivial"));
    Ok(report)
}

/// The section at `u` (of length `n`) of `w∘f_n(g, h_1, ..., h_k)`, which
/// must fix layer `n`.
pub fn stabilized_section(g: &Word, hs: &[Word], w: &FreeWord, n: usize, u: &Vertex, f_n: usize) -> Result<Word> {
    if u.len() != n || u.base() != g.level() {
        return Err(Error::PreconditionViolated(format!("vertex of length {} at level {}, expected {n} at {}", u.len(), u.base(), g.level())));
    }
    let group = WordGroup::new(g.sig(), g.level());
    let c = evaluate(&group, &iterate_word(w, f_n), g, hs)?;
    if !is_trivial_to_depth(&c, n)? {
        return Err(Error::NotStabilized(n));
    }
    Ok(c.section(u)?.normalize())
}

/// Measured Engel growth of the depth-`d` quotient.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EngelGrowth {
    pub sig: String,
    pub depth: usize,
    pub radius: u64,
    /// Number of distinct quotient images in the ball.
    pub ball: usize,
    pub outcome: TowerOutcome,
    /// The pair attaining the maximum, or the first pair that exceeded the limit.
    pub witness: Option<(String, String)>,
}

/// The least `k ≥ 1` with `[g,_k h]` trivial modulo `St(d)` for all `g, h`
/// in the `E|_0`-ball of radius `n`; radius 0 gives 0 by convention.
///
/// `cap` bounds the ball enumeration; the quotient layer is bounded by
/// [`DEFAULT_QUOTIENT_CAP`].
pub fn engel_growth(sig: &TreeSignature, d: usize, n: u64, limit: u32, cap: u128) -> Result<EngelGrowth> {
    let mut out = EngelGrowth {
        sig: sig.to_string(),
        depth: d,
        radius: n,
        ball: 1,
        outcome: TowerOutcome::Success(0),
        witness: None,
    };
    if n == 0 {
        return Ok(out);
    }
    let ball = enumerate_ball(sig, GenSetTag::E(0), n, cap)?;
    let mut seen = HashSet::new();
    let mut images: Vec<(Word, WreathElem)> = Vec::new();
    let mut spec = None;
    for w in ball {
        let (s, e) = quotient_to_wreath(sig, d, &w, DEFAULT_QUOTIENT_CAP)?;
        spec.get_or_insert(s);
        if seen.insert(e.clone()) {
            images.push((w, e));
        }
    }
    let spec = spec.expect("balls contain the identity");
    out.ball = images.len();
    let mut best = 0;
    for (g, ge) in &images {
        for (h, he) in &images {
            match crate::finitewreath::engel_class_pair(&spec, ge, he, limit)? {
                Some(k) if k > best => {
                    best = k;
                    out.witness = Some((g.to_string(), h.to_string()));
                }
                Some(_) => {}
                None => {
                    out.outcome = TowerOutcome::NotFoundWithin { limit };
                    out.witness = Some((g.to_string(), h.to_string()));
                    return Ok(out);
                }
            }
        }
    }
    out.outcome = TowerOutcome::Success(best);
    Ok(out)
}

/// Whether `[g,_{n+1} h] = [g, h]^{(-2)^n}` for an involution `h`.
pub fn involution_engel_check<G: GroupOps>(group: &G, g: &G::Elem, h: &G::Elem, n: u32) -> Result<bool> {
    if !group.is_id(&group.mul(h, h)) {
        return Err(Error::NotInvolution);
    }
    let c = group.comm(g, h);
    let mut lhs = c.clone();
    for _ in 0..n {
        lhs = group.comm(&lhs, h);
    }
    let e = 1u64.checked_shl(n).ok_or(Error::Overflow("exponent 2^n"))?;
    let mut rhs = group.pow(&c, e);
    if n % 2 == 1 {
        rhs = group.inv(&rhs);
    }
    Ok(lhs == rhs)
}

/// Checks the involution identity for `n ≤ max_n` on `count` random pairs in
/// the depth-`d` quotient: `g` a random word, `h` a random conjugate of an
/// `E|_0` letter of order 2.
pub fn involution_check(sig: &TreeSignature, d: usize, count: usize, max_n: u32, seed: u64) -> Result<Report> {
    if sig.p() != 2 {
        return Err(Error::PreconditionViolated("involutions need p = 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = Report::new("involution", sig.to_string(), 0, u64::from(max_n), "sampled", Some(seed));
    let letters = e_alphabet(sig, 0)?;
    let mut nontrivial = 0;
    for _ in 0..count {
        let words = sample_ball(sig, GenSetTag::E(0), 8, 2, rng.gen())?;
        let g = &words[0];
        let h = letters[rng.gen_range(0..letters.len())].conj(&words[1])?;
        let (spec, gq) = quotient_to_wreath(sig, d, g, DEFAULT_QUOTIENT_CAP)?;
        let (_, hq) = quotient_to_wreath(sig, d, &h, DEFAULT_QUOTIENT_CAP)?;
        let group = WreathGroup { spec };
        nontrivial += usize::from(!group.comm(&gq, &hq).is_id());
        for n in 0..=max_n {
            if !involution_engel_check(&group, &gq, &hq, n)? {
                report.violations.push(Violation {
                    word: g.to_string(),
                    vertex: h.to_string(),
                    measured: u64::from(n),
                    detail: "[g,_{n+1} h] differs from [g,h]^{(-2)^n}".into(),
                });
            }
            report.tested += 1;
        }
    }
    report.notes.push(format!("{nontrivial} of {count} pairs have [g,h] nontrivial"));
    Ok(report)
}

/// Checks `word_length(w∘n(g, h)) ≤ length_bound` in `E|_0` on `count` random
/// cases with `w ∈ {[x, y_1], x^p}`, `n ≤ 5` and inputs of length at most 4.
pub fn length_bound_check(sig: &TreeSignature, count: usize, seed: u64) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = Report::new("length_bound", sig.to_string(), 0, 4, "sampled", Some(seed));
    let tag = GenSetTag::E(0);
    let group = WordGroup::new(sig, 0);
    let comm = FreeWord::commutator();
    let power = FreeWord::power(sig.p() as usize);
    for _ in 0..count {
        let n = rng.gen_range(0..=5u32);
        let words = sample_ball(sig, tag, 4, 2, rng.gen())?;
        let (w, hs) = if rng.gen_bool(0.5) { (&comm, vec![words[1].clone()]) } else { (&power, vec![]) };
        let len_h: Vec<u64> = hs.iter().map(|h| word_length(h, tag)).collect::<Result<_>>()?;
        let bound = length_bound(w, n, word_length(&words[0], tag)?, &len_h)?;
        let value = evaluate(&group, &iterate_word(w, n as usize), &words[0], &hs)?;
        let len = word_length(&value, tag)?;
        report.observe(len);
        if len > bound {
            report.violations.push(Violation {
                word: words[0].to_string(),
                vertex: hs.first().map(Word::to_string).unwrap_or_default(),
                measured: len,
                detail: format!("w={w} n={n} bound={bound}"),
            });
        }
        report.tested += 1;
    }
    Ok(report)
}
