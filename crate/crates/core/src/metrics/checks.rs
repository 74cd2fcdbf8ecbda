use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alphabet::{Family, FpVector, TreeSignature};
use crate::error::{Error, Result};
use crate::treeauto::{is_trivial_to_depth, prove_trivial, GenLetter, TrivialityVerdict, Vertex, Word};

use super::ball::{ball_words, sample_ball, CheckMode};
use super::report::{Report, Violation};
use super::{word_length, GenSetTag};

/// Most special letters a check will enumerate one by one.
const SPECIAL_SCAN_CAP: u64 = 1 << 17;

fn violation(w: &Word, u: String, measured: u64, detail: impl Into<String>) -> Violation {
    Violation { word: w.to_string(), vertex: u, measured, detail: detail.into() }
}

fn vertex_string(base: usize, letters: Vec<FpVector>) -> String {
    Vertex::from_raw(base, letters).to_string()
}

fn s_length(w: &Word) -> Result<u64> {
    Ok(w.normalize().conj_form()?.s_length())
}

/// Offsets with a nonzero exponent sum.
fn live_offsets(w: &Word) -> Result<Vec<FpVector>> {
    let p = w.sig().p();
    Ok(w.conj_form()?.exponent_sums(p).into_iter().filter(|(_, k)| *k != 0).map(|(y, _)| y).collect())
}

fn special_vec(sig: &TreeSignature, m: usize) -> Result<Vec<FpVector>> {
    let count = sig.special_count(m)?;
    if count > SPECIAL_SCAN_CAP {
        return Err(Error::CapExceeded { needed: u128::from(count), cap: u128::from(SPECIAL_SCAN_CAP) });
    }
    Ok(sig.special_letters(m)?.collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum SymItem {
    B(u32),
    /// A rooted letter of the next level, its coordinates keyed by the special
    /// letter labelling them.
    R(Vec<(FpVector, u32)>),
}

fn merge_labels(a: &mut Vec<(FpVector, u32)>, b: Vec<(FpVector, u32)>, p: u32) {
    for (label, k) in b {
        match a.iter_mut().find(|(l, _)| *l == label) {
            Some(entry) => entry.1 = (entry.1 + k) % p,
            None => a.push((label, k % p)),
        }
    }
    a.retain(|(_, k)| *k != 0);
}

/// `E`-length of `h|_y` two levels below the level of `h`'s parent, computed
/// with special letters of `h`'s level standing in for the basis vectors
/// they index (those indices may not be representable).
fn symbolic_section_length(h: &Word, y: &FpVector) -> Result<u64> {
    let sig = h.sig();
    let m = h.level();
    let p = sig.p();
    let mut v = y.clone();
    let mut stack: Vec<SymItem> = Vec::new();
    for l in h.letters() {
        let item = match l {
            GenLetter::Rooted { vector, .. } => {
                v = v.add(vector)?;
                continue;
            }
            GenLetter::B { exp, .. } if exp % p == 0 => continue,
            GenLetter::B { exp, .. } => {
                if v.is_zero() {
                    SymItem::B(exp % p)
                } else if sig.is_special(m, &v)? {
                    SymItem::R(vec![(v.clone(), exp % p)])
                } else {
                    continue;
                }
            }
        };
        let empty = match (stack.last_mut(), item) {
            (Some(SymItem::B(a)), SymItem::B(b)) => {
                *a = (*a + b) % p;
                *a == 0
            }
            (Some(SymItem::R(a)), SymItem::R(b)) => {
                merge_labels(a, b, p);
                a.is_empty()
            }
            (_, item) => {
                stack.push(item);
                false
            }
        };
        if empty {
            stack.pop();
        }
    }
    Ok(stack
        .iter()
        .map(|i| match i {
            SymItem::B(_) => 1,
            SymItem::R(labels) => labels.len() as u64,
        })
        .sum())
}

/// A letter outside `exclude` lying in both `a + S` and `b + S`, where `S` is
/// the set of special letters of level `m`.
fn class_intersection(sig: &TreeSignature, m: usize, a: &FpVector, b: &FpVector, exclude: &HashSet<FpVector>) -> Result<Option<FpVector>> {
    let p = sig.p();
    if !(sig.is_growing() && p > 2) {
        for f in special_vec(sig, m)? {
            let y = a.add(&f)?;
            if !exclude.contains(&y) && sig.is_special(m, &y.sub(b)?)? {
                return Ok(Some(y));
            }
        }
        return Ok(None);
    }
    // far letters have every coordinate ±d, so each coordinate is constrained separately
    let r = sig.rank_at(m)?;
    let d = (p - 1) / 2;
    let pm = |x: u32| [(x + d) % p, (x + p - d) % p];
    let mut support: Vec<u64> = a.entries().iter().chain(b.entries()).map(|&(i, _)| i).collect();
    support.sort_unstable();
    support.dedup();
    let mut fixed: Vec<(u64, u32)> = Vec::new();
    let mut choices: Vec<(u64, [u32; 2])> = Vec::new();
    for &c in &support {
        let (ca, cb) = (a.get(c), b.get(c));
        let (sa, sb) = (pm(ca), pm(cb));
        let common: Vec<u32> = sa.iter().copied().filter(|x| sb.contains(x)).collect();
        match common.len() {
            0 => return Ok(None),
            1 => fixed.push((c, common[0])),
            _ => choices.push((c, sa)),
        }
    }
    let free = r - support.len() as u64 + choices.len() as u64;
    // one more candidate than excluded letters is enough, unless there are fewer
    let mut count = exclude.len() as u64 + 1;
    if free < 64 {
        count = count.min(1u64 << free);
    }
    let found = intersection_candidates(p, r, d, &support, &fixed, &choices, count).find(|y| !exclude.contains(y));
    Ok(found)
}

/// The first `count` members of the intersection, varying the lowest free coordinates.
fn intersection_candidates<'a>(
    p: u32,
    r: u64,
    d: u32,
    support: &'a [u64],
    fixed: &'a [(u64, u32)],
    choices: &'a [(u64, [u32; 2])],
    count: u64,
) -> impl Iterator<Item = FpVector> + 'a {
    (0..count).map(move |code| {
        let mut slot = 0u32;
        let mut bit = |pair: [u32; 2]| {
            let v = if slot < 64 && (code >> slot) & 1 == 1 { pair[1] } else { pair[0] };
            slot += 1;
            v
        };
        let mut entries: Vec<(u64, u32)> = Vec::with_capacity(r as usize);
        let mut fi = fixed.iter().peekable();
        let mut ci = choices.iter();
        for c in 0..r {
            if support.binary_search(&c).is_ok() {
                if fi.peek().is_some_and(|(i, _)| *i == c) {
                    entries.push((c, fi.next().expect("peeked").1));
                } else {
                    let (_, pair) = ci.next().expect("support coordinates are fixed or free");
                    entries.push((c, bit(*pair)));
                }
            } else {
                entries.push((c, bit([d, p - d])));
            }
        }
        FpVector::from_sparse(p, r, entries).expect("coordinates below rank")
    })
}

fn contraction_of_word(g: &Word, report: &mut Report) -> Result<()> {
    let sig = g.sig().clone();
    let n = g.level();
    let g = g.normalize();
    for x in g.conj_form()?.b_active() {
        let h = g.section_at_letter(&x)?.normalize();
        let sl = s_length(&h)?;
        if sl > 1 {
            report.internal_violations.push(violation(&g, vertex_string(n, vec![x.clone()]), sl, "S-length of first-level section"));
        }
        let hcf = h.conj_form()?;
        let active = hcf.b_active();
        for y in &active {
            let len = symbolic_section_length(&h, y)?;
            report.observe(len);
            if len > 1 {
                report.violations.push(violation(&g, vertex_string(n, vec![x.clone(), y.clone()]), len, "E-length of two-level section"));
            }
        }
        let live = live_offsets(&h)?;
        if !live.is_empty() {
            report.observe(1);
        }
        let exclude: HashSet<FpVector> = active.into_iter().collect();
        for (i, a) in live.iter().enumerate() {
            for b in &live[i + 1..] {
                if let Some(y) = class_intersection(&sig, n + 1, a, b, &exclude)? {
                    report.observe(2);
                    report.violations.push(violation(&g, vertex_string(n, vec![x.clone(), y]), 2, "two rooted labels meet"));
                }
            }
        }
    }
    report.tested += 1;
    Ok(())
}

/// Checks that every word of `E|_n`-length at most `d(n)` has two-level
/// sections of `E|_{n+2}`-length at most 1.
///
/// Only `b`-active vertices can carry such sections; the first-level bound
/// `ℓ_S(g|_x) ≤ 1` is checked too and reported as internal.
pub fn contraction_check(sig: &TreeSignature, n: usize, mode: CheckMode) -> Result<Report> {
    if !sig.is_growing() {
        return Err(Error::WrongFamily("contraction_check needs a growing signature"));
    }
    let t = sig.d_fn(n)?;
    let (words, label, seed) = ball_words(sig, GenSetTag::E(n), t, mode)?;
    let mut report = Report::new("contraction", sig.to_string(), n, t, label, seed);
    for g in &words {
        contraction_of_word(g, &mut report)?;
    }
    Ok(report)
}

/// Checks `ℓ_{E|_{n+1}}(g|_x) ≤ ℓ_{S|_n}(g)` on `count` sampled `S|_n`-words of
/// length at most `t`, at every `b`-active letter, a few letters of each
/// translate class and a few random letters.
pub fn s_to_e_check(sig: &TreeSignature, n: usize, t: u64, count: usize, seed: u64) -> Result<Report> {
    let words = sample_ball(sig, GenSetTag::S(n), t, count, seed)?;
    let mut report = Report::new("s_to_e", sig.to_string(), n, t, "sampled", Some(seed));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let p = sig.p();
    let rank = sig.rank_at(n)?;
    for g in &words {
        let bound = word_length(g, GenSetTag::S(n))?;
        let mut letters = g.conj_form()?.b_active();
        for y in live_offsets(g)? {
            for f in sig.special_letters(n)?.take(3) {
                letters.push(y.add(&f)?);
            }
        }
        for _ in 0..3 {
            let dense: Vec<u32> = (0..rank).map(|_| rng.gen_range(0..p)).collect();
            letters.push(FpVector::from_dense(p, &dense));
        }
        for x in letters {
            let len = word_length(&g.section_at_letter(&x)?.normalize(), GenSetTag::E(n + 1))?;
            report.observe(len);
            if len > bound {
                report.violations.push(violation(g, vertex_string(n, vec![x]), len, format!("exceeds S-length {bound}")));
            }
            report.tested += 1;
        }
    }
    Ok(report)
}

/// The set a section at a letter is predicted to lie in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeparationCase {
    /// `⟨b_{n+1}⟩`
    BPowers,
    /// `X_{n+1}`
    Layer,
    /// Both bounds hold (`ℓ = t = d - t`); either set is accepted.
    Either,
    Identity,
}

impl SeparationCase {
    /// Classifies `x ∈ X_n` for balls of radius `t`: `ℓ ≤ t` and `ℓ ≥ d(n) - t`
    /// on growing trees, `ℓ < t` and `ℓ > r - t` on regular ones.
    pub fn predict(sig: &TreeSignature, n: usize, t: u64, x: &FpVector) -> Result<SeparationCase> {
        let l = x.e_length();
        let (low, high) = match sig.family() {
            Family::Growing { .. } => (l <= t, l + t >= sig.d_fn(n)?),
            Family::Regular { r, .. } => (l < t, l + t > *r),
            Family::Explicit { .. } => return Err(Error::WrongFamily("separation needs a b generator")),
        };
        Ok(match (low, high) {
            (true, true) => SeparationCase::Either,
            (true, false) => SeparationCase::BPowers,
            (false, true) => SeparationCase::Layer,
            (false, false) => SeparationCase::Identity,
        })
    }

    fn admits_layer(self) -> bool {
        matches!(self, SeparationCase::Layer | SeparationCase::Either)
    }
}

fn separation_radius_ok(sig: &TreeSignature, n: usize, t: u64) -> Result<u64> {
    let d = match sig.family() {
        Family::Growing { .. } => sig.d_fn(n)?,
        Family::Regular { r, .. } => *r,
        Family::Explicit { .. } => return Err(Error::WrongFamily("separation needs a b generator")),
    };
    if 2 * t > d {
        return Err(Error::PreconditionViolated(format!("t = {t} exceeds half of {d}")));
    }
    Ok(d)
}

fn in_b_powers(sec: &Word) -> Result<bool> {
    if sec.letters().iter().all(|l| matches!(l, GenLetter::B { .. })) {
        return Ok(true);
    }
    if sec.root_shift().is_some_and(|s| !s.is_zero()) {
        return Ok(false);
    }
    let sig = sec.sig();
    for k in 0..sig.p() {
        let b = Word::b(sig, sec.level(), (sig.p() - k) % sig.p())?;
        if is_trivial_to_depth(&sec.concat(&b)?, 3)? {
            return Ok(true);
        }
    }
    Ok(false)
}

fn in_layer(sec: &Word) -> Result<bool> {
    if sec.letters().iter().all(|l| matches!(l, GenLetter::Rooted { .. })) {
        return Ok(true);
    }
    let shift = sec.first_layer_vector()?;
    let back = Word::rooted(sec.sig(), sec.level(), shift.neg())?;
    is_trivial_to_depth(&sec.concat(&back)?, 3)
}

/// Whether the section of `g` at `x` lies in the set `case` predicts.
pub(crate) fn section_fits(g: &Word, x: &FpVector, case: SeparationCase) -> Result<bool> {
    let sec = g.section_at_letter(x)?.normalize();
    if sec.is_empty() {
        return Ok(true);
    }
    match case {
        SeparationCase::BPowers => in_b_powers(&sec),
        SeparationCase::Layer => in_layer(&sec),
        SeparationCase::Either => Ok(in_b_powers(&sec)? || in_layer(&sec)?),
        SeparationCase::Identity => is_trivial_to_depth(&sec, 3),
    }
}

fn separation_of_word(g: &Word, t: u64, report: &mut Report) -> Result<()> {
    let sig = g.sig().clone();
    let n = g.level();
    let g = g.normalize();
    let active = g.conj_form()?.b_active();
    for x in &active {
        let case = SeparationCase::predict(&sig, n, t, x)?;
        if !section_fits(&g, x, case)? {
            report.violations.push(violation(&g, vertex_string(n, vec![x.clone()]), x.e_length(), format!("section outside {case:?}")));
        }
    }
    let active: HashSet<FpVector> = active.into_iter().collect();
    let live = live_offsets(&g)?;
    if !live.is_empty() {
        let specials = special_vec(&sig, n)?;
        for y in &live {
            for f in &specials {
                let x = y.add(f)?;
                if active.contains(&x) {
                    continue;
                }
                let case = SeparationCase::predict(&sig, n, t, &x)?;
                if !case.admits_layer() {
                    report.violations.push(violation(&g, vertex_string(n, vec![x.clone()]), x.e_length(), format!("rooted section where {case:?} is predicted")));
                }
            }
        }
    }
    report.tested += 1;
    Ok(())
}

/// Letters of `g` with a nontrivial section: `b`-active letters and, per live
/// offset, one random member of its translate class.
fn sample_nontrivial_letter(g: &Word, rng: &mut ChaCha8Rng) -> Result<Option<FpVector>> {
    let sig = g.sig();
    let n = g.level();
    let cf = g.conj_form()?;
    let active = cf.b_active();
    let live = live_offsets(g)?;
    let total = active.len() + live.len();
    if total == 0 {
        return Ok(None);
    }
    let i = rng.gen_range(0..total);
    if i < active.len() {
        return Ok(Some(active[i].clone()));
    }
    let y = &live[i - active.len()];
    let count = sig.special_count(n)?;
    let j = rng.gen_range(0..count);
    let f = match sig.family() {
        Family::Growing { .. } => sig.far_element(n, j)?,
        _ => sig.special_letters(n)?.nth(j as usize).expect("index below count"),
    };
    let x = y.add(&f)?;
    Ok((!active.contains(&x)).then_some(x))
}

/// Samples pairs `(g|_y, h|_z)` that fail to commute and checks
/// `e_length(y - z) ≥ d - 2t`.
fn distance_corollary(words: &[Word], d: u64, t: u64, pairs: usize, seed: u64, report: &mut Report) -> Result<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found = 0;
    let attempts = pairs.saturating_mul(200);
    for _ in 0..attempts {
        if found >= pairs || words.is_empty() {
            break;
        }
        let g = words[rng.gen_range(0..words.len())].normalize();
        let h = words[rng.gen_range(0..words.len())].normalize();
        let (Some(y), Some(z)) = (sample_nontrivial_letter(&g, &mut rng)?, sample_nontrivial_letter(&h, &mut rng)?) else {
            continue;
        };
        let c = Word::comm(&g.section_at_letter(&y)?, &h.section_at_letter(&z)?)?;
        if is_trivial_to_depth(&c, 2)? {
            continue;
        }
        found += 1;
        let dist = y.sub(&z)?.e_length();
        if dist + 2 * t < d {
            report.violations.push(violation(&g, format!("{} vs {} in {h}", vertex_string(g.level(), vec![y]), vertex_string(g.level(), vec![z])), dist, format!("distance below {d} - 2*{t}")));
        }
    }
    Ok(found)
}

/// Checks the separation trichotomy on the `E|_n`-ball of radius `t`, and the
/// distance corollary on up to `pairs` sampled non-commuting section pairs.
///
/// Distance is measured as the `E`-length of `y - z`.
pub fn separation_check(sig: &TreeSignature, n: usize, t: u64, mode: CheckMode, pairs: usize) -> Result<Report> {
    let d = separation_radius_ok(sig, n, t)?;
    let (words, label, seed) = ball_words(sig, GenSetTag::E(n), t, mode)?;
    let mut report = Report::new("separation", sig.to_string(), n, t, label, seed);
    for g in &words {
        separation_of_word(g, t, &mut report)?;
    }
    if pairs > 0 {
        let found = distance_corollary(&words, d, t, pairs, seed.unwrap_or(0), &mut report)?;
        report.notes.push(format!("distance corollary checked on {found} non-commuting pairs"));
    }
    Ok(report)
}

/// Checks `[b_n, g, b_n] = id` over the `E|_n`-ball of radius `t`: to depth 4
/// on growing trees, by closure on regular ones.
pub fn vanishing_commutator_check(sig: &TreeSignature, n: usize, t: u64, mode: CheckMode) -> Result<Report> {
    let d = match sig.family() {
        Family::Growing { .. } => sig.d_fn(n)?,
        Family::Regular { r, .. } => *r,
        Family::Explicit { .. } => return Err(Error::WrongFamily("vanishing commutators need a b generator")),
    };
    if 4 * (t + 1) > d {
        return Err(Error::PreconditionViolated(format!("t = {t} exceeds {d}/4 - 1")));
    }
    let (words, label, seed) = ball_words(sig, GenSetTag::E(n), t, mode)?;
    let mut report = Report::new("vanishing_commutator", sig.to_string(), n, t, label, seed);
    let b = Word::b(sig, n, 1)?;
    for g in &words {
        let w = Word::comm_n(&[&b, g, &b])?;
        if sig.is_growing() {
            if !is_trivial_to_depth(&w, 4)? {
                report.violations.push(violation(g, String::new(), 4, "[b, g, b] moves a vertex above depth 4"));
            }
        } else {
            match prove_trivial(&w, 100_000, 64) {
                TrivialityVerdict::Proven => {}
                other => report.violations.push(violation(g, String::new(), 0, format!("[b, g, b]: {other}"))),
            }
        }
        report.tested += 1;
    }
    Ok(report)
}

/// Least `m ≤ max_depth` such that every section of `w` on layer `m` has
/// `S`-length at most `c`, following `b`-active letters.
///
/// Sections at other letters are rooted, of length at most 1.
pub fn depth_estimate(w: &Word, c: u64, max_depth: usize) -> Result<Option<usize>> {
    let mut frontier = vec![w.normalize()];
    for m in 0..=max_depth {
        let mut long = Vec::new();
        for s in &frontier {
            if s_length(s)? > c {
                long.push(s.clone());
            }
        }
        if long.is_empty() {
            return Ok(Some(m));
        }
        if m == max_depth {
            break;
        }
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for s in &frontier {
            for x in s.conj_form()?.b_active() {
                let sec = s.section_at_letter(&x)?.normalize();
                if seen.insert(sec.clone()) {
                    next.push(sec);
                }
            }
        }
        frontier = next;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::enumerate_ball;

    fn g3() -> TreeSignature {
        TreeSignature::growing(3).unwrap()
    }

    #[test]
    fn symbolic_length_matches_direct_sections() {
        let sig = g3();
        let words = sample_ball(&sig, GenSetTag::E(2), 10, 400, 11).unwrap();
        let mut compared = 0;
        for g in words {
            let g = g.normalize();
            for x in g.conj_form().unwrap().b_active() {
                let h = g.section_at_letter(&x).unwrap().normalize();
                for y in h.conj_form().unwrap().b_active() {
                    let direct = word_length(&h.section_at_letter(&y).unwrap(), GenSetTag::E(4)).unwrap();
                    assert_eq!(symbolic_section_length(&h, &y).unwrap(), direct, "{g} at {x} {y}");
                    compared += 1;
                }
            }
        }
        assert!(compared > 50, "{compared}");
    }

    #[test]
    fn class_intersection_agrees_with_brute_force() {
        let sig = g3();
        let vs: Vec<FpVector> = (0..81u32)
            .map(|c| FpVector::from_dense(3, &[c % 3, c / 3 % 3, c / 9 % 3, c / 27]))
            .collect();
        let far = sig.far_set_vec(2).unwrap();
        let none = HashSet::new();
        for a in vs.iter().step_by(7) {
            for b in vs.iter().step_by(5) {
                let brute = far.iter().any(|f| sig.is_far(2, &a.add(f).unwrap().sub(b).unwrap()).unwrap());
                let found = class_intersection(&sig, 2, a, b, &none).unwrap();
                assert_eq!(found.is_some(), brute, "{a} {b}");
                if let Some(y) = found {
                    assert!(sig.is_far(2, &y.sub(a).unwrap()).unwrap() && sig.is_far(2, &y.sub(b).unwrap()).unwrap());
                }
            }
        }
        // excluding every member leaves nothing
        let a = &vs[0];
        let all: HashSet<FpVector> = far.iter().map(|f| a.add(f).unwrap()).collect();
        assert_eq!(class_intersection(&sig, 2, a, a, &all).unwrap(), None);
    }

    #[test]
    fn contraction_small_levels() {
        let sig = g3();
        for n in 0..=1 {
            let r = contraction_check(&sig, n, CheckMode::Exhaustive).unwrap();
            assert!(r.passed(), "{}", r.to_json_line());
            assert!(r.tested > 0);
        }
        let r = contraction_check(&TreeSignature::growing(2).unwrap(), 0, CheckMode::Exhaustive).unwrap();
        assert!(r.passed(), "{}", r.to_json_line());
    }

    #[test]
    fn s_to_e_examples() {
        let sig = g3();
        let g = Word::b(&sig, 0, 1).unwrap().conj(&Word::parse(&sig, 0, "r0:[1]").unwrap()).unwrap();
        let s = g.section_at_letter(&FpVector::from_dense(3, &[1])).unwrap();
        assert_eq!(s.to_string(), "b1");
        let r = s_to_e_check(&sig, 1, 5, 200, 3).unwrap();
        assert!(r.passed(), "{}", r.to_json_line());
    }

    fn x2(c: u32) -> FpVector {
        FpVector::from_dense(3, &[c % 3, c / 3 % 3, c / 9 % 3, c / 27])
    }

    #[test]
    fn separation_matches_full_layer_scan() {
        // oracle: every letter of X_2 checked directly
        let sig = g3();
        let t = 2;
        for g in enumerate_ball(&sig, GenSetTag::E(2), t, 1000).unwrap() {
            for c in 0..81 {
                let x = x2(c);
                let case = SeparationCase::predict(&sig, 2, t, &x).unwrap();
                assert!(section_fits(&g, &x, case).unwrap(), "{g} at {x}");
            }
        }
        let r = separation_check(&sig, 2, t, CheckMode::Exhaustive, 50).unwrap();
        assert!(r.passed(), "{}", r.to_json_line());
        assert!(r.notes[0].contains("50"));
    }

    #[test]
    fn separation_edge_cases() {
        let sig = g3();
        let r = separation_check(&sig, 2, 0, CheckMode::Exhaustive, 0).unwrap();
        assert_eq!(r.tested, 1);
        assert!(matches!(separation_check(&sig, 2, 3, CheckMode::Exhaustive, 0), Err(Error::PreconditionViolated(_))));
        let x = FpVector::from_dense(3, &[1, 2, 0, 0]);
        assert_eq!(SeparationCase::predict(&sig, 2, 2, &x).unwrap(), SeparationCase::Either);
        assert_eq!(SeparationCase::predict(&sig, 2, 1, &x).unwrap(), SeparationCase::Identity);
        let reg = TreeSignature::regular(3, 5).unwrap();
        let r = separation_check(&reg, 0, 2, CheckMode::Exhaustive, 20).unwrap();
        assert!(r.passed(), "{}", r.to_json_line());
    }

    #[test]
    fn vanishing_commutators() {
        let sig = g3();
        assert!(vanishing_commutator_check(&sig, 2, 0, CheckMode::Exhaustive).unwrap().passed());
        assert!(matches!(vanishing_commutator_check(&sig, 2, 1, CheckMode::Exhaustive), Err(Error::PreconditionViolated(_))));
        let reg = TreeSignature::regular(3, 8).unwrap();
        let r = vanishing_commutator_check(&reg, 0, 1, CheckMode::Exhaustive).unwrap();
        assert!(r.passed(), "{}", r.to_json_line());
    }

    #[test]
    fn depth_examples() {
        let sig = g3();
        assert_eq!(depth_estimate(&Word::parse(&sig, 0, "b0").unwrap(), 1, 5).unwrap(), Some(0));
        assert_eq!(depth_estimate(&Word::empty(&sig, 0), 1, 5).unwrap(), Some(0));
        let m = depth_estimate(&Word::parse(&sig, 0, "b0 r0:[1] b0 r0:[2]").unwrap(), 1, 2).unwrap();
        assert!(m.is_some_and(|m| m <= 2));
        assert_eq!(depth_estimate(&Word::parse(&sig, 0, "b0 r0:[1] b0 r0:[2]").unwrap(), 1, 0).unwrap(), None);
    }

    #[test]
    fn depth_of_sections_drops() {
        let sig = g3();
        for g in sample_ball(&sig, GenSetTag::E(0), 6, 60, 5).unwrap() {
            let Some(m) = depth_estimate(&g, 1, 3).unwrap() else { continue };
            let g = g.normalize();
            for x in g.conj_form().unwrap().b_active() {
                let s = g.section_at_letter(&x).unwrap();
                let ms = depth_estimate(&s, 1, 3).unwrap().expect("sections are no deeper");
                assert!(ms <= m.saturating_sub(1), "{g} at {x}");
            }
        }
    }
}

#[cfg(test)]
mod sensitivity {
    use super::*;

    #[test]
    fn long_words_break_the_contraction_bound() {
        // far outside the d(n)-ball the two-level bound must fail somewhere
        let sig = TreeSignature::growing(3).unwrap();
        let mut report = Report::new("contraction", sig.to_string(), 1, 12, "sampled", Some(1));
        for g in sample_ball(&sig, GenSetTag::E(1), 12, 2000, 1).unwrap() {
            contraction_of_word(&g, &mut report).unwrap();
        }
        assert!(!report.violations.is_empty());
    }
}
