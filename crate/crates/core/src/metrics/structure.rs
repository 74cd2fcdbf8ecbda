use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alphabet::{FpVector, TreeSignature};
use crate::error::{Error, Result};
use crate::treeauto::{equal_to_depth, fractality_witness, is_trivial_to_depth, orbit, orbit_of_word, prove_trivial};
use crate::treeauto::{TrivialityVerdict, Vertex, Word};

use super::{e_alphabet, sample_ball, GenSetTag, Report, Violation};

fn random_vertex(sig: &TreeSignature, base: usize, len: usize, rng: &mut ChaCha8Rng) -> Result<Vertex> {
    let p = sig.p();
    let letters = (base..base + len)
        .map(|m| {
            let dense: Vec<u32> = (0..sig.rank_at(m)?).map(|_| rng.gen_range(0..p)).collect();
            Ok(FpVector::from_dense(p, &dense))
        })
        .collect::<Result<Vec<_>>>()?;
    Vertex::new(sig, base, letters)
}

fn level_gens(sig: &TreeSignature, n: usize) -> Result<Vec<Word>> {
    Ok(e_alphabet(sig, n)?.into_iter().filter(|w| w.letters().len() == 1).collect())
}

/// `b_n^p` is trivial: to depth `depth` on growing trees, by closure on regular ones.
///
/// A closure verdict that is neither proven nor refuted is `BudgetExhausted`.
pub fn order_check(sig: &TreeSignature, n: usize, depth: usize, budget: usize) -> Result<Report> {
    let w = Word::b(sig, n, sig.p())?;
    let mode = if sig.is_regular() { "closure" } else { "bounded-depth" };
    let mut report = Report::new("order", sig.to_string(), n, depth as u64, mode, None);
    let trivial = if sig.is_regular() {
        match prove_trivial(&w, budget, depth.max(64)) {
            TrivialityVerdict::Proven => true,
            TrivialityVerdict::RefutedAt(_) => false,
            other => return Err(Error::BudgetExhausted(other.to_string())),
        }
    } else {
        is_trivial_to_depth(&w, depth)?
    };
    if !trivial {
        report.violations.push(Violation { word: w.to_string(), vertex: String::new(), measured: 0, detail: "b^p is nontrivial".into() });
    }
    report.tested = 1;
    Ok(report)
}

/// The orbit of the zero vertex under `E|_n` is the whole layer, for layers `1..=depth`.
pub fn transitivity_check(sig: &TreeSignature, n: usize, depth: usize, cap: u64) -> Result<Report> {
    let gens = level_gens(sig, n)?;
    let mut report = Report::new("transitivity", sig.to_string(), n, depth as u64, "exhaustive", None);
    let mut layer = 1u64;
    for len in 1..=depth {
        layer = layer.checked_mul(sig.alphabet_size(n + len - 1)?).ok_or(Error::Overflow("layer size"))?;
        if layer > cap {
            return Err(Error::CapExceeded { needed: u128::from(layer), cap: u128::from(cap) });
        }
        let o = orbit(&Vertex::zeros(sig, n, len)?, &gens, layer as usize + 1)?;
        report.observe(o.len() as u64);
        if o.len() as u64 != layer || o.truncated {
            report.violations.push(Violation {
                word: String::new(),
                vertex: format!("layer {len}"),
                measured: o.len() as u64,
                detail: format!("orbit of size {} in a layer of {layer}", o.len()),
            });
        }
        report.tested += 1;
    }
    Ok(report)
}

/// For `count` random vertices `u` of each length `len ≤ depth` and every
/// target in `E|_{n+len}`, a witness fixing `u` with section the target
/// (checked to depth 2).
pub fn fractality_check(sig: &TreeSignature, n: usize, depth: usize, count: usize, seed: u64) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = Report::new("fractality", sig.to_string(), n, depth as u64, "sampled", Some(seed));
    for len in 0..=depth {
        let targets = e_alphabet(sig, n + len)?;
        for _ in 0..count {
            let u = random_vertex(sig, n, len, &mut rng)?;
            for target in &targets {
                let ok = match fractality_witness(sig, target, &u) {
                    Ok(g) => g.act(&u)? == u && equal_to_depth(&g.section(&u)?, target, 2)?,
                    Err(Error::ConstructionFailed(_)) => false,
                    Err(e) => return Err(e),
                };
                if !ok {
                    report.violations.push(Violation {
                        word: target.to_string(),
                        vertex: u.to_string(),
                        measured: 0,
                        detail: "no witness".into(),
                    });
                }
                report.tested += 1;
            }
        }
    }
    Ok(report)
}

/// Orbit sizes of `count` sampled `(word, vertex)` pairs per vertex length
/// `len ≤ depth` are at most `p^len`; the maximum seen is reported.
pub fn max_orbit_check(sig: &TreeSignature, n: usize, depth: usize, count: usize, seed: u64) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = Report::new("max_orbit", sig.to_string(), n, depth as u64, "sampled", Some(seed));
    let words = sample_ball(sig, GenSetTag::E(n), 12, count, seed)?;
    let p = u64::from(sig.p());
    for len in 0..=depth {
        let bound = p.checked_pow(len as u32).ok_or(Error::Overflow("orbit bound"))?;
        for g in &words {
            let u = random_vertex(sig, n, len, &mut rng)?;
            let o = orbit_of_word(&u, g, bound as usize + 1)?;
            report.observe(o.len() as u64);
            if o.truncated || o.len() as u64 > bound {
                report.violations.push(Violation {
                    word: g.to_string(),
                    vertex: u.to_string(),
                    measured: o.len() as u64,
                    detail: format!("orbit larger than p^{len}"),
                });
            }
            report.tested += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_structure_checks() {
        let sig = TreeSignature::growing(3).unwrap();
        assert!(order_check(&sig, 0, 4, 1000).unwrap().passed());
        assert!(order_check(&TreeSignature::regular(3, 2).unwrap(), 0, 4, 1000).unwrap().passed());
        let t = transitivity_check(&sig, 0, 2, 1000).unwrap();
        assert!(t.passed());
        assert_eq!(t.max_observed, Some(27));
        assert!(matches!(transitivity_check(&sig, 0, 3, 1000), Err(Error::CapExceeded { .. })));
        assert!(fractality_check(&sig, 0, 1, 5, 1).unwrap().passed());
        let m = max_orbit_check(&sig, 0, 2, 50, 2).unwrap();
        assert!(m.passed() && m.max_observed.unwrap() <= 9);
    }
}
