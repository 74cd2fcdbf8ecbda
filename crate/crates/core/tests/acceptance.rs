//! Acceptance checks, one test per criterion. Each prints a single
//! `PASS`/`FAIL` line with the measured figures.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use engel_branch::engel::{
    engel_tower, involution_check, length_bound_check, local_checking_check, TowerMode, TowerOutcome,
};
use engel_branch::finitewreath::{abelian_wreath_run, verify_engel_bound, CyclicWreath, WreathSpec};
use engel_branch::metrics::{
    contraction_check, e_alphabet, enumerate_ball, gamma3_check, sample_ball, separation_check,
    vanishing_commutator_check, CheckMode, GenSetTag, Report,
};
use engel_branch::treeauto::{
    fractality_witness, is_trivial_to_depth, orbit, orbit_of_word, prove_trivial, TrivialityVerdict,
};
use engel_branch::{FpVector, TreeSignature, Vertex, Word};

fn report(id: u32, name: &str, ok: bool, detail: &str) {
    println!("criterion {id:>2} {name}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id} {name} failed: {detail}");
}

fn random_vertex(sig: &TreeSignature, len: usize, rng: &mut ChaCha8Rng) -> Vertex {
    let p = sig.p();
    let letters = (0..len)
        .map(|m| {
            let dense: Vec<u32> = (0..sig.rank_at(m).unwrap()).map(|_| rng.gen_range(0..p)).collect();
            FpVector::from_dense(p, &dense)
        })
        .collect();
    Vertex::new(sig, 0, letters).unwrap()
}

fn level0_gens(sig: &TreeSignature) -> Vec<Word> {
    e_alphabet(sig, 0).unwrap().into_iter().filter(|w| w.letters().len() == 1).collect()
}

#[test]
fn criterion_01_order() {
    let mut details = Vec::new();
    let mut ok = true;
    for p in [2, 3] {
        let sig = TreeSignature::growing(p).unwrap();
        let start = Instant::now();
        let trivial = is_trivial_to_depth(&Word::b(&sig, 0, p).unwrap(), 6).unwrap();
        let secs = start.elapsed().as_secs_f64();
        ok &= trivial && secs < 10.0;
        details.push(format!("growing p={p}: depth 6 {trivial} in {secs:.2}s"));
    }
    for r in [2, 5, 8] {
        let sig = TreeSignature::regular(3, r).unwrap();
        let start = Instant::now();
        let verdict = prove_trivial(&Word::b(&sig, 0, 3).unwrap(), 100_000, 64);
        let secs = start.elapsed().as_secs_f64();
        ok &= verdict == TrivialityVerdict::Proven && secs < 5.0;
        details.push(format!("regular r={r}: {verdict} in {secs:.2}s"));
    }
    report(1, "order of b", ok, &details.join("; "));
}

#[test]
fn criterion_02_transitivity_and_fractality() {
    let mut details = Vec::new();
    let mut ok = true;
    for (p, top) in [(3, 3), (2, 2)] {
        let sig = TreeSignature::growing(p).unwrap();
        let gens = level0_gens(&sig);
        for n in 1..=top {
            let layer = sig.layer_size(n).unwrap() as usize;
            let o = orbit(&Vertex::zeros(&sig, 0, n).unwrap(), &gens, layer + 1).unwrap();
            ok &= o.len() == layer && !o.truncated;
            details.push(format!("p={p} layer {n}: {}/{layer}", o.len()));
        }
    }
    let sig = TreeSignature::growing(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut witnesses = 0;
    for n in 0..=2 {
        let targets = e_alphabet(&sig, n).unwrap();
        for _ in 0..50 {
            let u = random_vertex(&sig, n, &mut rng);
            for target in &targets {
                ok &= fractality_witness(&sig, target, &u).is_ok();
                witnesses += 1;
            }
        }
    }
    details.push(format!("{witnesses} fractality witnesses"));
    report(2, "transitivity and fractality", ok, &details.join("; "));
}

#[test]
fn criterion_03_contraction() {
    let start = Instant::now();
    let g3 = TreeSignature::growing(3).unwrap();
    let g2 = TreeSignature::growing(2).unwrap();
    let mut runs = Vec::new();
    for n in 0..=2 {
        runs.push(contraction_check(&g3, n, CheckMode::Exhaustive).unwrap());
    }
    runs.push(contraction_check(&g2, 0, CheckMode::Exhaustive).unwrap());
    runs.push(contraction_check(&g3, 3, CheckMode::Sampled { count: 10_000, seed: 3 }).unwrap());
    let secs = start.elapsed().as_secs_f64();
    let ok = runs.iter().all(|r| r.passed()) && secs < 120.0;
    let detail: Vec<String> = runs
        .iter()
        .map(|r| {
            format!(
                "{} n={} {} words={} violations={} max={:?} internal={}",
                r.sig,
                r.n,
                r.mode,
                r.tested,
                r.violations.len(),
                r.max_observed,
                r.internal_violations.len()
            )
        })
        .collect();
    report(3, "contraction", ok, &format!("{}; {secs:.1}s", detail.join("; ")));
}

#[test]
fn criterion_04_separation() {
    let runs = [
        separation_check(&TreeSignature::growing(3).unwrap(), 2, 2, CheckMode::Exhaustive, 1000).unwrap(),
        separation_check(&TreeSignature::regular(3, 5).unwrap(), 0, 2, CheckMode::Exhaustive, 1000).unwrap(),
    ];
    let ok = runs.iter().all(|r| r.passed() && r.notes.iter().any(|n| n.contains(" 1000 ")));
    let detail: Vec<String> = runs
        .iter()
        .map(|r| format!("{}: words={} violations={} {}", r.sig, r.tested, r.violations.len(), r.notes.join(",")))
        .collect();
    report(4, "separation", ok, &detail.join("; "));
}

#[test]
fn criterion_05_vanishing_commutators() {
    let g = vanishing_commutator_check(&TreeSignature::growing(3).unwrap(), 3, 1, CheckMode::Exhaustive).unwrap();
    let sig = TreeSignature::regular(3, 8).unwrap();
    let b = Word::b(&sig, 0, 1).unwrap();
    let mut proven = 0;
    for i in 0..8 {
        let e = Word::rooted(&sig, 0, FpVector::unit(3, 8, i, 1).unwrap()).unwrap();
        let w = Word::comm_n(&[&b, &e, &b]).unwrap();
        if prove_trivial(&w, 100_000, 64) == TrivialityVerdict::Proven {
            proven += 1;
        }
    }
    let ok = g.passed() && proven == 8;
    report(
        5,
        "vanishing commutators",
        ok,
        &format!("growing n=3: {} words, {} violations; regular r=8: {proven}/8 proven", g.tested, g.violations.len()),
    );
}

#[test]
fn criterion_06_max_orbit() {
    let mut ok = true;
    let mut details = Vec::new();
    for p in [2u32, 3] {
        let sig = TreeSignature::growing(p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let words = sample_ball(&sig, GenSetTag::E(0), 12, 1000, 6).unwrap();
        for n in 0..=3 {
            let bound = (p as usize).pow(n as u32);
            let mut max = 0;
            for g in &words {
                let u = random_vertex(&sig, n, &mut rng);
                let o = orbit_of_word(&u, g, bound + 1).unwrap();
                max = max.max(o.len());
                ok &= !o.truncated && o.len() <= bound;
            }
            details.push(format!("p={p} n={n}: max {max} <= {bound}"));
        }
    }
    report(6, "max orbit", ok, &details.join("; "));
}

fn summary(r: &Report) -> String {
    let mut out = format!("{} tested={} violations={}", r.sig, r.tested, r.violations.len());
    if let Some(m) = r.max_observed {
        out += &format!(" max={m}");
    }
    for n in &r.notes {
        out += &format!(" [{n}]");
    }
    out
}

#[test]
fn criterion_07_wreath_engel_bounds() {
    let start = Instant::now();
    let mut ok = true;
    let mut details = Vec::new();
    for (p, n) in [(2u32, 2usize), (2, 3), (3, 2)] {
        let spec = WreathSpec::new(p, vec![1; n]).unwrap();
        let r = verify_engel_bound(&spec, 1 << 20).unwrap();
        ok &= r.passed();
        if (p, n) == (2, 2) {
            ok &= r.max_observed == Some(2);
        }
        details.push(format!("{} bound={}", summary(&r), r.t));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 300.0;
    report(7, "wreath Engel bounds", ok, &format!("{}; {secs:.1}s", details.join("; ")));
}

#[test]
fn criterion_08_abelian_wreath() {
    let runs = [
        abelian_wreath_run(&CyclicWreath::new(2, 1, 1).unwrap(), CheckMode::Exhaustive).unwrap(),
        abelian_wreath_run(&CyclicWreath::new(3, 1, 1).unwrap(), CheckMode::Exhaustive).unwrap(),
        abelian_wreath_run(&CyclicWreath::new(3, 1, 2).unwrap(), CheckMode::Sampled { count: 10_000, seed: 8 }).unwrap(),
    ];
    let ok = runs.iter().all(|r| r.passed()) && runs[2].tested == 10_000;
    let detail: Vec<String> = runs.iter().map(|r| format!("{} {}", r.mode, summary(r))).collect();
    report(8, "abelian wreath identity", ok, &detail.join("; "));
}

#[test]
fn criterion_09_quotient_engel_towers() {
    let sig = TreeSignature::growing(3).unwrap();
    let ball = enumerate_ball(&sig, GenSetTag::E(0), 2, 10_000).unwrap();
    let mut ok = true;
    let mut max = 0;
    let mut pairs = 0;
    for g in &ball {
        for h in &ball {
            match engel_tower(g, h, 13, TowerMode::QuotientDepth(3)).unwrap().outcome {
                TowerOutcome::Success(k) => max = max.max(k),
                TowerOutcome::NotFoundWithin { .. } => ok = false,
            }
            pairs += 1;
        }
    }
    report(9, "quotient Engel towers", ok, &format!("{} words, {pairs} pairs, max class {max} <= 13", ball.len()));
}

#[test]
fn criterion_10_local_checking() {
    let sig = TreeSignature::growing(3).unwrap();
    let r = local_checking_check(&sig, 0, 100, 10).unwrap();
    // the same comparison one level down, where top groups have several orbits
    let below = local_checking_check(&sig, 1, 100, 11).unwrap();
    let ok = r.passed() && r.tested == 100 && below.passed();
    report(10, "local checking", ok, &format!("level 0: {}; level 1: {}", summary(&r), summary(&below)));
}

#[test]
fn criterion_11_gamma3_sections() {
    let r = gamma3_check(&TreeSignature::growing(3).unwrap(), 0, 100, 11, 3).unwrap();
    report(11, "gamma3 section table", r.passed() && r.tested == 100, &summary(&r));
}

#[test]
fn criterion_12_involution_identity() {
    let r = involution_check(&TreeSignature::growing(2).unwrap(), 2, 100, 4, 12).unwrap();
    report(12, "involution identity", r.passed() && r.tested == 500, &summary(&r));
}

#[test]
fn criterion_13_length_bound() {
    let r = length_bound_check(&TreeSignature::growing(3).unwrap(), 1000, 13).unwrap();
    report(13, "iterated length bound", r.passed() && r.tested == 1000, &summary(&r));
}
