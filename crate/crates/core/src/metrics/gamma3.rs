use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alphabet::{FpVector, TreeSignature};
use crate::error::{Error, Result};
use crate::treeauto::{equal_to_depth, is_trivial_to_depth, letter_section, trivial_outside_to_depth, GenLetter, Word};

use super::{Report, Violation};

/// First-layer sections of `γ = [b_m, b_m^{f⁻¹}, b_m^{f'⁻¹}]` (`m = n + 2`,
/// `b^{f⁻¹}` conjugation by the rooted letter `-f`) against the case table
///
/// ```text
/// γ|_0   = [b_{m+1}, e_f, e_{f'}]
/// γ|_-f  = [e_{-f}, b_{m+1}, b_m|_{f'-f}]
/// γ|_-f' = [e_{-f'}, b_m|_{f-f'}, b_{m+1}]
/// γ|_x   = id otherwise
/// ```
///
/// with `e_y` the section of `b_m` at `y`, each compared to depth `depth`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gamma3Sections {
    pub at_root: bool,
    pub at_f: bool,
    pub at_f2: bool,
    pub elsewhere: bool,
    /// `γ|_-f` trivial, as claimed for `f ≠ f'`.
    pub f_trivial: bool,
    pub f2_trivial: bool,
}

impl Gamma3Sections {
    pub fn table_holds(&self) -> bool {
        self.at_root && self.at_f && self.at_f2 && self.elsewhere
    }
}

fn rooted_e(sig: &TreeSignature, m: usize, y: &FpVector) -> Result<Word> {
    let i = sig.far_index(m, y)?.ok_or_else(|| Error::PreconditionViolated(format!("{y} is not in F({m})")))?;
    Word::rooted(sig, m + 1, FpVector::unit(sig.p(), sig.rank_at(m + 1)?, i, 1)?)
}

pub fn gamma3_sections(sig: &TreeSignature, n: usize, f: &FpVector, f2: &FpVector, depth: usize) -> Result<Gamma3Sections> {
    if !sig.is_growing() {
        return Err(Error::WrongFamily("the section table is stated for growing trees"));
    }
    let m = n + 2;
    for y in [f, f2] {
        if !sig.is_far(m, y)? {
            return Err(Error::PreconditionViolated(format!("{y} is not in F({m})")));
        }
    }
    let b = Word::b(sig, m, 1)?;
    let conj = |y: &FpVector| -> Result<Word> { b.conj(&Word::rooted(sig, m, y.neg())?) };
    let gamma = Word::comm_n(&[&b, &conj(f)?, &conj(f2)?])?;
    let b_next = Word::b(sig, m + 1, 1)?;
    let b_letter = GenLetter::B { level: m, exp: 1 };
    let b_at = |y: FpVector| letter_section(sig, &b_letter, &y);

    let zero = sig.zero(m)?;
    let (mf, mf2) = (f.neg(), f2.neg());
    let root = Word::comm_n(&[&b_next, &rooted_e(sig, m, f)?, &rooted_e(sig, m, f2)?])?;
    let at_f = Word::comm_n(&[&rooted_e(sig, m, &mf)?, &b_next, &b_at(f2.sub(f)?)?])?;
    let at_f2 = Word::comm_n(&[&rooted_e(sig, m, &mf2)?, &b_at(f.sub(f2)?)?, &b_next])?;
    let sec_f = gamma.section_at_letter(&mf)?;
    let sec_f2 = gamma.section_at_letter(&mf2)?;
    Ok(Gamma3Sections {
        at_root: equal_to_depth(&gamma.section_at_letter(&zero)?, &root, depth)?,
        at_f: equal_to_depth(&sec_f, &at_f, depth)?,
        at_f2: equal_to_depth(&sec_f2, &at_f2, depth)?,
        elsewhere: trivial_outside_to_depth(&gamma, &[zero, mf, mf2], depth)?,
        f_trivial: is_trivial_to_depth(&sec_f, depth)?,
        f2_trivial: is_trivial_to_depth(&sec_f2, depth)?,
    })
}

/// Checks the case table on `count` random pairs `f, f' ∈ F(n + 2)`.
///
/// Table failures are violations. Pairs with `f ≠ f'` where a section at
/// `-f` or `-f'` is nontrivial are counted in the notes.
pub fn gamma3_check(sig: &TreeSignature, n: usize, count: usize, seed: u64, depth: usize) -> Result<Report> {
    let m = n + 2;
    let size = sig.far_set_size(m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = Report::new("gamma3_sections", sig.to_string(), n, depth as u64, "sampled", Some(seed));
    let (mut nontrivial, mut opposite, mut equal) = (0, 0, 0);
    for _ in 0..count {
        let f = sig.far_element(m, rng.gen_range(0..size))?;
        let f2 = sig.far_element(m, rng.gen_range(0..size))?;
        let s = gamma3_sections(sig, n, &f, &f2, depth)?;
        equal += usize::from(f == f2);
        if !s.table_holds() {
            report.violations.push(Violation {
                word: format!("f={f} f'={f2}"),
                vertex: String::new(),
                measured: 0,
                detail: format!("{s:?}"),
            });
        }
        if f != f2 && !(s.f_trivial && s.f2_trivial) {
            nontrivial += 1;
            opposite += usize::from(f == f2.neg());
        }
        report.tested += 1;
    }
    report.notes.push(format!("{equal} pairs with f = f'"));
    report.notes.push(format!(
        "{nontrivial} pairs with f != f' have a nontrivial section at -f or -f' ({opposite} of them with f' = -f)"
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_on_some_pairs() {
        let sig = TreeSignature::growing(3).unwrap();
        let f = FpVector::from_dense(3, &[1, 2, 1, 1]);
        let f2 = FpVector::from_dense(3, &[1, 1, 2, 1]);
        let s = gamma3_sections(&sig, 0, &f, &f2, 3).unwrap();
        assert!(s.table_holds() && s.f_trivial && s.f2_trivial, "{s:?}");
        let s = gamma3_sections(&sig, 0, &f, &f, 3).unwrap();
        assert!(s.table_holds() && s.f_trivial, "{s:?}");
        assert!(gamma3_sections(&sig, 0, &sig.zero(2).unwrap(), &f, 3).is_err());
    }
}
