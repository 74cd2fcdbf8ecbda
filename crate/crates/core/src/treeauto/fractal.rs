use crate::alphabet::{Family, FpVector, TreeSignature};
use crate::error::{Error, Result};

use super::word::{GenLetter, Vertex, Word};

/// `(b_m^k)^y = r(-y) b_m^k r(y)` as letters.
fn conjugated_b(m: usize, k: u32, y: &FpVector) -> Vec<GenLetter> {
    let mut out = Vec::with_capacity(3);
    if !y.is_zero() {
        out.push(GenLetter::Rooted { level: m, vector: y.neg() });
    }
    out.push(GenLetter::B { level: m, exp: k });
    if !y.is_zero() {
        out.push(GenLetter::Rooted { level: m, vector: y.clone() });
    }
    out
}

/// Letters of level `m` forming an element that fixes `x ∈ X_m` and has
/// section `letter` there.
fn lift_letter(sig: &TreeSignature, m: usize, letter: &GenLetter, x: &FpVector) -> Result<Vec<GenLetter>> {
    match letter {
        GenLetter::B { exp, .. } => Ok(conjugated_b(m, *exp, x)),
        GenLetter::Rooted { vector, .. } => {
            let mut out = Vec::new();
            for &(j, c) in vector.entries() {
                let label = match sig.family() {
                    Family::Growing { .. } => sig.far_element(m, j)?,
                    Family::Regular { .. } => sig.basis_v().expect("regular signatures carry V")[j as usize].clone(),
                    Family::Explicit { .. } => return Err(Error::WrongFamily("explicit signatures have no b generator")),
                };
                // (b^c)^{x - f}|_x = b^c|_f = e_f^c
                out.extend(conjugated_b(m, c, &x.sub(&label)?));
            }
            Ok(out)
        }
    }
}

/// An element of the group generated by `E` that fixes `u` and whose
/// section at `u` equals `target` (a word at level `u.base() + u.len()`).
///
/// Built by lifting one letter at a time: `b_{m+1}^k` at `x` comes from
/// `(b_m^k)^x`, and `e_f^c` from `(b_m^c)^{x - f}`.
pub fn fractality_witness(sig: &TreeSignature, target: &Word, u: &Vertex) -> Result<Word> {
    let top = u.base() + u.len();
    if target.level() != top {
        return Err(Error::ShapeMismatch(format!("target at level {} below a vertex ending at level {top}", target.level())));
    }
    if sig.depth_limit().is_some() {
        return Err(Error::WrongFamily("fractality needs a growing or regular signature"));
    }
    let mut letters = target.normalize().letters().to_vec();
    for i in (0..u.len()).rev() {
        let m = u.base() + i;
        let x = u.letter(i);
        let mut lifted = Vec::new();
        for l in &letters {
            lifted.extend(lift_letter(sig, m, l, x)?);
        }
        letters = Word::from_letters(sig, m, lifted)?.normalize().letters().to_vec();
    }
    let witness = Word::from_letters(sig, u.base(), letters)?;
    let fixes = witness.act(u)? == *u;
    let section = witness.section(u)?.normalize();
    if !fixes || section != target.normalize() {
        return Err(Error::ConstructionFailed(format!("lift of {target} at {u} produced {witness}")));
    }
    Ok(witness)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lifts_at_first_layer() {
        let sig = TreeSignature::growing(3).unwrap();
        let u = Vertex::parse(&sig, 0, "[1]").unwrap();
        let b1 = Word::b(&sig, 1, 1).unwrap();
        assert_eq!(fractality_witness(&sig, &b1, &u).unwrap().to_string(), "r0:[2] b0 r0:[1]");
        let e = Word::parse(&sig, 1, "r1:[1,0]").unwrap();
        // u - f = 0, so the witness is b0 itself
        assert_eq!(fractality_witness(&sig, &e, &u).unwrap().to_string(), "b0");
        let empty = Word::empty(&sig, 1);
        assert!(fractality_witness(&sig, &empty, &u).unwrap().is_empty());
    }

    #[test]
    fn lifts_at_second_layer() {
        for sig in [TreeSignature::growing(3).unwrap(), TreeSignature::growing(2).unwrap(), TreeSignature::regular(3, 5).unwrap()] {
            let u = Vertex::zeros(&sig, 0, 2).unwrap();
            let b2 = Word::b(&sig, 2, 1).unwrap();
            fractality_witness(&sig, &b2, &u).unwrap();
        }
    }
}
