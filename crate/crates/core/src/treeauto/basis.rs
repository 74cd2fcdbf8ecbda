use crate::alphabet::{FarSetIter, FpVector};
use crate::error::{Error, Result};

/// Row-echelon accumulator over `F_p` for independence tests.
pub(crate) struct Echelon {
    p: u32,
    rows: Vec<(usize, Vec<u32>)>,
}

fn inv_mod(a: u32, p: u32) -> u32 {
    // Fermat: a^(p-2)
    let (mut base, mut e, mut acc) = (u64::from(a), p - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % u64::from(p);
        }
        base = base * base % u64::from(p);
        e >>= 1;
    }
    acc as u32
}

impl Echelon {
    pub(crate) fn new(p: u32) -> Self {
        Echelon { p, rows: Vec::new() }
    }

    /// Adds `v` to the span; returns whether it was independent.
    pub(crate) fn insert(&mut self, v: &[u32]) -> bool {
        let p = self.p;
        let mut v = v.to_vec();
        for (pivot, row) in &self.rows {
            let c = v[*pivot];
            if c != 0 {
                for (a, b) in v.iter_mut().zip(row) {
                    *a = (*a + (p - c) * b) % p;
                }
            }
        }
        match v.iter().position(|&c| c != 0) {
            Some(pivot) => {
                let inv = inv_mod(v[pivot], p);
                v.iter_mut().for_each(|c| *c = *c * inv % p);
                self.rows.push((pivot, v));
                true
            }
            None => false,
        }
    }
}

/// A basis of `C_p^r` made of far elements (every coordinate `±d`, `d = (p-1)/2`).
///
/// Tries `v_i = (d, ..., d, -d, d, ..., d)` with `-d` in slot `i` first, and
/// falls back to a greedy scan of the far set in lexicographic order when
/// that matrix is singular mod `p` (which happens exactly when `r ≡ 2 mod p`).
pub fn choose_basis_v(p: u32, r: u64) -> Result<Vec<FpVector>> {
    if p == 2 || r == 0 {
        return Err(Error::PreconditionViolated("basis V needs an odd prime and r >= 1".into()));
    }
    let rank = usize::try_from(r).map_err(|_| Error::Overflow("basis rank"))?;
    let d = (p - 1) / 2;
    let pattern: Vec<Vec<u32>> = (0..rank)
        .map(|i| (0..rank).map(|j| if i == j { p - d } else { d }).collect())
        .collect();
    let mut ech = Echelon::new(p);
    if pattern.iter().all(|v| ech.insert(v)) {
        return Ok(pattern.iter().map(|v| FpVector::from_dense(p, v)).collect());
    }
    let mut ech = Echelon::new(p);
    let mut out = Vec::with_capacity(rank);
    let far = FarSetIter::Odd { p, d, state: Some(vec![false; rank]) };
    for f in far {
        if ech.insert(&f.to_dense()) {
            out.push(f);
            if out.len() == rank {
                return Ok(out);
            }
        }
    }
    Err(Error::ConstructionFailed(format!("far set of C_{p}^{r} does not span")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn independent(p: u32, vs: &[FpVector]) -> bool {
        let mut e = Echelon::new(p);
        vs.iter().all(|v| e.insert(&v.to_dense()))
    }

    #[test]
    fn pattern_for_small_cases() {
        // r = 2 is always singular for the pattern: (2,1) + (1,2) = 0 mod 3
        let mut e = Echelon::new(3);
        assert!(e.insert(&[2, 1]) && !e.insert(&[1, 2]));
        let v: Vec<Vec<u32>> = choose_basis_v(3, 2).unwrap().iter().map(FpVector::to_dense).collect();
        assert_eq!(v, vec![vec![1, 1], vec![1, 2]]);
        let v: Vec<Vec<u32>> = choose_basis_v(5, 2).unwrap().iter().map(FpVector::to_dense).collect();
        assert_eq!(v, vec![vec![2, 2], vec![2, 3]]);
        let v: Vec<Vec<u32>> = choose_basis_v(5, 1).unwrap().iter().map(FpVector::to_dense).collect();
        assert_eq!(v, vec![vec![3]]);
    }

    #[test]
    fn singular_pattern_falls_back() {
        // r = 5 ≡ 2 mod 3 makes the pattern matrix singular
        for (p, r) in [(3, 5), (3, 8), (5, 7), (3, 4), (7, 9)] {
            let v = choose_basis_v(p, r).unwrap();
            assert_eq!(v.len() as u64, r);
            assert!(independent(p, &v), "p = {p}, r = {r}");
            let d = (p - 1) / 2;
            assert!(v.iter().all(|x| x.nnz() as u64 == r && x.entries().iter().all(|&(_, c)| c == d || c == p - d)));
        }
    }

    #[test]
    fn greedy_matches_exhaustive_pair_search() {
        // oracle: first pair (in stream order) with nonzero 2x2 determinant mod 3
        let far: Vec<FpVector> = FarSetIter::Odd { p: 3, d: 1, state: Some(vec![false; 2]) }.collect();
        let det = |a: &FpVector, b: &FpVector| (a.get(0) * b.get(1) + 9 - a.get(1) * b.get(0)) % 3;
        let first = far
            .iter()
            .enumerate()
            .flat_map(|(i, a)| far[i + 1..].iter().map(move |b| (a.clone(), b.clone())))
            .find(|(a, b)| det(a, b) != 0)
            .unwrap();
        assert_eq!(choose_basis_v(3, 2).unwrap(), vec![first.0, first.1]);
    }

    #[test]
    fn rejects_p_two() {
        assert!(choose_basis_v(2, 3).is_err());
    }
}
