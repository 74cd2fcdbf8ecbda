use std::collections::{BTreeSet, VecDeque};

use crate::error::Result;

use super::word::{Vertex, Word};

/// A (possibly truncated) orbit of a vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbit {
    pub vertices: BTreeSet<Vertex>,
    /// Set when the search stopped at the cap before closing up.
    pub truncated: bool,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Breadth-first closure of `u` under `gens` and their inverses.
pub fn orbit(u: &Vertex, gens: &[Word], cap: usize) -> Result<Orbit> {
    let mut all: Vec<Word> = Vec::with_capacity(2 * gens.len());
    for g in gens {
        all.push(g.collect());
        all.push(g.inverse().collect());
    }
    let mut vertices = BTreeSet::new();
    vertices.insert(u.clone());
    let mut queue = VecDeque::from([u.clone()]);
    while let Some(v) = queue.pop_front() {
        for g in &all {
            let image = g.act(&v)?;
            if !vertices.contains(&image) {
                if vertices.len() >= cap {
                    return Ok(Orbit { vertices, truncated: true });
                }
                vertices.insert(image.clone());
                queue.push_back(image);
            }
        }
    }
    Ok(Orbit { vertices, truncated: false })
}

/// Orbit of `u` under the cyclic group generated by `g`.
pub fn orbit_of_word(u: &Vertex, g: &Word, cap: usize) -> Result<Orbit> {
    let g = g.collect();
    let mut vertices = BTreeSet::new();
    vertices.insert(u.clone());
    let mut v = g.act(u)?;
    while v != *u {
        if vertices.len() >= cap {
            return Ok(Orbit { vertices, truncated: true });
        }
        vertices.insert(v.clone());
        v = g.act(&v)?;
    }
    Ok(Orbit { vertices, truncated: false })
}
